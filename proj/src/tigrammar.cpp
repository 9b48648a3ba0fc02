#include "modal/tigrammar.hpp"

#include <functional>

namespace modal {

namespace {

std::size_t term_depth(const Term& t) {
  std::size_t d = 0;
  for (const auto& a : t.args) d = std::max(d, term_depth(a));
  return d + 1;
}

std::vector<Term> instantiate_alts(const std::vector<std::string>& params, const std::vector<Term>& alts,
                                   const std::vector<Term>& args) {
  Subst s;
  for (std::size_t k = 0; k < params.size(); ++k) s[params[k]] = args[k];
  std::vector<Term> out;
  out.reserve(alts.size());
  for (const auto& a : alts) out.push_back(apply_subst(a, s));
  return out;
}

bool is_ho_inst(const Term& i) { return !i.is_var && i.name == "pred"; }

}  // namespace

struct TiBuilder::Ctx {
  Transaction& txn;
  std::map<std::string, NtId> local;
  std::size_t count = 0;
};

Grammar TiBuilder::run(const std::string& key, const std::function<bool(Ctx&, NtId&)>& body) {
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  Transaction txn(store_);
  Ctx ctx{txn, {}, 0};
  NtId root = 0;
  if (!body(ctx, root)) {
    txn.rollback();
    memo_[key] = Grammar::top();
    return Grammar::top();
  }
  Grammar g = txn.commit(Grammar::rules(root));
  for (const auto& [k, nt] : ctx.local) memo_.emplace(k, txn.remap(Grammar::rules(nt)));
  memo_[key] = g;
  return g;
}

Grammar TiBuilder::rt(const Term& type, const Term& inst) {
  if (is_base_inst(inst)) return base(type, inst.name);
  std::string key = "ti(" + type.str() + "," + inst.str() + ")";
  return run(key, [&](Ctx& ctx, NtId& out) { return rt_rec(type, inst, ctx, out); });
}

Grammar TiBuilder::base(const Term& type, const std::string& b) {
  if (b == "new") return store_.new_grammar();
  std::string key = "ti(" + type.str() + "," + b + ")";
  return run(key, [&](Ctx& ctx, NtId& out) { return base_rec(type, b, ctx, out); });
}

Grammar TiBuilder::grammar_of_type(const Term& type) {
  std::string key = "type:" + type.str();
  return run(key, [&](Ctx& ctx, NtId& out) { return type_rec(type, ctx, out); });
}

std::vector<Diagnostic> TiBuilder::take_warnings() {
  std::vector<Diagnostic> out;
  out.swap(warnings_);
  return out;
}

bool TiBuilder::rt_rec(const Term& t, const Term& i, Ctx& ctx, NtId& out) {
  if (is_base_inst(i)) return base_rec(t, i.name, ctx, out);
  std::string key = "ti(" + t.str() + "," + i.str() + ")";
  if (auto it = memo_.find(key); it != memo_.end()) {
    if (it->second.is_top()) return false;
    out = it->second.is_rules() ? it->second.root : GrammarStore::kEmpty;
    return true;
  }
  if (auto it = ctx.local.find(key); it != ctx.local.end()) {
    out = it->second;
    return true;
  }
  if (term_depth(t) > kMaxTermDepth || term_depth(i) > kMaxTermDepth)
    throw NonRegularError("expansion of " + key + " is not regular");
  if (++ctx.count > kNtBudget) throw NonRegularError("expansion of " + key + " exceeds the regularity budget");

  if (is_ho_inst(i)) {
    if (!is_pred_type(t) || t.arity() != i.arity()) return false;
    NtId nt = ctx.txn.add(key);
    ctx.local[key] = nt;
    Production p;
    p.sym = store_.ipred_symbol(2 * i.arity());
    for (std::size_t j = 0; j < i.arity(); ++j) {
      const Term& m = i.args[j];
      if (!m.is("->", 2)) return false;
      NtId c = 0, s = 0;
      if (!rt_rec(t.args[j], m.args[0], ctx, c)) return false;
      if (!rt_rec(t.args[j], m.args[1], ctx, s)) return false;
      p.kids.push_back(c);
      p.kids.push_back(s);
    }
    ctx.txn.set(nt, {p});
    out = nt;
    return true;
  }
  if (t.is_var || is_pred_type(t)) return false;

  const InstDef* id = prog_.find_inst(i.name, i.arity());
  if (!id || id->equiv) return false;
  std::vector<Term> type_alts;
  if (const TypeDef* td = prog_.find_type(t.name, t.arity()); td && !td->equiv)
    type_alts = instantiate_alts(td->params, td->alts, t.args);
  std::vector<Term> inst_alts = instantiate_alts(id->params, id->alts, i.args);

  NtId nt = ctx.txn.add(key);
  ctx.local[key] = nt;
  std::vector<Production> prods;
  for (const auto& ia : inst_alts) {
    const Term* ta = nullptr;
    for (const auto& a : type_alts)
      if (a.name == ia.name && a.arity() == ia.arity()) ta = &a;
    if (!ta) {
      std::string msg = "instantiation " + i.str() + " has alternative " + ia.name + "/" +
                        std::to_string(ia.arity()) + " which is not a constructor of type " + t.str() +
                        "; it is ignored";
      if (warned_.insert(msg).second) warnings_.push_back({"W002", Severity::Warning, msg, id->pos, ""});
      continue;
    }
    Production p;
    p.sym = store_.tree_symbol(ia.name, ia.arity());
    for (std::size_t j = 0; j < ia.arity(); ++j) {
      NtId k = 0;
      if (!rt_rec(ta->args[j], ia.args[j], ctx, k)) return false;
      p.kids.push_back(k);
    }
    prods.push_back(std::move(p));
  }
  ctx.txn.set(nt, std::move(prods));
  out = nt;
  return true;
}

bool TiBuilder::base_rec(const Term& t, const std::string& b, Ctx& ctx, NtId& out) {
  if (b == "new") {
    out = GrammarStore::kNew;
    return true;
  }
  std::string key = "ti(" + t.str() + "," + b + ")";
  if (auto it = memo_.find(key); it != memo_.end()) {
    if (it->second.is_top()) return false;
    out = it->second.is_rules() ? it->second.root : GrammarStore::kEmpty;
    return true;
  }
  if (auto it = ctx.local.find(key); it != ctx.local.end()) {
    out = it->second;
    return true;
  }
  if (term_depth(t) > kMaxTermDepth) throw NonRegularError("expansion of " + key + " is not regular");
  if (++ctx.count > kNtBudget) throw NonRegularError("expansion of " + key + " exceeds the regularity budget");

  NtId nt = ctx.txn.add(key);
  ctx.local[key] = nt;
  std::vector<Production> prods;
  if (t.is_var) {
    prods.push_back({store_.ground_param_symbol(t.name), {}});
    if (b == "old") prods.push_back({store_.old_param_symbol(t.name), {}});
  } else if (is_pred_type(t)) {
    prods.push_back({store_.gpred_symbol(), {}});
  } else if (is_builtin_type(t)) {
    prods.push_back({store_.builtin_symbol(t.name), {}});
  } else {
    const TypeDef* td = prog_.find_type(t.name, t.arity());
    if (!td || td->equiv) return false;
    for (const auto& a : instantiate_alts(td->params, td->alts, t.args)) {
      Production p;
      p.sym = store_.tree_symbol(a.name, a.arity());
      for (const auto& at : a.args) {
        NtId k = 0;
        if (!base_rec(at, b, ctx, k)) return false;
        p.kids.push_back(k);
      }
      prods.push_back(std::move(p));
    }
    if (b == "old" && td->is_solver) prods.push_back({store_.var_symbol(), {}});
  }
  ctx.txn.set(nt, std::move(prods));
  out = nt;
  return true;
}

bool TiBuilder::type_rec(const Term& t, Ctx& ctx, NtId& out) {
  std::string key = "type:" + t.str();
  if (auto it = ctx.local.find(key); it != ctx.local.end()) {
    out = it->second;
    return true;
  }
  if (term_depth(t) > kMaxTermDepth) throw NonRegularError("type " + t.str() + " is not regular");
  if (++ctx.count > kNtBudget) throw NonRegularError("type " + t.str() + " exceeds the regularity budget");
  NtId nt = ctx.txn.add(t.str());
  ctx.local[key] = nt;
  std::vector<Production> prods;
  if (t.is_var) {
    prods.push_back({store_.ground_param_symbol(t.name), {}});
  } else if (is_pred_type(t)) {
    prods.push_back({store_.gpred_symbol(), {}});
  } else if (is_builtin_type(t)) {
    prods.push_back({store_.builtin_symbol(t.name), {}});
  } else {
    const TypeDef* td = prog_.find_type(t.name, t.arity());
    if (!td || td->equiv) return false;
    for (const auto& a : instantiate_alts(td->params, td->alts, t.args)) {
      Production p;
      p.sym = store_.tree_symbol(a.name, a.arity());
      for (const auto& at : a.args) {
        NtId k = 0;
        if (!type_rec(at, ctx, k)) return false;
        p.kids.push_back(k);
      }
      prods.push_back(std::move(p));
    }
  }
  ctx.txn.set(nt, std::move(prods));
  out = nt;
  return true;
}

// ---------------------------------------------------------------------------
// States

TiState state_conj(GrammarStore& s, const TiState& a, const TiState& b) {
  TiState r;
  r.vars.reserve(a.vars.size());
  for (std::size_t k = 0; k < a.vars.size(); ++k) r.vars.push_back(s.conj(a.vars[k], b.vars[k]));
  return r;
}

TiState state_disj(GrammarStore& s, const TiState& a, const TiState& b) {
  TiState r;
  r.vars.reserve(a.vars.size());
  for (std::size_t k = 0; k < a.vars.size(); ++k) r.vars.push_back(s.disj(a.vars[k], b.vars[k]));
  return r;
}

bool state_lt(GrammarStore& s, const TiState& a, const TiState& b) {
  for (std::size_t k = 0; k < a.vars.size(); ++k)
    if (!s.lt(a.vars[k], b.vars[k])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Polymorphic improvement

namespace {

void collect_rec(GrammarStore& s, Grammar r1, Grammar r2, std::vector<std::pair<NtId, NtId>>& visited,
                 PolyMatchSet& out) {
  if (!r1.is_rules() || !r2.is_rules()) return;
  NtId x1 = r1.root, x2 = r2.root;
  for (const auto& v : visited)
    if (v.first == x1 && v.second == x2) return;
  if (x1 == GrammarStore::kNew) return;
  auto prods = s.productions(x1);
  for (const auto& p : prods) {
    Symbol sym = s.symbol(p.sym);
    if (sym.kind == SymKind::OldParam) {
      out.insert({true, sym.name, r2});
      return;
    }
  }
  for (const auto& p : prods) {
    Symbol sym = s.symbol(p.sym);
    if (sym.kind == SymKind::GroundParam) {
      out.insert({false, sym.name, r2});
      return;
    }
  }
  visited.emplace_back(x1, x2);
  for (const auto& p : prods) {
    Production q;
    if (!s.find(x2, p.sym, &q)) continue;
    for (std::size_t k = 0; k < p.kids.size(); ++k) collect_rec(s, s.subg(p.kids[k]), s.subg(q.kids[k]), visited, out);
  }
  visited.pop_back();
}

}  // namespace

PolyMatchSet collect_set(GrammarStore& s, Grammar r1, Grammar r2) {
  PolyMatchSet out;
  std::vector<std::pair<NtId, NtId>> visited;
  collect_rec(s, r1, r2, visited, out);
  return out;
}

Grammar poly_improve(TiBuilder& b, const Term& declared_type, const Term& success_inst, const Subst& theta,
                     const PolyMatchSet& m) {
  GrammarStore& s = b.store();
  Grammar declared = b.rt(declared_type, success_inst);
  if (!declared.is_rules()) return declared;

  // Parameter non-terminals: exactly {$ground(v)$} or exactly {$ground(v)$, $old(v)$}.
  struct ParamNt {
    bool old;
    std::string v;
  };
  std::map<NtId, ParamNt> params;
  std::vector<NtId> reach = s.reachable(declared);
  for (NtId x : reach) {
    auto prods = s.productions(x);
    std::string gv, ov;
    bool other = false;
    for (const auto& p : prods) {
      Symbol sym = s.symbol(p.sym);
      if (sym.kind == SymKind::GroundParam)
        gv = sym.name;
      else if (sym.kind == SymKind::OldParam)
        ov = sym.name;
      else
        other = true;
    }
    if (other || gv.empty()) continue;
    if (ov.empty() && prods.size() == 1) params[x] = {false, gv};
    if (ov == gv && prods.size() == 2) params[x] = {true, gv};
  }
  if (params.empty()) return declared;

  auto theta_of = [&](const std::string& v) {
    auto it = theta.find(v);
    return it == theta.end() ? Term::var(v) : it->second;
  };
  std::map<std::pair<bool, std::string>, Grammar> repl;
  for (const auto& [x, pn] : params) {
    auto key = std::make_pair(pn.old, pn.v);
    if (repl.count(key)) continue;
    Grammar acc = Grammar::bottom();
    bool any = false;
    for (const auto& e : m) {
      if (e.param != pn.v) continue;
      if (e.old && !pn.old) continue;
      acc = any ? s.disj(acc, e.grammar) : e.grammar;
      any = true;
    }
    if (!any || acc.is_top()) acc = b.base(theta_of(pn.v), pn.old ? "old" : "ground");
    repl[key] = acc;
  }

  // Non-terminals that reach a parameter non-terminal must be copied.
  std::set<NtId> dirty;
  for (const auto& [x, pn] : params) dirty.insert(x);
  bool changed = true;
  while (changed) {
    changed = false;
    for (NtId x : reach) {
      if (dirty.count(x)) continue;
      for (const auto& p : s.productions(x)) {
        bool hit = false;
        for (NtId k : p.kids) hit = hit || dirty.count(k);
        if (hit) {
          dirty.insert(x);
          changed = true;
          break;
        }
      }
    }
  }

  Transaction txn(s);
  std::map<NtId, NtId> copy;
  std::function<NtId(NtId)> map_nt = [&](NtId x) -> NtId {
    if (auto it = params.find(x); it != params.end()) {
      Grammar g = repl[{it->second.old, it->second.v}];
      return g.is_rules() ? g.root : GrammarStore::kEmpty;
    }
    if (!dirty.count(x)) return x;
    if (auto it = copy.find(x); it != copy.end()) return it->second;
    NtId n = txn.add("poly(" + s.nt_name(x) + ")");
    copy[x] = n;
    std::vector<Production> prods = s.productions(x);
    for (auto& p : prods)
      for (auto& k : p.kids) k = map_nt(k);
    txn.set(n, std::move(prods));
    return n;
  };
  NtId root = map_nt(declared.root);
  return txn.commit(root == GrammarStore::kEmpty ? Grammar::bottom() : Grammar::rules(root));
}

}  // namespace modal
