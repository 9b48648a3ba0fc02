#include "modal/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace modal {

std::string procedure_name(const std::string& pred, int mode_index) {
  return pred + "_mode" + std::to_string(mode_index + 1);
}

namespace {

enum class Delay { None, Unschedulable, TopJoin, GPredCall };

using VarSet = std::set<std::string>;

VarSet vars_of(const Goal& g) {
  std::vector<std::string> v;
  g.collect_vars(v);
  return VarSet(v.begin(), v.end());
}

std::vector<Goal> conj_items(const Goal& g) {
  if (g.kind == Goal::Kind::Conj) {
    std::vector<Goal> out;
    for (const auto& k : g.kids) {
      if (k.kind == Goal::Kind::Conj) {
        auto sub = conj_items(k);
        out.insert(out.end(), sub.begin(), sub.end());
      } else {
        out.push_back(k);
      }
    }
    return out;
  }
  return {g};
}

bool is_literal_constant(const std::string& f) { return is_number_literal(f) || is_string_literal(f); }

/// Shared variable table and transfer helpers for scheduling and rechecking.
class Context {
 public:
  Context(const Program& p, TiBuilder& b, const Options& o) : prog_(p), b_(b), s_(b.store()), opts_(o) {}

  int add_var(const std::string& name, const Term& type) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(name);
    types_.push_back(type);
    index_[name] = id;
    return id;
  }
  int var(const std::string& name) const { return index_.at(name); }
  int fresh_var(const Term& type) {
    for (;;) {
      std::string n = "Fresh_" + std::to_string(++fresh_);
      if (!index_.count(n)) return add_var(n, type);
    }
  }

  Grammar get(const TiState& st, int v) const {
    return static_cast<std::size_t>(v) < st.vars.size() ? st.vars[v] : s_.new_grammar();
  }
  void set(TiState& st, int v, Grammar g) const {
    if (st.vars.size() <= static_cast<std::size_t>(v)) st.vars.resize(v + 1, s_.new_grammar());
    st.vars[v] = g;
  }
  bool is_new(const TiState& st, int v) const { return s_.is_new(get(st, v)); }
  bool has_bottom(const TiState& st) const {
    for (const auto& g : st.vars)
      if (g.is_bottom()) return true;
    return false;
  }
  TiState all_bottom() const {
    TiState st;
    st.vars.assign(names_.size(), Grammar::bottom());
    return st;
  }
  std::vector<Grammar> snapshot(const TiState& st) const {
    std::vector<Grammar> v = st.vars;
    v.resize(names_.size(), s_.new_grammar());
    return v;
  }

  struct ModeChoice {
    int mode = -1;
    std::vector<bool> implied;
    std::vector<Grammar> call;
    std::vector<Grammar> success;
  };

  /// Mode selection for a call or ho construct. `given` is the number of
  /// argument positions that carry call-site variables.
  std::optional<ModeChoice> select_mode(const PredDef& callee, const std::vector<Term>& site_types,
                                        const std::vector<Grammar>& given, bool allow_implied, int locked = -1) {
    std::vector<ModeChoice> cands;
    for (std::size_t k = 0; k < callee.modes.size(); ++k) {
      if (locked >= 0 && static_cast<int>(k) != locked) continue;
      const ModeDecl& m = callee.modes[k];
      ModeChoice c;
      c.mode = static_cast<int>(k);
      bool usable = true;
      for (std::size_t j = 0; j < callee.arity && usable; ++j) {
        Grammar rc = b_.rt(site_types[j], m.args[j].call);
        Grammar rs = b_.rt(site_types[j], m.args[j].success);
        if (rc.is_top() || rs.is_top()) {
          usable = false;
          break;
        }
        c.call.push_back(rc);
        bool imp = false;
        if (j < given.size()) {
          if (!s_.lt(given[j], rc)) {
            if (allow_implied && s_.is_new(rc) && !s_.is_new(given[j]))
              imp = true;
            else
              usable = false;
          }
        }
        c.implied.push_back(imp);
        if (j < given.size())
          c.success.push_back(imp ? given[j] : s_.conj(given[j], rs));
        else
          c.success.push_back(rs);
      }
      if (usable) cands.push_back(std::move(c));
    }
    if (cands.empty()) return std::nullopt;
    auto vec_lt = [&](const std::vector<Grammar>& a, const std::vector<Grammar>& b) {
      for (std::size_t j = 0; j < a.size(); ++j)
        if (!s_.lt(a[j], b[j])) return false;
      return true;
    };
    auto strictly = [&](const std::vector<Grammar>& a, const std::vector<Grammar>& b) {
      return vec_lt(a, b) && !vec_lt(b, a);
    };
    std::vector<const ModeChoice*> min_succ;
    for (const auto& c : cands) {
      bool dominated = false;
      for (const auto& o : cands)
        if (&o != &c && strictly(o.success, c.success)) dominated = true;
      if (!dominated) min_succ.push_back(&c);
    }
    std::vector<const ModeChoice*> min_call;
    for (const auto* c : min_succ) {
      bool dominated = false;
      for (const auto* o : min_succ)
        if (o != c && strictly(o->call, c->call)) dominated = true;
      if (!dominated) min_call.push_back(c);
    }
    return *min_call.front();
  }

  /// Success grammar of argument j of a callee mode at the call site.
  Grammar success_grammar(const PredDef& callee, int mode, std::size_t j, const Term& site_type,
                          const Subst& theta, const PolyMatchSet& m) {
    const ModeArg& a = callee.modes[mode].args[j];
    if (!opts_.poly_improve) return b_.rt(site_type, a.success);
    return poly_improve(b_, callee.types[j], a.success, theta, m);
  }

  PolyMatchSet matches(const PredDef& callee, int mode, const std::vector<Grammar>& given) {
    PolyMatchSet m;
    if (!opts_.poly_improve) return m;
    for (std::size_t j = 0; j < given.size(); ++j) {
      Grammar declared = b_.rt(callee.types[j], callee.modes[mode].args[j].call);
      auto part = collect_set(s_, declared, given[j]);
      m.insert(part.begin(), part.end());
    }
    return m;
  }

  Grammar ho_object(const PredDef& callee, int mode, std::size_t given, const Term& ho_type, const Subst& theta,
                    const PolyMatchSet& m) {
    std::vector<Grammar> slots;
    for (std::size_t j = given; j < callee.arity; ++j) {
      const Term& t = ho_type.args[j - given];
      slots.push_back(b_.rt(t, callee.modes[mode].args[j].call));
      slots.push_back(success_grammar(callee, mode, j, t, theta, m));
    }
    return s_.ipred(slots);
  }

  bool runtime_risk(Grammar x, const std::vector<int>& args) const {
    if (!s_.root_has(x, SymKind::Var)) return false;
    for (int a : args)
      if (!b_.is_solver(types_[a])) return true;
    return false;
  }

  const Program& prog_;
  TiBuilder& b_;
  GrammarStore& s_;
  const Options& opts_;
  std::vector<std::string> names_;
  std::vector<Term> types_;
  std::map<std::string, int> index_;
  int fresh_ = 0;
};

struct Res {
  bool ok = false;
  SGoal out;
  TiState st;
  std::vector<Goal> generated;
  Delay reason = Delay::Unschedulable;
  std::vector<std::string> residual;
};

class Scheduler : public Context {
 public:
  using Context::Context;

  Res literal(const Literal& l, const TiState& st) {
    switch (l.kind) {
      case LitKind::EqVV: return eq_vv(l, st);
      case LitKind::EqVF: return eq_vf(l, st);
      case LitKind::Call: return call(l, st);
      case LitKind::HoConstruct: return ho_construct(l, st);
      case LitKind::HoCall: return ho_call(l, st);
      case LitKind::Init: {
        int v = var(l.x);
        if (!is_new(st, v) || !b_.initializable(types_[v])) return delay(l);
        Res r = emit(l, st, STag::Init);
        r.out.lit.x = v;
        set(r.st, v, b_.base(types_[v], "old"));
        return r;
      }
      case LitKind::Fail: {
        Res r = emit(l, st, STag::Fail);
        r.st = all_bottom();
        return r;
      }
      case LitKind::True: {
        Res r;
        r.ok = true;
        r.st = st;
        r.out.kind = SGoal::Kind::Conj;
        return r;
      }
    }
    return delay(l);
  }

  Res schedule(const Goal& g, const TiState& st, bool allow_init, const VarSet& outside) {
    switch (g.kind) {
      case Goal::Kind::Lit: return literal(g.lit, st);
      case Goal::Kind::Conj: return conj(conj_items(g), st, allow_init, outside);
      case Goal::Kind::Disj: return disj(g, st, allow_init, outside);
      case Goal::Kind::Ite: return ite(g, st, allow_init, outside);
    }
    return {};
  }

  Res conj(std::vector<Goal> pending, TiState st, bool allow_init, const VarSet& outside) {
    Res res;
    res.out.kind = SGoal::Kind::Conj;
    for (const auto& g : pending)
      if (!(g.kind == Goal::Kind::Lit && g.lit.kind == LitKind::True)) res.out.expected.push_back(g.id);
    std::vector<VarSet> item_vars;
    auto outside_of = [&](std::size_t idx) {
      VarSet o = outside;
      for (std::size_t k = 0; k < pending.size(); ++k)
        if (k != idx) {
          VarSet v = vars_of(pending[k]);
          o.insert(v.begin(), v.end());
        }
      for (const auto& e : emitted_vars_) o.insert(e.begin(), e.end());
      return o;
    };
    auto fail_here = [&]() {
      SGoal f;
      f.kind = SGoal::Kind::Lit;
      f.lit.tag = STag::Fail;
      f.lit.before = snapshot(st);
      res.out.kids.push_back(f);
      res.out.truncated = true;
      res.ok = true;
      res.st = all_bottom();
      return res;
    };
    if (has_bottom(st)) return fail_here();

    std::vector<std::string> last_residual;
    Delay last_reason = Delay::Unschedulable;
    for (;;) {
      bool progress = false;
      for (std::size_t idx = 0; idx < pending.size() && !progress; ++idx) {
        Res r = schedule(pending[idx], st, false, outside_of(idx));
        if (!r.ok) continue;
        Goal done = pending[idx];
        pending.erase(pending.begin() + static_cast<long>(idx));
        pending.insert(pending.begin() + static_cast<long>(idx), r.generated.begin(), r.generated.end());
        if (has_bottom(r.st)) return fail_here();
        append(res.out, std::move(r.out));
        st = std::move(r.st);
        progress = true;
      }
      if (progress) continue;
      if (pending.empty()) break;
      if (!allow_init) {
        res.ok = false;
        res.reason = Delay::Unschedulable;
        for (std::size_t idx = 0; idx < pending.size(); ++idx) {
          Res r = schedule(pending[idx], st, false, outside_of(idx));
          collect_reason(r, pending[idx], last_reason, last_residual);
        }
        res.reason = last_reason;
        res.residual = last_residual;
        return res;
      }
      // Second phase: initialize solver variables of the leftmost literal that can use it.
      last_residual.clear();
      last_reason = Delay::Unschedulable;
      for (std::size_t idx = 0; idx < pending.size() && !progress; ++idx) {
        const Goal& item = pending[idx];
        if (item.kind != Goal::Kind::Lit) {
          Res r = schedule(item, st, true, outside_of(idx));
          if (!r.ok) {
            collect_reason(r, item, last_reason, last_residual);
            continue;
          }
          pending.erase(pending.begin() + static_cast<long>(idx));
          pending.insert(pending.begin() + static_cast<long>(idx), r.generated.begin(), r.generated.end());
          if (has_bottom(r.st)) return fail_here();
          append(res.out, std::move(r.out));
          st = std::move(r.st);
          progress = true;
          break;
        }
        Res plain = literal(item.lit, st);
        collect_reason(plain, item, last_reason, last_residual);
        std::vector<int> cands = init_candidates(pending, idx, st);
        for (const auto& subset : subsets(cands)) {
          TiState st2 = st;
          for (int v : subset) set(st2, v, b_.base(types_[v], "old"));
          Res r = literal(item.lit, st2);
          if (!r.ok) continue;
          for (int v : subset) {
            SGoal ig;
            ig.kind = SGoal::Kind::Lit;
            ig.lit.tag = STag::Init;
            ig.lit.x = v;
            ig.lit.pos = item.lit.pos;
            ig.lit.before = snapshot(st);
            set(st, v, b_.base(types_[v], "old"));
            res.out.kids.push_back(std::move(ig));
          }
          progress = true;
          break;
        }
      }
      if (!progress) {
        res.ok = false;
        res.reason = last_reason;
        res.residual = last_residual;
        res.st = st;
        partial_ = res.out;
        return res;
      }
    }
    res.ok = true;
    res.st = st;
    return res;
  }

  SGoal partial_;

 private:
  std::vector<VarSet> emitted_vars_;

  static void collect_reason(const Res& r, const Goal& item, Delay& reason, std::vector<std::string>& residual) {
    if (r.ok) return;
    if (r.reason == Delay::TopJoin || r.reason == Delay::GPredCall) reason = r.reason;
    if (item.kind == Goal::Kind::Lit || r.residual.empty())
      residual.push_back(item.str());
    else
      residual.insert(residual.end(), r.residual.begin(), r.residual.end());
  }

  static void append(SGoal& conj, SGoal item) {
    if (item.kind == SGoal::Kind::Conj && item.expected.empty() && !item.truncated) {
      for (auto& k : item.kids) conj.kids.push_back(std::move(k));
      return;
    }
    conj.kids.push_back(std::move(item));
  }

  std::vector<int> init_candidates(const std::vector<Goal>& pending, std::size_t idx, const TiState& st) {
    std::set<std::string> excluded;
    for (std::size_t k = 0; k < idx; ++k) {
      const Goal& g = pending[k];
      if (g.kind != Goal::Kind::Lit) continue;
      if (g.lit.kind == LitKind::EqVF || g.lit.kind == LitKind::HoConstruct) excluded.insert(g.lit.x);
      if (g.lit.kind == LitKind::EqVV) {
        excluded.insert(g.lit.x);
        excluded.insert(g.lit.y);
      }
    }
    std::vector<std::string> vs;
    pending[idx].collect_vars(vs);
    std::vector<int> out;
    for (const auto& n : vs) {
      if (excluded.count(n)) continue;
      int v = var(n);
      if (is_new(st, v) && b_.initializable(types_[v])) out.push_back(v);
    }
    return out;
  }

  static std::vector<std::vector<int>> subsets(const std::vector<int>& c) {
    std::vector<std::vector<int>> out;
    if (c.empty()) return out;
    if (c.size() > 10) {
      for (int v : c) out.push_back({v});
      if (c.size() > 1) out.push_back(c);
      return out;
    }
    for (std::size_t size = 1; size <= c.size(); ++size) {
      std::vector<bool> pick(c.size(), false);
      std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
      do {
        std::vector<int> s;
        for (std::size_t k = 0; k < c.size(); ++k)
          if (pick[k]) s.push_back(c[k]);
        out.push_back(std::move(s));
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return out;
  }

  /// True when a closure argument has lost its modes but some callee mode needs them.
  bool lost_closure(const PredDef& callee, const std::vector<Grammar>& given) {
    for (std::size_t j = 0; j < given.size(); ++j) {
      if (!s_.root_has(given[j], SymKind::GPred)) continue;
      for (const auto& md : callee.modes)
        if (s_.root_has(b_.rt(callee.types[j], md.args[j].call), SymKind::IPred)) return true;
    }
    return false;
  }

  Res delay(const Literal& l, Delay reason = Delay::Unschedulable) {
    Res r;
    r.ok = false;
    r.reason = reason;
    r.residual = {literal_str(l)};
    return r;
  }

  Res emit(const Literal& l, const TiState& st, STag tag) {
    Res r;
    r.ok = true;
    r.st = st;
    r.out.kind = SGoal::Kind::Lit;
    r.out.origin = l.id;
    r.out.lit.tag = tag;
    r.out.lit.origin = l.id;
    r.out.lit.pos = l.pos;
    r.out.lit.functor = l.functor;
    r.out.lit.callee_arity = l.callee_arity;
    r.out.lit.before = snapshot(st);
    return r;
  }

  static Literal eq_lit(const std::string& x, const std::string& y, SourcePos pos) {
    Literal e;
    e.kind = LitKind::EqVV;
    e.x = x;
    e.y = y;
    e.pos = pos;
    return e;
  }

  Res eq_vv(const Literal& l, const TiState& st) {
    int x = var(l.x), y = var(l.y);
    Grammar gx = get(st, x), gy = get(st, y);
    bool nx = s_.is_new(gx), ny = s_.is_new(gy);
    if (nx && ny) return delay(l);
    if (nx || ny) {
      Res r = emit(l, st, STag::Copy);
      r.out.lit.x = nx ? x : y;
      r.out.lit.y = nx ? y : x;
      set(r.st, r.out.lit.x, nx ? gy : gx);
      return r;
    }
    Grammar g = s_.conj(gx, gy);
    if (g.is_top()) return delay(l);
    Res r = emit(l, st, STag::Unify);
    r.out.lit.x = x;
    r.out.lit.y = y;
    set(r.st, x, g);
    set(r.st, y, g);
    return r;
  }

  Res eq_vf(const Literal& l, const TiState& st) {
    int x = var(l.x);
    Grammar gx = get(st, x);
    std::vector<int> args;
    for (const auto& a : l.args) args.push_back(var(a));
    if (args.empty() && is_literal_constant(l.functor)) {
      Res r = emit(l, st, s_.is_new(gx) ? STag::BuiltinConstruct : STag::Test);
      r.out.lit.x = x;
      if (s_.is_new(gx)) set(r.st, x, b_.base(types_[x], "ground"));
      return r;
    }
    SymId f = s_.tree_symbol(l.functor, args.size());
    bool any_new = false, all_new = true;
    for (int a : args) {
      bool n = is_new(st, a);
      any_new = any_new || n;
      all_new = all_new && n;
    }
    if (s_.is_new(gx)) {
      if (any_new) return delay(l);
      std::vector<Grammar> kids;
      for (int a : args) kids.push_back(get(st, a));
      Res r = emit(l, st, STag::Construct);
      r.out.lit.x = x;
      r.out.lit.args = args;
      set(r.st, x, s_.construct(f, kids));
      return r;
    }
    // Deconstruct; bound arguments are replaced by fresh variables unified afterwards.
    Res r = emit(l, st, STag::Deconstruct);
    r.out.lit.x = x;
    if (!all_new) {
      for (std::size_t k = 0; k < args.size(); ++k) {
        if (is_new(st, args[k])) continue;
        int fv = fresh_var(types_[args[k]]);
        r.generated.push_back(Goal::literal(eq_lit(names_[args[k]], names_[fv], l.pos)));
        args[k] = fv;
      }
      r.out.lit.before = snapshot(st);
    }
    r.out.lit.args = args;
    r.out.lit.runtime_risk = runtime_risk(gx, args);
    Production p;
    if (!s_.find(gx.root, f, &p)) {
      r.st = all_bottom();
      return r;
    }
    set(r.st, x, s_.slice(gx, f));
    for (std::size_t k = 0; k < args.size(); ++k) set(r.st, args[k], s_.subg(p.kids[k]));
    return r;
  }

  Res call(const Literal& l, const TiState& st) {
    const PredDef* callee = prog_.find_pred(l.functor, l.callee_arity);
    std::vector<int> args;
    std::vector<Term> site;
    std::vector<Grammar> given;
    for (const auto& a : l.args) {
      args.push_back(var(a));
      site.push_back(types_[args.back()]);
      given.push_back(get(st, args.back()));
    }
    auto choice = select_mode(*callee, site, given, true);
    if (!choice) return delay(l, lost_closure(*callee, given) ? Delay::GPredCall : Delay::Unschedulable);
    Res r = emit(l, st, STag::Call);
    r.out.lit.mode = choice->mode;
    std::vector<Grammar> real = given;
    for (std::size_t j = 0; j < args.size(); ++j)
      if (choice->implied[j]) real[j] = s_.new_grammar();
    PolyMatchSet m = matches(*callee, choice->mode, real);
    for (std::size_t j = 0; j < args.size(); ++j) {
      Grammar ps = success_grammar(*callee, choice->mode, j, site[j], l.theta, m);
      if (choice->implied[j]) {
        int fv = fresh_var(site[j]);
        set(r.st, fv, ps);
        r.generated.push_back(Goal::literal(eq_lit(names_[fv], names_[args[j]], l.pos)));
        args[j] = fv;
      } else {
        set(r.st, args[j], s_.conj(given[j], ps));
      }
    }
    r.out.lit.args = args;
    r.out.lit.before = snapshot(st);
    return r;
  }

  Res ho_construct(const Literal& l, const TiState& st) {
    int h = var(l.x);
    if (!is_new(st, h)) return delay(l);
    const PredDef* callee = prog_.find_pred(l.functor, l.callee_arity);
    std::vector<int> args;
    std::vector<Term> site;
    std::vector<Grammar> given;
    for (const auto& a : l.args) {
      args.push_back(var(a));
      site.push_back(types_[args.back()]);
      given.push_back(get(st, args.back()));
      if (s_.is_new(given.back())) return delay(l);
    }
    const Term& ho_type = types_[h];
    for (const auto& t : ho_type.args) site.push_back(t);
    auto choice = select_mode(*callee, site, given, false);
    if (!choice) return delay(l);
    Res r = emit(l, st, STag::HoConstruct);
    r.out.lit.x = h;
    r.out.lit.args = args;
    r.out.lit.mode = choice->mode;
    PolyMatchSet m = matches(*callee, choice->mode, given);
    set(r.st, h, ho_object(*callee, choice->mode, args.size(), ho_type, l.theta, m));
    return r;
  }

  Res ho_call(const Literal& l, const TiState& st) {
    int h = var(l.x);
    Grammar gh = get(st, h);
    if (s_.is_new(gh)) return delay(l);
    std::vector<int> args;
    for (const auto& a : l.args) args.push_back(var(a));
    Production p;
    if (!s_.find(gh.root, s_.ipred_symbol(2 * args.size()), &p)) {
      if (s_.root_has(gh, SymKind::GPred)) return delay(l, Delay::GPredCall);
      return delay(l);
    }
    std::vector<bool> implied(args.size(), false);
    for (std::size_t j = 0; j < args.size(); ++j) {
      Grammar r = get(st, args[j]);
      Grammar xc = s_.subg(p.kids[2 * j]);
      if (s_.lt(r, xc)) continue;
      if (s_.is_new(xc) && !s_.is_new(r)) {
        implied[j] = true;
        continue;
      }
      return delay(l);
    }
    Res r = emit(l, st, STag::HoCall);
    r.out.lit.x = h;
    for (std::size_t j = 0; j < args.size(); ++j) {
      Grammar xs = s_.subg(p.kids[2 * j + 1]);
      if (implied[j]) {
        int fv = fresh_var(types_[args[j]]);
        set(r.st, fv, xs);
        r.generated.push_back(Goal::literal(eq_lit(names_[fv], names_[args[j]], l.pos)));
        args[j] = fv;
      } else {
        set(r.st, args[j], s_.conj(get(st, args[j]), xs));
      }
    }
    r.out.lit.args = args;
    r.out.lit.before = snapshot(st);
    return r;
  }

  /// Joins branch states on the kept variables and resets the others to the entry state.
  bool join(const std::vector<TiState>& branches, const TiState& entry, const std::set<int>& kept, TiState& out,
            std::string& top_var) {
    out = entry;
    std::size_t n = names_.size();
    for (std::size_t v = 0; v < n; ++v) {
      int iv = static_cast<int>(v);
      if (!kept.count(iv)) {
        set(out, iv, get(entry, iv));
        continue;
      }
      Grammar acc = get(branches[0], iv);
      for (std::size_t k = 1; k < branches.size(); ++k) acc = s_.disj(acc, get(branches[k], iv));
      if (acc.is_top()) {
        top_var = names_[v];
        return false;
      }
      set(out, iv, acc);
    }
    return true;
  }

  std::set<int> ids(const VarSet& vs) {
    std::set<int> out;
    for (const auto& n : vs)
      if (index_.count(n)) out.insert(var(n));
    return out;
  }

  Res top_join(const Goal& g, const std::string& v) {
    Res r;
    r.ok = false;
    r.reason = Delay::TopJoin;
    r.residual = {g.str() + " (variable " + v + " is new on some branches only)"};
    return r;
  }

  Res disj(const Goal& g, const TiState& st, bool allow_init, const VarSet& outside) {
    std::vector<TiState> states;
    Res res;
    res.out.kind = SGoal::Kind::Disj;
    res.out.origin = g.id;
    VarSet common;
    bool first = true;
    for (const auto& k : g.kids) {
      Res r = conj(conj_items(k), st, allow_init, outside);
      if (!r.ok) return r;
      res.out.kids.push_back(std::move(r.out));
      states.push_back(std::move(r.st));
      VarSet vk = vars_of(k);
      if (first) {
        common = vk;
        first = false;
      } else {
        VarSet keep;
        for (const auto& v : common)
          if (vk.count(v)) keep.insert(v);
        common = keep;
      }
    }
    VarSet kept = outside;
    kept.insert(common.begin(), common.end());
    std::string top_var;
    if (!join(states, st, ids(kept), res.st, top_var)) return top_join(g, top_var);
    res.ok = true;
    return res;
  }

  Res ite(const Goal& g, const TiState& st, bool allow_init, const VarSet& outside) {
    VarSet then_vars = vars_of(g.kids[1]);
    VarSet cond_outside = outside;
    cond_outside.insert(then_vars.begin(), then_vars.end());
    Res c = conj(conj_items(g.kids[0]), st, allow_init, cond_outside);
    if (!c.ok) return c;
    Res t = conj(conj_items(g.kids[1]), c.st, allow_init, outside);
    if (!t.ok) return t;
    Res e = conj(conj_items(g.kids[2]), st, allow_init, outside);
    if (!e.ok) return e;
    VarSet ct = vars_of(g.kids[0]);
    ct.insert(then_vars.begin(), then_vars.end());
    VarSet ev = vars_of(g.kids[2]);
    VarSet kept = outside;
    for (const auto& v : ct)
      if (ev.count(v)) kept.insert(v);
    Res res;
    res.out.kind = SGoal::Kind::Ite;
    res.out.origin = g.id;
    res.out.kids = {std::move(c.out), std::move(t.out), std::move(e.out)};
    std::string top_var;
    if (!join({t.st, e.st}, st, ids(kept), res.st, top_var)) return top_join(g, top_var);
    res.ok = true;
    return res;
  }
};

std::string join_strings(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += v[k];
  }
  return s;
}

void collect_risks(const SGoal& g, const Procedure& proc, std::vector<Diagnostic>& out) {
  if (g.kind == SGoal::Kind::Lit) {
    if (g.lit.runtime_risk)
      out.push_back({"W001", Severity::Warning,
                     "deconstruct of " + proc.var_names[g.lit.x] +
                         " may be applied to an unbound solver variable; arguments of non-solver type cannot be "
                         "initialized, so a mode error may only be detected at run time",
                     g.lit.pos, proc.name});
    return;
  }
  for (const auto& k : g.kids) collect_risks(k, proc, out);
}

void register_vars(Context& c, const PredDef& d) {
  for (const auto& h : d.head_vars) c.add_var(h, d.var_types.at(h));
  for (const auto& [v, t] : d.var_types) c.add_var(v, t);
}

}  // namespace

ModeCheckResult check_mode(const Program& p, const PredDef& d, int mode_index, TiBuilder& b, const Options& opts) {
  ModeCheckResult res;
  Scheduler sch(p, b, opts);
  register_vars(sch, d);
  GrammarStore& s = b.store();
  Procedure& proc = res.proc;
  proc.pred = d.name;
  proc.arity = d.arity;
  proc.mode_index = mode_index;
  proc.is_query = d.is_query;
  proc.name = d.is_query ? d.name : procedure_name(d.name, mode_index);
  const ModeDecl& mode = d.modes[mode_index];

  TiState st;
  st.vars.assign(sch.names_.size(), s.new_grammar());
  VarSet outside;
  for (std::size_t j = 0; j < d.arity; ++j) {
    int v = sch.var(d.head_vars[j]);
    proc.head.push_back(v);
    outside.insert(d.head_vars[j]);
    Grammar call = b.rt(sch.types_[v], mode.args[j].call);
    Grammar succ = b.rt(sch.types_[v], mode.args[j].success);
    if (call.is_top() || succ.is_top()) {
      res.diagnostics.push_back({"E004", Severity::Error,
                                 "mode " + std::to_string(mode_index + 1) + " of " + d.key() + ": instantiation " +
                                     (call.is_top() ? mode.args[j].call : mode.args[j].success).str() +
                                     " is not compatible with type " + sch.types_[v].str() + " of argument " +
                                     std::to_string(j + 1),
                                 mode.pos, proc.name});
      return res;
    }
    sch.set(st, v, call);
  }

  Res r = sch.conj(conj_items(d.body), st, opts.init, outside);
  proc.var_names = sch.names_;
  proc.var_types = sch.types_;
  if (!r.ok) {
    std::string code = r.reason == Delay::TopJoin ? "E003" : "E001";
    std::string msg;
    if (r.reason == Delay::TopJoin)
      msg = "in " + proc.name + ": disjunction joins a new and a bound instantiation: " + join_strings(r.residual);
    else if (r.reason == Delay::GPredCall)
      msg = "in " + proc.name + ": cannot call a higher-order object whose mode information was lost: " +
            join_strings(r.residual);
    else
      msg = "in " + proc.name + ": cannot schedule " + join_strings(r.residual);
    res.diagnostics.push_back({code, Severity::Error, msg, d.clauses.empty() ? d.pos : d.clauses[0].pos, proc.name});
    proc.body = sch.partial_;
    return res;
  }
  proc.body = std::move(r.out);
  proc.final_state = sch.snapshot(r.st);
  for (std::size_t j = 0; j < d.arity; ++j) {
    int v = proc.head[j];
    Grammar succ = b.rt(sch.types_[v], mode.args[j].success);
    if (!s.lt(sch.get(r.st, v), succ)) {
      res.diagnostics.push_back({"E002", Severity::Error,
                                 "in " + proc.name + ": argument " + d.head_vars[j] +
                                     " does not reach its declared success instantiation " +
                                     mode.args[j].success.str(),
                                 d.clauses[0].pos, proc.name});
    }
  }
  collect_risks(proc.body, proc, res.diagnostics);
  res.ok = std::none_of(res.diagnostics.begin(), res.diagnostics.end(),
                        [](const Diagnostic& x) { return x.is_error(); });
  return res;
}

// ---------------------------------------------------------------------------
// Recheck with locked order and tags

namespace {

class Verifier : public Context {
 public:
  Verifier(const Program& p, TiBuilder& b, const Options& o, const Procedure& proc) : Context(p, b, o), proc_(proc) {
    for (std::size_t v = 0; v < proc.var_names.size(); ++v) add_var(proc.var_names[v], proc.var_types[v]);
  }

  std::string error;

  bool goal(const SGoal& g, TiState& st, const std::set<int>& outside) {
    switch (g.kind) {
      case SGoal::Kind::Lit: return lit(g.lit, st);
      case SGoal::Kind::Conj: return conj(g, st, outside);
      case SGoal::Kind::Disj: {
        std::vector<TiState> states;
        std::set<int> common;
        bool first = true;
        for (const auto& k : g.kids) {
          TiState b = st;
          if (!goal(k, b, outside)) return false;
          states.push_back(std::move(b));
          std::set<int> vk = vars(k);
          if (first) {
            common = vk;
            first = false;
          } else {
            std::set<int> keep;
            for (int v : common)
              if (vk.count(v)) keep.insert(v);
            common = keep;
          }
        }
        std::set<int> kept = outside;
        kept.insert(common.begin(), common.end());
        return join(states, st, kept, g);
      }
      case SGoal::Kind::Ite: {
        std::set<int> co = outside, tv = vars(g.kids[1]);
        co.insert(tv.begin(), tv.end());
        TiState c = st;
        if (!goal(g.kids[0], c, co)) return false;
        if (!goal(g.kids[1], c, outside)) return false;
        TiState e = st;
        if (!goal(g.kids[2], e, outside)) return false;
        std::set<int> ct = vars(g.kids[0]), ev = vars(g.kids[2]);
        ct.insert(tv.begin(), tv.end());
        std::set<int> kept = outside;
        for (int v : ct)
          if (ev.count(v)) kept.insert(v);
        return join({c, e}, st, kept, g);
      }
    }
    return false;
  }

 private:
  const Procedure& proc_;

  std::set<int> vars(const SGoal& g) const {
    std::set<int> out;
    std::function<void(const SGoal&)> walk = [&](const SGoal& x) {
      if (x.kind == SGoal::Kind::Lit) {
        if (x.lit.x >= 0) out.insert(x.lit.x);
        if (x.lit.y >= 0) out.insert(x.lit.y);
        out.insert(x.lit.args.begin(), x.lit.args.end());
        return;
      }
      for (const auto& k : x.kids) walk(k);
    };
    walk(g);
    return out;
  }

  bool fail(const std::string& msg) {
    if (error.empty()) error = msg;
    return false;
  }

  std::string name(int v) const { return names_[v]; }

  bool join(const std::vector<TiState>& branches, TiState& st, const std::set<int>& kept, const SGoal&) {
    TiState out = st;
    for (std::size_t v = 0; v < names_.size(); ++v) {
      int iv = static_cast<int>(v);
      if (!kept.count(iv)) continue;
      Grammar acc = get(branches[0], iv);
      for (std::size_t k = 1; k < branches.size(); ++k) acc = s_.disj(acc, get(branches[k], iv));
      if (acc.is_top()) return fail("top in join for " + name(iv));
      set(out, iv, acc);
    }
    st = std::move(out);
    return true;
  }

  bool conj(const SGoal& g, TiState& st, const std::set<int>& outside) {
    if (!g.truncated) {
      std::multiset<int> want(g.expected.begin(), g.expected.end()), got;
      for (const auto& k : g.kids) {
        int o = k.kind == SGoal::Kind::Lit ? k.lit.origin : k.origin;
        if (o >= 0) got.insert(o);
      }
      if (want != got) return fail("conjunction is not a permutation of its input literals");
    }
    for (std::size_t i = 0; i < g.kids.size(); ++i) {
      std::set<int> o = outside;
      for (std::size_t k = 0; k < g.kids.size(); ++k)
        if (k != i) {
          auto vk = vars(g.kids[k]);
          o.insert(vk.begin(), vk.end());
        }
      if (!goal(g.kids[i], st, o)) return false;
      if (g.kids[i].kind == SGoal::Kind::Lit && g.kids[i].lit.tag == STag::Fail) return true;
    }
    return true;
  }

  bool need_new(const TiState& st, int v, const char* what) {
    if (!is_new(st, v)) return fail(std::string(what) + ": " + name(v) + " is expected to be new");
    return true;
  }
  bool need_bound(const TiState& st, int v, const char* what) {
    if (is_new(st, v)) return fail(std::string(what) + ": " + name(v) + " is new");
    return true;
  }

  bool lit(const SLit& l, TiState& st) {
    switch (l.tag) {
      case STag::Copy:
        if (!need_new(st, l.x, "copy") || !need_bound(st, l.y, "copy")) return false;
        set(st, l.x, get(st, l.y));
        break;
      case STag::Unify: {
        if (!need_bound(st, l.x, "unify") || !need_bound(st, l.y, "unify")) return false;
        Grammar g = s_.conj(get(st, l.x), get(st, l.y));
        set(st, l.x, g);
        set(st, l.y, g);
        break;
      }
      case STag::BuiltinConstruct:
        if (!need_new(st, l.x, "construct")) return false;
        set(st, l.x, b_.base(types_[l.x], "ground"));
        break;
      case STag::Test:
        if (!need_bound(st, l.x, "test")) return false;
        break;
      case STag::Construct: {
        if (!need_new(st, l.x, "construct")) return false;
        std::vector<Grammar> kids;
        for (int a : l.args) {
          if (!need_bound(st, a, "construct")) return false;
          kids.push_back(get(st, a));
        }
        set(st, l.x, s_.construct(s_.tree_symbol(l.functor, l.args.size()), kids));
        break;
      }
      case STag::Deconstruct: {
        if (!need_bound(st, l.x, "deconstruct")) return false;
        for (int a : l.args)
          if (!need_new(st, a, "deconstruct")) return false;
        SymId f = s_.tree_symbol(l.functor, l.args.size());
        Grammar gx = get(st, l.x);
        Production p;
        if (!s_.find(gx.root, f, &p)) return fail("deconstruct of " + name(l.x) + " always fails");
        set(st, l.x, s_.slice(gx, f));
        for (std::size_t k = 0; k < l.args.size(); ++k) set(st, l.args[k], s_.subg(p.kids[k]));
        break;
      }
      case STag::Call: {
        const PredDef* callee = prog_.find_pred(l.functor, l.callee_arity);
        std::vector<Term> site;
        std::vector<Grammar> given;
        for (int a : l.args) {
          site.push_back(types_[a]);
          given.push_back(get(st, a));
        }
        auto choice = select_mode(*callee, site, given, false, l.mode);
        if (!choice) return fail("call " + procedure_name(l.functor, l.mode) + " is not call-correct");
        PolyMatchSet m = matches(*callee, l.mode, given);
        for (std::size_t j = 0; j < l.args.size(); ++j)
          set(st, l.args[j],
              s_.conj(given[j], success_grammar(*callee, l.mode, j, site[j], theta_of(l), m)));
        break;
      }
      case STag::HoConstruct: {
        if (!need_new(st, l.x, "ho construct")) return false;
        const PredDef* callee = prog_.find_pred(l.functor, l.callee_arity);
        std::vector<Term> site;
        std::vector<Grammar> given;
        for (int a : l.args) {
          if (!need_bound(st, a, "ho construct")) return false;
          site.push_back(types_[a]);
          given.push_back(get(st, a));
        }
        for (const auto& t : types_[l.x].args) site.push_back(t);
        if (!select_mode(*callee, site, given, false, l.mode)) return fail("ho construct is not call-correct");
        PolyMatchSet m = matches(*callee, l.mode, given);
        set(st, l.x, ho_object(*callee, l.mode, l.args.size(), types_[l.x], theta_of(l), m));
        break;
      }
      case STag::HoCall: {
        Grammar gh = get(st, l.x);
        Production p;
        if (!gh.is_rules() || !s_.find(gh.root, s_.ipred_symbol(2 * l.args.size()), &p))
          return fail("call of " + name(l.x) + " without mode information");
        for (std::size_t j = 0; j < l.args.size(); ++j)
          if (!s_.lt(get(st, l.args[j]), s_.subg(p.kids[2 * j])))
            return fail("higher-order call argument " + name(l.args[j]) + " is not call-correct");
        for (std::size_t j = 0; j < l.args.size(); ++j)
          set(st, l.args[j], s_.conj(get(st, l.args[j]), s_.subg(p.kids[2 * j + 1])));
        break;
      }
      case STag::Init:
        if (!need_new(st, l.x, "init")) return false;
        if (!b_.initializable(types_[l.x])) return fail("init of " + name(l.x) + " which has no solver type");
        set(st, l.x, b_.base(types_[l.x], "old"));
        break;
      case STag::Fail: st = all_bottom(); return true;
    }
    for (std::size_t v = 0; v < st.vars.size(); ++v) {
      Grammar g = st.vars[v];
      if (g.is_top()) return fail("variable " + names_[v] + " reaches top");
      if (g.is_bottom()) return fail("variable " + names_[v] + " is bottom after a non-failing literal");
      if (s_.mixes_fresh(g)) return fail("variable " + names_[v] + " is partly new");
    }
    return true;
  }

  Subst theta_of(const SLit& l) const {
    auto it = thetas_.find(l.origin);
    return it == thetas_.end() ? Subst{} : it->second;
  }

 public:
  std::map<int, Subst> thetas_;
};

void collect_thetas(const Goal& g, std::map<int, Subst>& out) {
  if (g.kind == Goal::Kind::Lit) {
    if (g.lit.kind == LitKind::Call || g.lit.kind == LitKind::HoConstruct) out[g.lit.id] = g.lit.theta;
    return;
  }
  for (const auto& k : g.kids) collect_thetas(k, out);
}

}  // namespace

std::string recheck(const Program& p, const Procedure& proc, TiBuilder& b, const Options& opts) {
  const PredDef* d = p.find_pred(proc.is_query ? proc.pred : proc.pred, proc.arity);
  if (!d) return "unknown predicate " + proc.pred;
  Verifier v(p, b, opts, proc);
  collect_thetas(d->body, v.thetas_);
  GrammarStore& s = b.store();
  const ModeDecl& mode = d->modes[proc.mode_index];
  TiState st;
  st.vars.assign(proc.var_names.size(), s.new_grammar());
  std::set<int> outside;
  for (std::size_t j = 0; j < proc.head.size(); ++j) {
    st.vars[proc.head[j]] = b.rt(proc.var_types[proc.head[j]], mode.args[j].call);
    outside.insert(proc.head[j]);
  }
  if (!v.goal(proc.body, st, outside)) return v.error.empty() ? "recheck failed" : v.error;
  for (std::size_t j = 0; j < proc.head.size(); ++j) {
    int h = proc.head[j];
    if (!s.lt(v.get(st, h), b.rt(proc.var_types[h], mode.args[j].success)))
      return "argument " + proc.var_names[h] + " does not reach its success instantiation";
  }
  return "";
}

}  // namespace modal
