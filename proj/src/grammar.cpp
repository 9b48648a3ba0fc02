#include "modal/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace modal {

namespace {

std::pair<NtId, NtId> ordered(NtId a, NtId b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

}  // namespace

// ---------------------------------------------------------------------------
// Transaction

Transaction::Transaction(GrammarStore& store)
    : store_(store), lock_(store.mu_), mark_(store.nts_.size()) {}

Transaction::~Transaction() {
  if (active_) rollback();
}

NtId Transaction::add(std::string name) {
  store_.nts_.push_back({std::move(name), {}});
  return static_cast<NtId>(store_.nts_.size() - 1);
}

void Transaction::set(NtId nt, std::vector<Production> prods) { store_.nts_[nt].prods = std::move(prods); }

void Transaction::add_production(NtId nt, Production p) { store_.nts_[nt].prods.push_back(std::move(p)); }

Grammar Transaction::commit(Grammar root) {
  auto& nts = store_.nts_;
  const std::size_t n = nts.size();
  std::vector<char> productive(n - mark_, 0);
  auto is_productive = [&](NtId k) {
    if (k < mark_) return k != GrammarStore::kEmpty;
    return productive[k - mark_] != 0;
  };
  auto is_ipred = [&](const Production& p) { return store_.syms_[p.sym].kind == SymKind::IPred; };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = mark_; k < n; ++k) {
      if (productive[k - mark_]) continue;
      for (const auto& p : nts[k].prods) {
        bool ok = is_ipred(p) ||
                  std::all_of(p.kids.begin(), p.kids.end(), [&](NtId c) { return is_productive(c); });
        if (ok) {
          productive[k - mark_] = 1;
          changed = true;
          break;
        }
      }
    }
  }

  remap_.assign(n - mark_, GrammarStore::kEmpty);
  for (std::size_t k = mark_; k < n; ++k)
    if (productive[k - mark_]) remap_[k - mark_] = static_cast<NtId>(k);

  for (std::size_t k = mark_; k < n; ++k) {
    if (!productive[k - mark_]) {
      nts[k].prods.clear();
      continue;
    }
    std::vector<Production> kept;
    for (auto& p : nts[k].prods) {
      if (is_ipred(p)) {
        for (auto& c : p.kids)
          if (!is_productive(c)) c = GrammarStore::kEmpty;
        kept.push_back(std::move(p));
      } else if (std::all_of(p.kids.begin(), p.kids.end(), [&](NtId c) { return is_productive(c); })) {
        kept.push_back(std::move(p));
      }
    }
    nts[k].prods = std::move(kept);
  }
  active_ = false;
  return remap(root);
}

NtId Transaction::remap(NtId nt) const {
  if (nt < mark_ || remap_.empty()) return nt;
  if (nt - mark_ >= remap_.size()) return nt;
  return remap_[nt - mark_];
}

Grammar Transaction::remap(Grammar g) const {
  if (!g.is_rules()) return g;
  NtId r = remap(g.root);
  return r == GrammarStore::kEmpty ? Grammar::bottom() : Grammar::rules(r);
}

void Transaction::rollback() {
  store_.nts_.resize(mark_);
  active_ = false;
}

// ---------------------------------------------------------------------------
// GrammarStore basics

GrammarStore::GrammarStore() {
  SymId fresh = intern(SymKind::Fresh, "#fresh#", 0);
  nts_.push_back({"new", {Production{fresh, {}}}});
  nts_.push_back({"empty", {}});
}

SymId GrammarStore::intern(SymKind kind, const std::string& name, std::size_t arity) {
  std::lock_guard<std::recursive_mutex> g(mu_);
  auto key = std::make_pair(static_cast<int>(kind), std::make_pair(name, arity));
  auto it = sym_index_.find(key);
  if (it != sym_index_.end()) return it->second;
  Symbol s;
  s.kind = kind;
  s.name = name;
  s.arity = arity;
  switch (kind) {
    case SymKind::GroundParam: s.display = "$ground(" + name + ")$"; break;
    case SymKind::OldParam: s.display = "$old(" + name + ")$"; break;
    case SymKind::Builtin: s.display = "$" + name + "$"; break;
    default: s.display = name; break;
  }
  syms_.push_back(s);
  SymId id = static_cast<SymId>(syms_.size() - 1);
  sym_index_.emplace(key, id);
  return id;
}

Symbol GrammarStore::symbol(SymId s) const {
  std::lock_guard<std::recursive_mutex> g(mu_);
  return syms_.at(s);
}

std::vector<Production> GrammarStore::productions(NtId nt) const {
  std::lock_guard<std::recursive_mutex> g(mu_);
  return nts_.at(nt).prods;
}

std::string GrammarStore::nt_name(NtId nt) const {
  std::lock_guard<std::recursive_mutex> g(mu_);
  return nts_.at(nt).name;
}

std::size_t GrammarStore::nt_count() const {
  std::lock_guard<std::recursive_mutex> g(mu_);
  return nts_.size();
}

RootKind GrammarStore::classify_nolock(Grammar g) const {
  if (g.is_bottom()) return RootKind::Bottom;
  if (g.is_top()) return RootKind::Top;
  if (g.root == kNew) return RootKind::New;
  RootKind k = RootKind::Normal;
  for (const auto& p : nts_[g.root].prods) {
    switch (syms_[p.sym].kind) {
      case SymKind::OldParam: return RootKind::OldParam;
      case SymKind::GroundParam: k = RootKind::GroundParam; break;
      case SymKind::GPred: return RootKind::GPred;
      case SymKind::IPred: return RootKind::IPred;
      default: break;
    }
  }
  return k;
}

RootKind GrammarStore::classify(Grammar g) const {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  return classify_nolock(g);
}

bool GrammarStore::root_has(Grammar g, SymKind kind) const {
  if (!g.is_rules()) return false;
  std::lock_guard<std::recursive_mutex> lk(mu_);
  for (const auto& p : nts_[g.root].prods)
    if (syms_[p.sym].kind == kind) return true;
  return false;
}

const Production* GrammarStore::find_nolock(NtId x, SymId f) const {
  for (const auto& p : nts_[x].prods)
    if (p.sym == f) return &p;
  return nullptr;
}

bool GrammarStore::find(NtId x, SymId f, Production* out) const {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  const Production* p = find_nolock(x, f);
  if (p && out) *out = *p;
  return p != nullptr;
}

std::string GrammarStore::display_name(NtId nt) const {
  const std::string& n = nts_[nt].name;
  if (n.size() > 80) return "m" + std::to_string(nt);
  return n;
}

// ---------------------------------------------------------------------------
// Ordering

bool GrammarStore::lt(Grammar a, Grammar b) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::vector<std::pair<NtId, NtId>> visited;
  std::unordered_map<std::pair<NtId, NtId>, bool, PairHash> local;
  bool r = lt_rec(a, b, visited, local);
  if (a.is_rules() && b.is_rules()) {
    if (r) {
      for (const auto& v : visited) lt_memo_[v] = true;
    } else {
      lt_memo_[{a.root, b.root}] = false;
    }
  }
  return r;
}

bool GrammarStore::lt_rec(Grammar a, Grammar b, std::vector<std::pair<NtId, NtId>>& visited,
                          std::unordered_map<std::pair<NtId, NtId>, bool, PairHash>& local) {
  if (b.is_top()) return true;
  if (a.is_top()) return false;
  if (a.is_bottom()) return true;
  if (b.is_bottom()) return false;
  if (a.root == b.root) return true;
  auto key = std::make_pair(a.root, b.root);
  if (auto it = lt_memo_.find(key); it != lt_memo_.end()) return it->second;
  if (std::find(visited.begin(), visited.end(), key) != visited.end()) return true;
  if (b.root == kNew) return false;
  if (a.root == kNew) return false;

  RootKind ka = classify_nolock(a);
  RootKind kb = classify_nolock(b);
  if (ka == RootKind::GPred) return kb == RootKind::GPred;
  if (ka == RootKind::IPred) {
    if (kb == RootKind::GPred) return true;
    if (kb != RootKind::IPred) return false;
    const Production* pa = nullptr;
    const Production* pb = nullptr;
    for (const auto& p : nts_[a.root].prods)
      if (syms_[p.sym].kind == SymKind::IPred) pa = &p;
    for (const auto& p : nts_[b.root].prods)
      if (syms_[p.sym].kind == SymKind::IPred) pb = &p;
    if (pa->kids.size() != pb->kids.size()) return false;
    std::vector<NtId> ka_kids = pa->kids, kb_kids = pb->kids;
    visited.push_back(key);
    for (std::size_t i = 0; i + 1 < ka_kids.size(); i += 2) {
      if (!lt_rec(subg(kb_kids[i]), subg(ka_kids[i]), visited, local)) return false;
      if (!lt_rec(subg(ka_kids[i + 1]), subg(kb_kids[i + 1]), visited, local)) return false;
    }
    return true;
  }
  if (kb == RootKind::GPred || kb == RootKind::IPred) return false;

  std::vector<Production> pas = nts_[a.root].prods;
  visited.push_back(key);
  for (const auto& p : pas) {
    const Production* q = find_nolock(b.root, p.sym);
    if (!q) return false;
    std::vector<NtId> qk = q->kids;
    for (std::size_t i = 0; i < p.kids.size(); ++i)
      if (!lt_rec(subg(p.kids[i]), subg(qk[i]), visited, local)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Conjunction and disjunction

struct GrammarStore::OpCtx {
  Transaction* txn = nullptr;
  PairMap meet_local;
  PairMap join_local;
};

Grammar GrammarStore::conj(Grammar a, Grammar b) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  Transaction txn(*this);
  OpCtx ctx;
  ctx.txn = &txn;
  Grammar r = conj_rec(a, b, ctx);
  if (r.is_top()) {
    txn.rollback();
    return r;
  }
  r = txn.commit(r);
  for (const auto& [k, v] : ctx.meet_local) meet_memo_[k] = txn.remap(v);
  for (const auto& [k, v] : ctx.join_local) join_memo_[k] = txn.remap(v);
  return r;
}

Grammar GrammarStore::disj(Grammar a, Grammar b) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  Transaction txn(*this);
  OpCtx ctx;
  ctx.txn = &txn;
  Grammar r = disj_rec(a, b, ctx);
  if (r.is_top()) {
    txn.rollback();
    return r;
  }
  r = txn.commit(r);
  for (const auto& [k, v] : ctx.meet_local) meet_memo_[k] = txn.remap(v);
  for (const auto& [k, v] : ctx.join_local) join_memo_[k] = txn.remap(v);
  return r;
}

namespace {

const Production* find_kind(const std::vector<Production>& prods, const std::vector<Symbol>& syms,
                            SymKind kind) {
  for (const auto& p : prods)
    if (syms[p.sym].kind == kind) return &p;
  return nullptr;
}

}  // namespace

Grammar GrammarStore::conj_rec(Grammar a, Grammar b, OpCtx& ctx) {
  if (a.is_top() || b.is_top()) return Grammar::top();
  if (a.is_bottom() || b.is_bottom()) return Grammar::bottom();
  if (b.root == kNew) return a;
  if (a.root == kNew) return b;
  if (a.root == b.root) return a;

  RootKind ka = classify_nolock(a);
  RootKind kb = classify_nolock(b);
  if (ka == RootKind::OldParam) return b;
  if (kb == RootKind::OldParam) return a;
  if (ka == RootKind::GroundParam) return a;
  if (kb == RootKind::GroundParam) return b;
  if (ka == RootKind::GPred) return b;
  if (kb == RootKind::GPred) return a;

  auto key = ordered(a.root, b.root);
  if (auto it = meet_memo_.find(key); it != meet_memo_.end()) return subg(it->second);
  if (auto it = ctx.meet_local.find(key); it != ctx.meet_local.end()) return subg(it->second);

  NtId nt = ctx.txn->add("meet(" + display_name(key.first) + "," + display_name(key.second) + ")");
  ctx.meet_local[key] = nt;
  std::vector<Production> p1 = nts_[key.first].prods;
  std::vector<Production> p2 = nts_[key.second].prods;
  std::vector<Production> out;

  if (ka == RootKind::IPred && kb == RootKind::IPred) {
    const Production* i1 = find_kind(p1, syms_, SymKind::IPred);
    const Production* i2 = find_kind(p2, syms_, SymKind::IPred);
    if (i1->kids.size() != i2->kids.size()) return Grammar::top();
    Production np{i1->sym, {}};
    for (std::size_t i = 0; i + 1 < i1->kids.size(); i += 2) {
      Grammar c = disj_rec(subg(i1->kids[i]), subg(i2->kids[i]), ctx);
      Grammar s = conj_rec(subg(i1->kids[i + 1]), subg(i2->kids[i + 1]), ctx);
      if (c.is_top() || s.is_top()) return Grammar::top();
      np.kids.push_back(c.is_bottom() ? kEmpty : c.root);
      np.kids.push_back(s.is_bottom() ? kEmpty : s.root);
    }
    out.push_back(std::move(np));
  } else {
    for (const auto& p : p1) {
      const Production* q = nullptr;
      for (const auto& cand : p2)
        if (cand.sym == p.sym) q = &cand;
      if (!q) continue;
      Production np{p.sym, {}};
      for (std::size_t i = 0; i < p.kids.size(); ++i) {
        Grammar k = conj_rec(subg(p.kids[i]), subg(q->kids[i]), ctx);
        if (k.is_top()) return Grammar::top();
        np.kids.push_back(k.is_bottom() ? kEmpty : k.root);
      }
      out.push_back(std::move(np));
    }
  }
  ctx.txn->set(nt, std::move(out));
  return Grammar::rules(nt);
}

Grammar GrammarStore::disj_rec(Grammar a, Grammar b, OpCtx& ctx) {
  if (a.is_top() || b.is_top()) return Grammar::top();
  if (a.is_bottom()) return b;
  if (b.is_bottom()) return a;
  bool an = a.root == kNew, bn = b.root == kNew;
  if (an && bn) return a;
  if (an || bn) return Grammar::top();
  if (a.root == b.root) return a;

  RootKind ka = classify_nolock(a);
  RootKind kb = classify_nolock(b);
  if (ka == RootKind::OldParam) return a;
  if (kb == RootKind::OldParam) return b;
  if (ka == RootKind::GroundParam) return b;
  if (kb == RootKind::GroundParam) return a;
  if (ka == RootKind::GPred) return a;
  if (kb == RootKind::GPred) return b;

  auto key = ordered(a.root, b.root);
  if (auto it = join_memo_.find(key); it != join_memo_.end()) return subg(it->second);
  if (auto it = ctx.join_local.find(key); it != ctx.join_local.end()) return subg(it->second);

  NtId nt = ctx.txn->add("join(" + display_name(key.first) + "," + display_name(key.second) + ")");
  ctx.join_local[key] = nt;
  std::vector<Production> p1 = nts_[key.first].prods;
  std::vector<Production> p2 = nts_[key.second].prods;
  std::vector<Production> out;

  if (ka == RootKind::IPred && kb == RootKind::IPred) {
    const Production* i1 = find_kind(p1, syms_, SymKind::IPred);
    const Production* i2 = find_kind(p2, syms_, SymKind::IPred);
    if (i1->kids.size() != i2->kids.size()) return Grammar::top();
    Production np{i1->sym, {}};
    for (std::size_t i = 0; i + 1 < i1->kids.size(); i += 2) {
      Grammar c = conj_rec(subg(i1->kids[i]), subg(i2->kids[i]), ctx);
      Grammar s = disj_rec(subg(i1->kids[i + 1]), subg(i2->kids[i + 1]), ctx);
      if (c.is_top() || s.is_top()) return Grammar::top();
      np.kids.push_back(c.is_bottom() ? kEmpty : c.root);
      np.kids.push_back(s.is_bottom() ? kEmpty : s.root);
    }
    out.push_back(std::move(np));
  } else {
    for (const auto& p : p1) {
      const Production* q = nullptr;
      for (const auto& cand : p2)
        if (cand.sym == p.sym) q = &cand;
      if (!q) {
        out.push_back(p);
        continue;
      }
      Production np{p.sym, {}};
      for (std::size_t i = 0; i < p.kids.size(); ++i) {
        Grammar k = disj_rec(subg(p.kids[i]), subg(q->kids[i]), ctx);
        if (k.is_top()) return Grammar::top();
        np.kids.push_back(k.is_bottom() ? kEmpty : k.root);
      }
      out.push_back(std::move(np));
    }
    for (const auto& q : p2) {
      bool in_p1 = false;
      for (const auto& p : p1)
        if (p.sym == q.sym) in_p1 = true;
      if (!in_p1) out.push_back(q);
    }
  }
  ctx.txn->set(nt, std::move(out));
  return Grammar::rules(nt);
}

// ---------------------------------------------------------------------------
// Constructors

Grammar GrammarStore::construct(SymId f, const std::vector<Grammar>& kids) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::vector<NtId> ids;
  for (const auto& k : kids) {
    if (k.is_top()) return Grammar::top();
    if (k.is_bottom()) return Grammar::bottom();
    ids.push_back(k.root);
  }
  auto key = std::make_pair(f, ids);
  if (auto it = cons_memo_.find(key); it != cons_memo_.end()) return Grammar::rules(it->second);
  nts_.push_back({"c" + std::to_string(++construct_counter_), {Production{f, ids}}});
  NtId nt = static_cast<NtId>(nts_.size() - 1);
  cons_memo_.emplace(key, nt);
  return Grammar::rules(nt);
}

Grammar GrammarStore::ipred(const std::vector<Grammar>& slots) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::vector<NtId> ids;
  for (const auto& k : slots) {
    if (k.is_top()) return Grammar::top();
    ids.push_back(k.is_bottom() ? kEmpty : k.root);
  }
  SymId f = ipred_symbol(slots.size());
  auto key = std::make_pair(f, ids);
  if (auto it = cons_memo_.find(key); it != cons_memo_.end()) return Grammar::rules(it->second);
  nts_.push_back({"c" + std::to_string(++construct_counter_), {Production{f, ids}}});
  NtId nt = static_cast<NtId>(nts_.size() - 1);
  cons_memo_.emplace(key, nt);
  return Grammar::rules(nt);
}

Grammar GrammarStore::slice(Grammar x, SymId f) {
  std::lock_guard<std::recursive_mutex> lk(mu_);
  if (!x.is_rules()) return x;
  const Production* p = find_nolock(x.root, f);
  if (!p) return Grammar::bottom();
  if (nts_[x.root].prods.size() == 1) return x;
  auto key = std::make_pair(x.root, f);
  if (auto it = slice_memo_.find(key); it != slice_memo_.end()) return Grammar::rules(it->second);
  Production copy = *p;
  std::string name = "slice(" + display_name(x.root) + "," + syms_[f].display + ")";
  nts_.push_back({std::move(name), {std::move(copy)}});
  NtId nt = static_cast<NtId>(nts_.size() - 1);
  slice_memo_.emplace(key, nt);
  return Grammar::rules(nt);
}

// ---------------------------------------------------------------------------
// Inspection

bool GrammarStore::mixes_fresh(Grammar g) const {
  if (!g.is_rules() || g.root == kNew) return false;
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::vector<NtId> stack{g.root};
  std::vector<char> seen(nts_.size(), 0);
  while (!stack.empty()) {
    NtId x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = 1;
    if (x == kNew) return true;
    for (const auto& p : nts_[x].prods) {
      if (syms_[p.sym].kind == SymKind::IPred) continue;
      if (syms_[p.sym].kind == SymKind::Fresh) return true;
      for (NtId k : p.kids) stack.push_back(k);
    }
  }
  return false;
}

std::vector<NtId> GrammarStore::reachable(Grammar g) const {
  std::vector<NtId> order;
  if (!g.is_rules()) return order;
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::vector<char> seen(nts_.size(), 0);
  order.push_back(g.root);
  seen[g.root] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& p : nts_[order[i]].prods)
      for (NtId k : p.kids)
        if (!seen[k]) {
          seen[k] = 1;
          order.push_back(k);
        }
  }
  return order;
}

void GrammarStore::render_production(std::string& out, const Production& p) const {
  const Symbol& s = syms_[p.sym];
  if (s.kind == SymKind::Tree && s.name == "." && p.kids.size() == 2) {
    out += "[" + display_name(p.kids[0]) + "|" + display_name(p.kids[1]) + "]";
    return;
  }
  out += s.display;
  if (!p.kids.empty()) {
    out += "(";
    for (std::size_t i = 0; i < p.kids.size(); ++i) {
      if (i) out += ", ";
      out += display_name(p.kids[i]);
    }
    out += ")";
  }
}

std::string GrammarStore::dump(Grammar g) const {
  if (g.is_bottom()) return "bottom\n";
  if (g.is_top()) return "top\n";
  std::lock_guard<std::recursive_mutex> lk(mu_);
  std::string out;
  for (NtId x : reachable(g)) {
    for (const auto& p : nts_[x].prods) {
      out += display_name(x) + " -> ";
      render_production(out, p);
      out += "\n";
    }
  }
  return out;
}

std::string GrammarStore::grammar_name(Grammar g) const {
  if (g.is_bottom()) return "bottom";
  if (g.is_top()) return "top";
  std::lock_guard<std::recursive_mutex> lk(mu_);
  return display_name(g.root);
}

}  // namespace modal
