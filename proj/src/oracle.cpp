#include "modal/oracle.hpp"

#include <algorithm>
#include <sstream>

namespace modal {

TreeId TreeTable::intern(const std::string& label, const std::vector<TreeId>& kids) {
  auto key = std::make_pair(label, kids);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  auto id = static_cast<TreeId>(nodes_.size());
  nodes_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::string TreeTable::str(TreeId t) const {
  const auto& [label, kids] = nodes_[t];
  auto slash = label.rfind('/');
  std::string name = slash == std::string::npos || label.front() == '$' ? label : label.substr(0, slash);
  if (name == "." && kids.size() == 2) {
    std::string s = "[" + str(kids[0]);
    TreeId tail = kids[1];
    while (nodes_[tail].first == "./2") {
      s += "," + str(nodes_[tail].second[0]);
      tail = nodes_[tail].second[1];
    }
    if (nodes_[tail].first != "[]/0") s += "|" + str(tail);
    return s + "]";
  }
  if (kids.empty()) return name;
  std::string s = name + "(";
  for (std::size_t k = 0; k < kids.size(); ++k) {
    if (k) s += ",";
    s += str(kids[k]);
  }
  return s + ")";
}

std::string symbol_label(const Symbol& s) {
  switch (s.kind) {
    case SymKind::Tree: return s.name + "/" + std::to_string(s.arity);
    case SymKind::Fresh: return "#fresh#";
    case SymKind::Var: return "#var#";
    case SymKind::GroundParam: return "$ground(" + s.name + ")$";
    case SymKind::OldParam: return "$old(" + s.name + ")$";
    case SymKind::GPred: return "$gpred$";
    case SymKind::IPred: return "$ipred$/" + std::to_string(s.arity);
    case SymKind::Builtin: return "$" + s.name + "$";
  }
  return s.name;
}

TreeSet Enumerator::language(Grammar g, int depth) {
  if (!g.is_rules() || depth < 1) return {};
  return nt_language(g.root, depth);
}

const TreeSet& Enumerator::nt_language(NtId nt, int depth) {
  auto key = std::make_pair(nt, depth);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  TreeSet out;
  for (const auto& p : s_.productions(nt)) {
    Symbol sym = s_.symbol(p.sym);
    std::string label = symbol_label(sym);
    if (p.kids.empty()) {
      out.insert(trees_.intern(label, {}));
      continue;
    }
    if (depth < 2) continue;
    std::vector<std::vector<TreeId>> pools;
    bool empty = false;
    for (NtId k : p.kids) {
      const TreeSet& sub = nt_language(k, depth - 1);
      if (sub.empty()) empty = true;
      pools.emplace_back(sub.begin(), sub.end());
    }
    if (empty) continue;
    std::vector<std::size_t> idx(pools.size(), 0);
    for (;;) {
      std::vector<TreeId> kids;
      for (std::size_t k = 0; k < pools.size(); ++k) kids.push_back(pools[k][idx[k]]);
      out.insert(trees_.intern(label, kids));
      if (++produced_ > kBudget) throw BudgetExceeded("bounded language exceeds the enumeration budget");
      std::size_t k = 0;
      while (k < pools.size() && ++idx[k] == pools[k].size()) idx[k++] = 0;
      if (k == pools.size()) break;
    }
  }
  return memo_.emplace(key, std::move(out)).first->second;
}

bool deterministic(const GrammarStore& s, Grammar g) {
  if (!g.is_rules()) return true;
  for (NtId nt : s.reachable(g)) {
    std::set<SymId> seen;
    for (const auto& p : s.productions(nt))
      if (!seen.insert(p.sym).second) return false;
  }
  return true;
}

GrammarGenerator::GrammarGenerator(GrammarStore& s, std::uint64_t seed) : s_(s), state_(seed * 2 + 1) {}

std::uint64_t GrammarGenerator::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void GrammarGenerator::new_type() {
  std::size_t ncons = 2 + below(3);
  std::vector<SymId> cons{s_.tree_symbol("c0", 0)};
  for (std::size_t k = 1; k < ncons; ++k) cons.push_back(s_.tree_symbol("f" + std::to_string(k), 1 + below(2)));
  bool solver = below(4) == 0;
  std::size_t nnt = 1 + below(5);
  Transaction tx(s_);
  type_ids_.clear();
  for (std::size_t k = 0; k < nnt; ++k) type_ids_.push_back(tx.add("t" + std::to_string(k)));
  type_nts_.assign(nnt, {});
  for (std::size_t k = 0; k < nnt; ++k) {
    std::vector<Production> prods;
    for (SymId c : cons) {
      if (k > 0 && below(3) == 0) continue;
      Production p{c, {}};
      for (std::size_t a = 0; a < s_.symbol(c).arity; ++a) p.kids.push_back(type_ids_[below(nnt)]);
      prods.push_back(p);
    }
    if (solver && below(2) == 0) prods.push_back({s_.var_symbol(), {}});
    if (prods.empty()) prods.push_back({cons[0], {}});
    type_nts_[k].prods = prods;
    tx.set(type_ids_[k], prods);
  }
  type_ = tx.commit(Grammar::rules(type_ids_[0]));
  for (auto& id : type_ids_) id = tx.remap(id);
  for (auto& t : type_nts_)
    for (auto& p : t.prods)
      for (auto& kid : p.kids) kid = tx.remap(kid);
}

Grammar GrammarGenerator::instance() {
  std::size_t n = 1 + below(5);
  std::vector<std::size_t> of(n);
  of[0] = 0;
  for (std::size_t k = 1; k < n; ++k) of[k] = below(type_nts_.size());
  Transaction tx(s_);
  std::vector<NtId> ids;
  for (std::size_t k = 0; k < n; ++k) ids.push_back(tx.add("r" + std::to_string(k)));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Production> prods;
    for (const auto& tp : type_nts_[of[k]].prods) {
      if (below(4) == 0) continue;
      Production p{tp.sym, {}};
      for (NtId tk : tp.kids) {
        std::vector<NtId> fits;
        for (std::size_t j = 0; j < n; ++j)
          if (type_ids_[of[j]] == tk) fits.push_back(ids[j]);
        if (fits.empty()) {
          // Fall back to the type non-terminal itself.
          p.kids.push_back(tk);
          continue;
        }
        p.kids.push_back(fits[below(fits.size())]);
      }
      prods.push_back(p);
    }
    tx.set(ids[k], prods);
  }
  return tx.commit(Grammar::rules(ids[0]));
}

std::size_t OracleReport::total_failed() const {
  std::size_t n = 0;
  for (const auto& [_, c] : failed) n += c;
  return n;
}

std::string OracleReport::summary() const {
  std::ostringstream os;
  os << "samples " << samples << "\n";
  std::set<std::string> names;
  for (const auto& [k, _] : passed) names.insert(k);
  for (const auto& [k, _] : failed) names.insert(k);
  for (const auto& k : names) {
    auto p = passed.count(k) ? passed.at(k) : 0;
    auto f = failed.count(k) ? failed.at(k) : 0;
    os << k << ": " << p << " passed, " << f << " failed\n";
  }
  return os.str();
}

namespace {

bool subset(const TreeSet& a, const TreeSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

TreeSet intersect(const TreeSet& a, const TreeSet& b) {
  TreeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

OracleReport run_oracle(int depth, std::size_t samples, std::uint64_t seed) {
  OracleReport rep;
  GrammarStore store;
  TreeTable trees;
  GrammarGenerator gen(store, seed);
  auto record = [&](const std::string& prop, bool ok, std::size_t sample) {
    if (ok) {
      ++rep.passed[prop];
      return;
    }
    ++rep.failed[prop];
    if (rep.failures.size() < 20)
      rep.failures.push_back(prop + " failed on sample " + std::to_string(sample) + " (seed " +
                             std::to_string(seed) + ")");
  };
  for (std::size_t k = 0; k < samples; ++k) {
    if (k % 8 == 0) gen.new_type();
    Grammar r1 = gen.instance(), r2 = gen.instance(), r3 = gen.instance();
    Enumerator en(store, trees);
    TreeSet l1 = en.language(r1, depth), l2 = en.language(r2, depth), l3 = en.language(r3, depth);

    Grammar m = store.conj(r1, r2);
    record("meet-exact", !m.is_top() && en.language(m, depth) == intersect(l1, l2), k);
    record("meet-idempotent", en.language(store.conj(r1, r1), depth) == l1, k);
    Grammar j = store.disj(r1, r2);
    TreeSet lj = en.language(j, depth);
    record("join-superset", !j.is_top() && subset(l1, lj) && subset(l2, lj), k);
    record("lt-reflexive", store.lt(r1, r1), k);
    bool a = store.lt(r1, r2), b = store.lt(r2, r3);
    record("lt-inclusion", !a || subset(l1, l2), k);
    if (a && b) record("lt-transitive", store.lt(r1, r3), k);
    record("lt-meet", store.lt(m, r1) && store.lt(m, r2), k);
    record("lt-join", j.is_top() || (store.lt(r1, j) && store.lt(r2, j)), k);
    record("deterministic", deterministic(store, m) && deterministic(store, j), k);
    if (r1.is_rules()) {
      for (const auto& p : store.productions(r1.root)) {
        Symbol sym = store.symbol(p.sym);
        if (sym.kind != SymKind::Tree) continue;
        TreeSet expect;
        for (TreeId t : l1)
          if (trees.label(t) == symbol_label(sym)) expect.insert(t);
        record("slice", en.language(store.slice(r1, p.sym), depth) == expect, k);
      }
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace modal
