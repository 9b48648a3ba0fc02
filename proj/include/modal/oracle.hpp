#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "modal/grammar.hpp"

namespace modal {

using TreeId = std::uint32_t;

/// Hash-consed trees labelled by printable symbol keys, so that trees drawn
/// from different stores compare by identity.
class TreeTable {
 public:
  TreeId intern(const std::string& label, const std::vector<TreeId>& kids);
  std::string str(TreeId t) const;
  const std::string& label(TreeId t) const { return nodes_[t].first; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::pair<std::string, std::vector<TreeId>>> nodes_;
  std::map<std::pair<std::string, std::vector<TreeId>>, TreeId> index_;
};

using TreeSet = std::set<TreeId>;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Leaf label of a special symbol, or `f/n` for a tree constructor.
std::string symbol_label(const Symbol& s);

/// Exact language of a grammar restricted to trees of height at most `depth`
/// (leaves have height 1). Special leaves are opaque constants.
class Enumerator {
 public:
  static constexpr std::size_t kBudget = 1000000;

  Enumerator(const GrammarStore& s, TreeTable& trees) : s_(s), trees_(trees) {}
  TreeSet language(Grammar g, int depth);

 private:
  const TreeSet& nt_language(NtId nt, int depth);

  const GrammarStore& s_;
  TreeTable& trees_;
  std::map<std::pair<NtId, int>, TreeSet> memo_;
  std::size_t produced_ = 0;
};

/// Random same-type grammars: one type grammar over at most four constructors
/// (one constant, arity at most two) and at most five non-terminals, with
/// instances restricting its productions.
class GrammarGenerator {
 public:
  GrammarGenerator(GrammarStore& s, std::uint64_t seed);
  /// Starts a new signature and type grammar.
  void new_type();
  /// A random grammar whose language is included in the current type's.
  Grammar instance();
  Grammar type() const { return type_; }

 private:
  GrammarStore& s_;
  std::uint64_t state_;
  std::uint64_t next();
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  struct TypeNt {
    std::vector<Production> prods;
  };
  std::vector<TypeNt> type_nts_;
  std::vector<NtId> type_ids_;
  Grammar type_;
};

struct OracleReport {
  std::size_t samples = 0;
  std::map<std::string, std::size_t> passed;
  std::map<std::string, std::size_t> failed;
  std::vector<std::string> failures;

  std::size_t total_failed() const;
  std::string summary() const;
};

/// Checks meet exactness, join superset, lt soundness, lt reflexivity and
/// transitivity, meet idempotence, slice correctness and determinism.
OracleReport run_oracle(int depth, std::size_t samples, std::uint64_t seed);

/// True if no non-terminal reachable from g has two productions for one symbol.
bool deterministic(const GrammarStore& s, Grammar g);

}  // namespace modal
