#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace modal {

using NtId = std::uint32_t;
using SymId = std::uint32_t;

enum class SymKind : std::uint8_t {
  Tree,         // ordinary tree constructor f/n
  Fresh,        // #fresh#
  Var,          // #var#
  GroundParam,  // $ground(v)$
  OldParam,     // $old(v)$
  GPred,        // $gpred$
  IPred,        // $ipred$ with 2n children
  Builtin       // opaque value set of a built-in atomic type
};

struct Symbol {
  SymKind kind = SymKind::Tree;
  std::string name;
  std::size_t arity = 0;
  std::string display;
};

struct Production {
  SymId sym = 0;
  std::vector<NtId> kids;
};

/// A ti-grammar value. Rules grammars share non-terminals held by a
/// GrammarStore; a grammar is identified by its root.
struct Grammar {
  enum class Kind : std::uint8_t { Bottom, Top, Rules };
  Kind kind = Kind::Bottom;
  NtId root = 0;

  static Grammar bottom() { return {}; }
  static Grammar top() { return {Kind::Top, 0}; }
  static Grammar rules(NtId r) { return {Kind::Rules, r}; }

  bool is_bottom() const { return kind == Kind::Bottom; }
  bool is_top() const { return kind == Kind::Top; }
  bool is_rules() const { return kind == Kind::Rules; }

  friend bool operator==(const Grammar& a, const Grammar& b) {
    return a.kind == b.kind && (a.kind != Kind::Rules || a.root == b.root);
  }
  friend bool operator!=(const Grammar& a, const Grammar& b) { return !(a == b); }
};

/// Classification of a grammar by the productions of its root.
enum class RootKind { Bottom, Top, New, OldParam, GroundParam, GPred, IPred, Normal };

class GrammarStore;

/// Scoped construction of new non-terminals. Non-terminals added through a
/// transaction become visible to other operations only after commit, which
/// removes unproductive rules. Destroying an uncommitted transaction rolls
/// the store back.
class Transaction {
 public:
  explicit Transaction(GrammarStore& store);
  ~Transaction();
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  NtId add(std::string name);
  void set(NtId nt, std::vector<Production> prods);
  void add_production(NtId nt, Production p);

  /// Trims the new non-terminals and returns the (possibly collapsed) root.
  Grammar commit(Grammar root);
  /// Maps a non-terminal created in this transaction to its committed id.
  NtId remap(NtId nt) const;
  Grammar remap(Grammar g) const;
  void rollback();
  bool active() const { return active_; }

 private:
  GrammarStore& store_;
  std::unique_lock<std::recursive_mutex> lock_;
  std::size_t mark_;
  bool active_ = true;
  std::vector<NtId> remap_;
};

/// Owner of all non-terminals and symbols, plus the memo tables of the
/// lattice operations. All operations are safe to call concurrently.
class GrammarStore {
 public:
  static constexpr NtId kNew = 0;
  static constexpr NtId kEmpty = 1;

  GrammarStore();
  GrammarStore(const GrammarStore&) = delete;
  GrammarStore& operator=(const GrammarStore&) = delete;

  SymId intern(SymKind kind, const std::string& name, std::size_t arity);
  SymId tree_symbol(const std::string& name, std::size_t arity) {
    return intern(SymKind::Tree, name, arity);
  }
  SymId var_symbol() { return intern(SymKind::Var, "#var#", 0); }
  SymId ground_param_symbol(const std::string& v) { return intern(SymKind::GroundParam, v, 0); }
  SymId old_param_symbol(const std::string& v) { return intern(SymKind::OldParam, v, 0); }
  SymId gpred_symbol() { return intern(SymKind::GPred, "$gpred$", 0); }
  SymId ipred_symbol(std::size_t arity) { return intern(SymKind::IPred, "$ipred$", arity); }
  SymId builtin_symbol(const std::string& type) { return intern(SymKind::Builtin, type, 0); }

  Symbol symbol(SymId s) const;
  std::vector<Production> productions(NtId nt) const;
  std::string nt_name(NtId nt) const;
  std::size_t nt_count() const;

  Grammar new_grammar() const { return Grammar::rules(kNew); }
  bool is_new(Grammar g) const { return g.is_rules() && g.root == kNew; }
  /// The grammar rooted at x; the empty non-terminal yields bottom.
  Grammar subg(NtId x) const {
    return x == kEmpty ? Grammar::bottom() : Grammar::rules(x);
  }
  RootKind classify(Grammar g) const;
  bool root_has(Grammar g, SymKind kind) const;
  /// Production of the root for tree symbol f, or nullptr.
  bool find(NtId x, SymId f, Production* out) const;

  /// Language ordering r1 <= r2.
  bool lt(Grammar a, Grammar b);
  /// Abstract conjunction; new is the identity.
  Grammar conj(Grammar a, Grammar b);
  /// Abstract disjunction; new joined with anything but new is top.
  Grammar disj(Grammar a, Grammar b);

  /// {a -> f(root(k1),...,root(kn))} together with the kid grammars.
  Grammar construct(SymId f, const std::vector<Grammar>& kids);
  /// The grammar keeping only the f production of the root of x.
  Grammar slice(Grammar x, SymId f);
  /// {a -> $ipred$(slots...)}.
  Grammar ipred(const std::vector<Grammar>& slots);

  /// True if #fresh# is reachable from the root without crossing $ipred$
  /// and the grammar is not exactly new.
  bool mixes_fresh(Grammar g) const;

  /// Reachable non-terminals, root first.
  std::vector<NtId> reachable(Grammar g) const;
  /// One production per line, `NT -> f(NT,...)`, root first.
  std::string dump(Grammar g) const;
  std::string grammar_name(Grammar g) const;

  std::recursive_mutex& mutex() const { return mu_; }

 private:
  friend class Transaction;

  struct NtData {
    std::string name;
    std::vector<Production> prods;
  };

  struct PairHash {
    std::size_t operator()(const std::pair<NtId, NtId>& p) const {
      return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
    }
  };
  using PairMap = std::unordered_map<std::pair<NtId, NtId>, NtId, PairHash>;

  struct OpCtx;

  Grammar conj_rec(Grammar a, Grammar b, OpCtx& ctx);
  Grammar disj_rec(Grammar a, Grammar b, OpCtx& ctx);
  bool lt_rec(Grammar a, Grammar b, std::vector<std::pair<NtId, NtId>>& visited,
              std::unordered_map<std::pair<NtId, NtId>, bool, PairHash>& local);
  RootKind classify_nolock(Grammar g) const;
  const Production* find_nolock(NtId x, SymId f) const;
  std::string display_name(NtId nt) const;
  void render_production(std::string& out, const Production& p) const;

  mutable std::recursive_mutex mu_;
  std::vector<NtData> nts_;
  std::vector<Symbol> syms_;
  std::map<std::pair<int, std::pair<std::string, std::size_t>>, SymId> sym_index_;
  PairMap meet_memo_;
  PairMap join_memo_;
  std::unordered_map<std::pair<NtId, NtId>, bool, PairHash> lt_memo_;
  std::map<std::pair<SymId, std::vector<NtId>>, NtId> cons_memo_;
  std::map<std::pair<NtId, SymId>, NtId> slice_memo_;
  std::uint64_t construct_counter_ = 0;
};

}  // namespace modal
