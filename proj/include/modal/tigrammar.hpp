#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "modal/ast.hpp"
#include "modal/grammar.hpp"

namespace modal {

/// Builds ti-grammars for (type, instantiation) pairs of one program.
/// Results are memoized by the canonical name `ti(t,i)`.
class TiBuilder {
 public:
  static constexpr std::size_t kNtBudget = 10000;
  static constexpr std::size_t kMaxTermDepth = 64;

  TiBuilder(const Program& p, GrammarStore& store) : prog_(p), store_(store) {}

  /// rt(t,i) for an expanded type and a ground expanded instantiation.
  /// Returns top on a mode error. Throws NonRegularError on runaway expansion.
  Grammar rt(const Term& type, const Term& inst);
  /// base(t,b) for b in {new, old, ground}.
  Grammar base(const Term& type, const std::string& b);
  /// The type grammar with root named after t; parameters become $ground(v)$.
  Grammar grammar_of_type(const Term& type);

  bool is_solver(const Term& type) const { return prog_.is_solver_type(type); }
  /// Solver types and type parameters may be initialized.
  bool initializable(const Term& type) const { return type.is_var || is_solver(type); }

  /// Drains the instantiation-alternative warnings raised so far.
  std::vector<Diagnostic> take_warnings();

  GrammarStore& store() { return store_; }
  const Program& program() const { return prog_; }

 private:
  struct Ctx;
  /// Returns the non-terminal for ti(t,i); false means top.
  bool rt_rec(const Term& t, const Term& i, Ctx& ctx, NtId& out);
  bool base_rec(const Term& t, const std::string& b, Ctx& ctx, NtId& out);
  bool type_rec(const Term& t, Ctx& ctx, NtId& out);
  Grammar run(const std::string& key, const std::function<bool(Ctx&, NtId&)>& body);

  const Program& prog_;
  GrammarStore& store_;
  std::map<std::string, Grammar> memo_;
  std::vector<Diagnostic> warnings_;
  std::set<std::string> warned_;
};

/// Variable bindings at a program point, indexed by variable number.
struct TiState {
  std::vector<Grammar> vars;
};

TiState state_conj(GrammarStore& s, const TiState& a, const TiState& b);
TiState state_disj(GrammarStore& s, const TiState& a, const TiState& b);
bool state_lt(GrammarStore& s, const TiState& a, const TiState& b);

/// One (tag, parameter, grammar) triple of a polymorphic match.
struct PolyMatch {
  bool old = false;
  std::string param;
  Grammar grammar;

  friend bool operator<(const PolyMatch& a, const PolyMatch& b) {
    if (a.old != b.old) return a.old < b.old;
    if (a.param != b.param) return a.param < b.param;
    if (a.grammar.kind != b.grammar.kind) return a.grammar.kind < b.grammar.kind;
    return a.grammar.root < b.grammar.root;
  }
};
using PolyMatchSet = std::set<PolyMatch>;

/// Grammars matching the parameter leaves of r1 (a declared call grammar) in r2.
PolyMatchSet collect_set(GrammarStore& s, Grammar r1, Grammar r2);

/// The declared success grammar rt(dt, s) with every parameter leaf replaced
/// by the join of its matches in M, or by base(theta(v), ...) when M has none.
Grammar poly_improve(TiBuilder& b, const Term& declared_type, const Term& success_inst, const Subst& theta,
                     const PolyMatchSet& m);

}  // namespace modal
