#pragma once

#include <string>
#include <vector>

#include "modal/ast.hpp"
#include "modal/grammar.hpp"
#include "modal/tigrammar.hpp"

namespace modal {

struct Options {
  /// Allow the second scheduling phase that inserts init calls.
  bool init = true;
  /// Recover success information for polymorphic calls.
  bool poly_improve = true;
  /// Treat warnings as errors for the exit status.
  bool werror = false;
};

/// Execution mode of a scheduled literal.
enum class STag {
  Copy,              // X := Y
  Unify,             // X == Y
  Construct,         // X := f(...)
  Deconstruct,       // X =: f(...)
  Test,              // X == 0 for a built-in constant
  BuiltinConstruct,  // X := 0
  Call,              // p_modeK(...)
  HoConstruct,       // H := p_modeK(...)
  HoCall,            // call(H, ...)
  Init,              // init(X)
  Fail               // fail
};

struct SLit {
  STag tag = STag::Fail;
  int x = -1;
  int y = -1;
  std::string functor;
  std::vector<int> args;
  std::size_t callee_arity = 0;
  /// Selected mode, 0-based, for calls and ho constructs.
  int mode = -1;
  /// Id of the source literal, or -1 for inserted literals.
  int origin = -1;
  /// Deconstruct of a possibly unbound solver value (run-time mode risk).
  bool runtime_risk = false;
  SourcePos pos;
  /// Binding of every variable just before this literal.
  std::vector<Grammar> before;
};

struct SGoal {
  enum class Kind { Lit, Conj, Disj, Ite };
  Kind kind = Kind::Conj;
  SLit lit;
  /// Ite children are condition, then, else.
  std::vector<SGoal> kids;
  /// Conj only: source ids of the items to be scheduled, in input order.
  std::vector<int> expected;
  /// Conj only: scheduling stopped at a definite failure.
  bool truncated = false;
  int origin = -1;
};

/// The reordered code of one (predicate, mode declaration) pair.
struct Procedure {
  std::string pred;
  std::size_t arity = 0;
  int mode_index = 0;
  std::string name;
  bool is_query = false;
  std::vector<int> head;
  std::vector<std::string> var_names;
  std::vector<Term> var_types;
  SGoal body;
  std::vector<Grammar> final_state;
};

struct ModeCheckResult {
  bool ok = false;
  Procedure proc;
  std::vector<Diagnostic> diagnostics;
};

/// Checks one mode declaration of a normalized, typed predicate.
ModeCheckResult check_mode(const Program& p, const PredDef& d, int mode_index, TiBuilder& b,
                           const Options& opts);

/// Re-verifies an emitted procedure with its order and tags locked.
/// Returns an empty string on success, otherwise the first violation.
std::string recheck(const Program& p, const Procedure& proc, TiBuilder& b, const Options& opts);

/// Procedure name for a mode, e.g. `push_mode1`.
std::string procedure_name(const std::string& pred, int mode_index);

}  // namespace modal
