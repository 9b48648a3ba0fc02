#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modal/diagnostics.hpp"
#include "modal/term.hpp"

namespace modal {

struct TypeDef {
  std::string name;
  std::vector<std::string> params;
  /// Each alternative is a tree constructor applied to type expressions.
  std::vector<Term> alts;
  bool is_solver = false;
  /// Set for `typedef a = b` equivalences.
  std::optional<Term> equiv;
  SourcePos pos;
};

struct InstDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<Term> alts;
  std::optional<Term> equiv;
  SourcePos pos;
};

struct ModeDef {
  std::string name;
  std::vector<std::string> params;
  std::optional<Term> call;
  std::optional<Term> success;
  std::optional<Term> equiv;
  SourcePos pos;
};

struct ModeArg {
  Term call;
  Term success;
};

struct ModeDecl {
  std::vector<ModeArg> args;
  std::string determinism;
  SourcePos pos;
};

struct RawClause {
  Term head;
  Term body;
  SourcePos pos;
};

enum class LitKind { EqVV, EqVF, Call, HoConstruct, HoCall, Init, Fail, True };

/// A normalized body literal. Every argument is a variable.
///   EqVV         x = y
///   EqVF         x = functor(args)
///   Call         functor(args)
///   HoConstruct  x = functor(args) where functor/callee_arity is a predicate
///   HoCall       call(x, args)
///   Init         init(x)
struct Literal {
  LitKind kind = LitKind::True;
  std::string x;
  std::string y;
  std::string functor;
  std::vector<std::string> args;
  std::size_t callee_arity = 0;
  SourcePos pos;
  int id = -1;
  /// Callee type parameter -> call-site type (calls and ho constructs).
  Subst theta;
};

struct Goal {
  enum class Kind { Lit, Conj, Disj, Ite };
  Kind kind = Kind::Conj;
  Literal lit;
  /// Ite children are condition, then, else.
  std::vector<Goal> kids;
  int id = -1;

  static Goal literal(Literal l) {
    Goal g;
    g.kind = Kind::Lit;
    g.lit = std::move(l);
    return g;
  }
  static Goal conj(std::vector<Goal> ks) {
    Goal g;
    g.kind = Kind::Conj;
    g.kids = std::move(ks);
    return g;
  }
  static Goal disj(std::vector<Goal> ks) {
    Goal g;
    g.kind = Kind::Disj;
    g.kids = std::move(ks);
    return g;
  }
  static Goal ite(Goal c, Goal t, Goal e) {
    Goal g;
    g.kind = Kind::Ite;
    g.kids = {std::move(c), std::move(t), std::move(e)};
    return g;
  }

  void collect_vars(std::vector<std::string>& out) const;
  std::string str() const;
};

std::string literal_str(const Literal& l);

struct PredDef {
  std::string name;
  std::size_t arity = 0;
  std::vector<Term> types;
  bool has_type = false;
  std::vector<ModeDecl> modes;
  std::vector<RawClause> clauses;
  SourcePos pos;
  bool is_query = false;
  bool is_prelude = false;

  std::vector<std::string> head_vars;
  Goal body;
  bool normalized = false;
  std::map<std::string, Term> var_types;

  std::string key() const { return name + "/" + std::to_string(arity); }
};

struct Program {
  std::vector<TypeDef> typedefs;
  std::vector<InstDef> instdefs;
  std::vector<ModeDef> modedefs;
  std::vector<PredDef> preds;
  std::vector<Diagnostic> warnings;

  const TypeDef* find_type(const std::string& name, std::size_t arity) const;
  const InstDef* find_inst(const std::string& name, std::size_t arity) const;
  const ModeDef* find_mode(const std::string& name, std::size_t arity) const;
  PredDef* find_pred(const std::string& name, std::size_t arity);
  const PredDef* find_pred(const std::string& name, std::size_t arity) const;
  /// Type definitions having an alternative with constructor f/n.
  std::vector<const TypeDef*> constructor_owners(const std::string& f, std::size_t n) const;
  bool is_solver_type(const Term& t) const;
};

bool is_builtin_type(const Term& t);
bool is_base_inst(const Term& i);
bool is_pred_type(const Term& t);

}  // namespace modal
