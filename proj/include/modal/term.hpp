#pragma once

#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace modal {

struct SourcePos {
  int line = 0;
  int col = 0;

  friend bool operator<(const SourcePos& a, const SourcePos& b) {
    return a.line != b.line ? a.line < b.line : a.col < b.col;
  }
};

/// A first-order term. Used for type expressions, instantiation expressions,
/// mode expressions and (before normalization) clause arguments.
///
/// Lists use the functor `[]` for nil and `.`/2 for cons.
struct Term {
  std::string name;
  std::vector<Term> args;
  bool is_var = false;
  SourcePos pos;

  static Term var(std::string n, SourcePos p = {}) {
    Term t;
    t.name = std::move(n);
    t.is_var = true;
    t.pos = p;
    return t;
  }
  static Term atom(std::string n, SourcePos p = {}) {
    Term t;
    t.name = std::move(n);
    t.pos = p;
    return t;
  }
  static Term app(std::string n, std::vector<Term> a, SourcePos p = {}) {
    Term t;
    t.name = std::move(n);
    t.args = std::move(a);
    t.pos = p;
    return t;
  }

  std::size_t arity() const { return args.size(); }
  bool is(std::string_view n, std::size_t a) const {
    return !is_var && name == n && args.size() == a;
  }
  bool is_ground() const;
  void collect_vars(std::set<std::string>& out) const;
  void collect_vars_ordered(std::vector<std::string>& out) const;

  /// Canonical printed form; list cells print as `[H|T]`, `->` infix.
  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b);
};

std::ostream& operator<<(std::ostream& os, const Term& t);

using Subst = std::map<std::string, Term>;

/// Replace variables bound in `s` (one pass, no chasing).
Term apply_subst(const Term& t, const Subst& s);

/// True for literal constants of the built-in atomic types.
bool is_number_literal(const std::string& name);
bool is_string_literal(const std::string& name);

}  // namespace modal
