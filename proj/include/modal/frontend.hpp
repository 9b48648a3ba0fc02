#pragma once

#include <string>
#include <vector>

#include "modal/ast.hpp"

namespace modal {

/// A parsed top-level item before directive interpretation.
struct RawItem {
  enum class Kind { Directive, Query, Clause };
  Kind kind = Kind::Clause;
  Term term;
  SourcePos pos;
};

/// Reads terms separated by `.` using standard operator precedences.
std::vector<RawItem> read_items(const std::string& source);

/// Parses source text into declarations and raw clauses. The arithmetic
/// prelude is added for predicates the program does not declare itself.
Program parse_program(const std::string& source);

/// Replaces type, inst and mode equivalences by their definitions and
/// expands mode declarations into call/success pairs.
Program expand_equivalences(Program p);

/// Flattens equalities, gives every head distinct variable arguments and
/// merges the clauses of a predicate into one disjunctive body.
Program normalize(Program p);

/// Assigns a type to every variable of every normalized body and records
/// the callee substitution at each call site.
Program assign_types(Program p);

/// parse_program, expand_equivalences, normalize and assign_types.
Program load_program(const std::string& source);

/// Expanded call and success instantiations for a mode expression.
ModeArg expand_mode(const Program& p, const Term& mode, SourcePos pos);
Term expand_inst(const Program& p, const Term& inst, SourcePos pos);
Term expand_type(const Program& p, const Term& type, SourcePos pos);

}  // namespace modal
