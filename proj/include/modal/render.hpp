#pragma once

#include <string>

#include "modal/ast.hpp"
#include "modal/scheduler.hpp"

namespace modal {

/// Prints a procedure as reordered clauses annotated with execution modes.
std::string render_procedure(const Program& p, const Procedure& proc);

}  // namespace modal
