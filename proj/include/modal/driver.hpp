#pragma once

#include <string>
#include <vector>

#include "modal/diagnostics.hpp"
#include "modal/scheduler.hpp"

namespace modal {

struct CheckReport {
  std::vector<Procedure> procedures;
  /// Rendered procedures in source order.
  std::string output;
  std::vector<Diagnostic> diagnostics;
  /// 0 clean, 1 mode error, 2 parse or type error, 3 internal violation.
  int exit_code = 0;
};

/// Runs the whole pipeline on program text.
CheckReport check_source(const std::string& source, const Options& opts = {});

struct DumpReport {
  std::string output;
  std::vector<Diagnostic> diagnostics;
  int exit_code = 0;
};

/// Prints rt(type, inst) for a program in the grammar dump format.
DumpReport dump_ti(const std::string& source, const std::string& type, const std::string& inst);

std::string format_diagnostics(const std::vector<Diagnostic>& ds);

}  // namespace modal
