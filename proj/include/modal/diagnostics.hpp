#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "modal/term.hpp"

namespace modal {

enum class Severity { Error, Warning };

/// Stable diagnostic codes.
///   P001 syntax error            P002 duplicate definition
///   P003 invalid definition      T001 type error
///   T002 unknown predicate       E001 unschedulable literal
///   E002 success too weak        E003 top in join
///   E004 call instantiation is a mode error
///   W001 run-time mode risk      W002 inst alternative dropped
struct Diagnostic {
  std::string code;
  Severity severity = Severity::Error;
  std::string message;
  SourcePos pos;
  std::string context;

  bool is_error() const { return severity == Severity::Error; }
  std::string str() const;
};

/// Thrown by the frontend for parse, definition and type errors.
class FrontendError : public std::runtime_error {
 public:
  explicit FrontendError(Diagnostic d)
      : std::runtime_error(d.message), diag_(std::move(d)) {}
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

/// Raised when a type or instantiation expansion exceeds the regularity budget.
class NonRegularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail_at(const std::string& code, SourcePos pos, const std::string& msg);

}  // namespace modal
