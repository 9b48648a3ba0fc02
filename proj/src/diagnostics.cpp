#include "modal/diagnostics.hpp"

#include <sstream>

namespace modal {

std::string Diagnostic::str() const {
  std::ostringstream os;
  if (pos.line > 0) os << pos.line << ':' << pos.col << ": ";
  os << (severity == Severity::Error ? "error" : "warning") << ' ' << code;
  if (!context.empty()) os << " [" << context << ']';
  os << ": " << message;
  return os.str();
}

void fail_at(const std::string& code, SourcePos pos, const std::string& msg) {
  Diagnostic d;
  d.code = code;
  d.pos = pos;
  d.message = msg;
  throw FrontendError(std::move(d));
}

}  // namespace modal
