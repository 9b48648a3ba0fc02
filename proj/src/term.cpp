#include "modal/term.hpp"

#include <cctype>
#include <sstream>

namespace modal {

bool Term::is_ground() const {
  if (is_var) return false;
  for (const auto& a : args)
    if (!a.is_ground()) return false;
  return true;
}

void Term::collect_vars(std::set<std::string>& out) const {
  if (is_var) {
    out.insert(name);
    return;
  }
  for (const auto& a : args) a.collect_vars(out);
}

void Term::collect_vars_ordered(std::vector<std::string>& out) const {
  if (is_var) {
    for (const auto& v : out)
      if (v == name) return;
    out.push_back(name);
    return;
  }
  for (const auto& a : args) a.collect_vars_ordered(out);
}

namespace {

bool needs_quotes(const std::string& n) {
  if (n.empty()) return true;
  if (n == "[]" || n == "." || is_number_literal(n) || is_string_literal(n)) return false;
  if (std::islower(static_cast<unsigned char>(n[0]))) {
    for (char c : n)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return true;
    return false;
  }
  static const std::string sym = "+-*/\\^<>=~:.?@#&$";
  for (char c : n)
    if (sym.find(c) == std::string::npos) return true;
  return false;
}

void print(std::ostream& os, const Term& t) {
  if (t.is_var) {
    os << t.name;
    return;
  }
  if (t.is("->", 2)) {
    os << '(';
    print(os, t.args[0]);
    os << " -> ";
    print(os, t.args[1]);
    os << ')';
    return;
  }
  if (t.is(".", 2)) {
    os << '[';
    print(os, t.args[0]);
    const Term* tail = &t.args[1];
    while (tail->is(".", 2)) {
      os << ", ";
      print(os, tail->args[0]);
      tail = &tail->args[1];
    }
    if (!tail->is("[]", 0)) {
      os << '|';
      print(os, *tail);
    }
    os << ']';
    return;
  }
  if (needs_quotes(t.name))
    os << '\'' << t.name << '\'';
  else
    os << t.name;
  if (!t.args.empty()) {
    os << '(';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) os << ", ";
      print(os, t.args[i]);
    }
    os << ')';
  }
}

}  // namespace

std::string Term::str() const {
  std::ostringstream os;
  print(os, *this);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Term& t) {
  print(os, t);
  return os;
}

bool operator==(const Term& a, const Term& b) {
  return a.is_var == b.is_var && a.name == b.name && a.args == b.args;
}

bool operator<(const Term& a, const Term& b) {
  if (a.is_var != b.is_var) return a.is_var;
  if (a.name != b.name) return a.name < b.name;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size();
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (a.args[i] < b.args[i]) return true;
    if (b.args[i] < a.args[i]) return false;
  }
  return false;
}

Term apply_subst(const Term& t, const Subst& s) {
  if (t.is_var) {
    auto it = s.find(t.name);
    return it == s.end() ? t : it->second;
  }
  Term r = t;
  for (auto& a : r.args) a = apply_subst(a, s);
  return r;
}

bool is_number_literal(const std::string& name) {
  if (name.empty()) return false;
  std::size_t i = (name[0] == '-' && name.size() > 1) ? 1 : 0;
  if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
  for (; i < name.size(); ++i) {
    char c = name[i];
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != 'e' && c != 'E')
      return false;
  }
  return true;
}

bool is_string_literal(const std::string& name) {
  return name.size() >= 2 && name.front() == '"' && name.back() == '"';
}

}  // namespace modal
