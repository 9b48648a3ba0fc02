#include "modal/ast.hpp"

#include <sstream>

namespace modal {

namespace {

void add_unique(std::vector<std::string>& out, const std::string& v) {
  for (const auto& o : out)
    if (o == v) return;
  out.push_back(v);
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i];
  }
  return s;
}

}  // namespace

void Goal::collect_vars(std::vector<std::string>& out) const {
  if (kind == Kind::Lit) {
    if (!lit.x.empty()) add_unique(out, lit.x);
    if (!lit.y.empty()) add_unique(out, lit.y);
    for (const auto& a : lit.args) add_unique(out, a);
    return;
  }
  for (const auto& k : kids) k.collect_vars(out);
}

std::string literal_str(const Literal& l) {
  switch (l.kind) {
    case LitKind::EqVV: return l.x + " = " + l.y;
    case LitKind::EqVF:
    case LitKind::HoConstruct: {
      Term t = Term::atom(l.functor);
      for (const auto& a : l.args) t.args.push_back(Term::var(a));
      return l.x + " = " + t.str();
    }
    case LitKind::Call: {
      Term t = Term::atom(l.functor);
      for (const auto& a : l.args) t.args.push_back(Term::var(a));
      return t.str();
    }
    case LitKind::HoCall: return "call(" + l.x + (l.args.empty() ? "" : ", ") + join_args(l.args) + ")";
    case LitKind::Init: return "init(" + l.x + ")";
    case LitKind::Fail: return "fail";
    case LitKind::True: return "true";
  }
  return "?";
}

std::string Goal::str() const {
  switch (kind) {
    case Kind::Lit: return literal_str(lit);
    case Kind::Conj: {
      if (kids.empty()) return "true";
      std::string s;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) s += ", ";
        bool paren = kids[i].kind == Kind::Conj;
        s += paren ? "(" + kids[i].str() + ")" : kids[i].str();
      }
      return s;
    }
    case Kind::Disj: {
      std::string s = "(";
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) s += " ; ";
        s += kids[i].str();
      }
      return s + ")";
    }
    case Kind::Ite:
      return "(" + kids[0].str() + " -> " + kids[1].str() + " ; " + kids[2].str() + ")";
  }
  return "?";
}

const TypeDef* Program::find_type(const std::string& name, std::size_t arity) const {
  for (const auto& t : typedefs)
    if (t.name == name && t.params.size() == arity) return &t;
  return nullptr;
}

const InstDef* Program::find_inst(const std::string& name, std::size_t arity) const {
  for (const auto& i : instdefs)
    if (i.name == name && i.params.size() == arity) return &i;
  return nullptr;
}

const ModeDef* Program::find_mode(const std::string& name, std::size_t arity) const {
  for (const auto& m : modedefs)
    if (m.name == name && m.params.size() == arity) return &m;
  return nullptr;
}

PredDef* Program::find_pred(const std::string& name, std::size_t arity) {
  for (auto& p : preds)
    if (p.name == name && p.arity == arity) return &p;
  return nullptr;
}

const PredDef* Program::find_pred(const std::string& name, std::size_t arity) const {
  for (const auto& p : preds)
    if (p.name == name && p.arity == arity) return &p;
  return nullptr;
}

std::vector<const TypeDef*> Program::constructor_owners(const std::string& f, std::size_t n) const {
  std::vector<const TypeDef*> out;
  for (const auto& t : typedefs) {
    if (t.equiv) continue;
    for (const auto& a : t.alts)
      if (a.name == f && a.arity() == n) {
        out.push_back(&t);
        break;
      }
  }
  return out;
}

bool Program::is_solver_type(const Term& t) const {
  if (t.is_var) return false;
  const TypeDef* d = find_type(t.name, t.arity());
  return d && d->is_solver;
}

bool is_builtin_type(const Term& t) {
  return !t.is_var && t.args.empty() &&
         (t.name == "int" || t.name == "float" || t.name == "char" || t.name == "string");
}

bool is_base_inst(const Term& i) {
  return !i.is_var && i.args.empty() && (i.name == "new" || i.name == "old" || i.name == "ground");
}

bool is_pred_type(const Term& t) { return !t.is_var && t.name == "pred"; }

}  // namespace modal
