#include "modal/render.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace modal {

namespace {

bool symbolic(const std::string& n) {
  if (n.empty()) return false;
  static const std::string sym = "+-*/\\^<>=~:.?@#&$";
  for (char c : n)
    if (sym.find(c) == std::string::npos) return false;
  return true;
}

class Renderer {
 public:
  Renderer(const Program& p, const Procedure& proc) : prog_(p), proc_(proc) {
    for (int h : proc.head) head_.insert(h);
    count(proc.body);
  }

  std::string run() {
    std::ostringstream os;
    std::string head = proc_.name;
    if (!proc_.head.empty()) {
      head += "(";
      for (std::size_t j = 0; j < proc_.head.size(); ++j) {
        if (j) head += ", ";
        head += proc_.var_names[proc_.head[j]];
      }
      head += ")";
    }
    std::vector<const SGoal*> clauses;
    const SGoal* body = &proc_.body;
    if (body->kind == SGoal::Kind::Conj && body->kids.size() == 1 && body->kids[0].kind == SGoal::Kind::Disj)
      body = &body->kids[0];
    if (body->kind == SGoal::Kind::Disj && !proc_.is_query)
      for (const auto& k : body->kids) clauses.push_back(&k);
    else
      clauses.push_back(body);
    for (const SGoal* c : clauses) {
      std::string b = goal(*c, 1);
      if (b.empty()) b = "true";
      if (proc_.is_query)
        os << "?- " << b << ".\n";
      else
        os << head << " :-\n    " << b << ".\n";
    }
    return os.str();
  }

 private:
  const Program& prog_;
  const Procedure& proc_;
  std::set<int> head_;
  std::map<int, int> constructed_;
  std::map<int, int> uses_;
  std::map<int, const SLit*> def_;

  void count(const SGoal& g) {
    if (g.kind != SGoal::Kind::Lit) {
      for (const auto& k : g.kids) count(k);
      return;
    }
    const SLit& l = g.lit;
    switch (l.tag) {
      case STag::Construct:
      case STag::BuiltinConstruct:
        ++constructed_[l.x];
        def_[l.x] = &l;
        for (int a : l.args) ++uses_[a];
        break;
      case STag::Call:
      case STag::HoCall:
      case STag::HoConstruct:
        if (l.tag != STag::Call) ++uses_[l.x];
        for (int a : l.args) ++uses_[a];
        break;
      default:
        if (l.x >= 0) uses_[l.x] += 2;
        if (l.y >= 0) uses_[l.y] += 2;
        for (int a : l.args) uses_[a] += 2;
        break;
    }
  }

  bool folded(int v) const {
    if (head_.count(v)) return false;
    const std::string& n = proc_.var_names[v];
    if (n.rfind("V_", 0) != 0) return false;
    auto c = constructed_.find(v);
    auto u = uses_.find(v);
    return c != constructed_.end() && c->second == 1 && u != uses_.end() && u->second == 1;
  }

  Term construct_term(const SLit& l) const {
    std::vector<Term> args;
    for (int a : l.args) args.push_back(arg(a));
    return Term::app(l.functor, std::move(args));
  }

  Term arg(int v) const {
    if (folded(v)) return construct_term(*def_.at(v));
    return Term::var(proc_.var_names[v]);
  }

  std::string args_str(const std::vector<int>& args) const {
    std::string s;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (k) s += ", ";
      s += arg(args[k]).str();
    }
    return s;
  }

  std::string name(int v) const { return proc_.var_names[v]; }

  std::string call_str(const SLit& l) const {
    const PredDef* d = prog_.find_pred(l.functor, l.callee_arity);
    if (l.tag == STag::Call && l.args.size() == 2 && symbolic(l.functor) && d && d->modes.size() == 1)
      return arg(l.args[0]).str() + " " + l.functor + " " + arg(l.args[1]).str();
    std::string s = procedure_name(l.functor, l.mode);
    if (!l.args.empty()) s += "(" + args_str(l.args) + ")";
    return s;
  }

  std::string lit(const SLit& l) const {
    switch (l.tag) {
      case STag::Copy: return name(l.x) + " := " + name(l.y);
      case STag::Unify: return name(l.x) + " == " + name(l.y);
      case STag::Construct:
      case STag::BuiltinConstruct:
        if (folded(l.x)) return "";
        return name(l.x) + " := " + construct_term(l).str();
      case STag::Test: return name(l.x) + " == " + Term::atom(l.functor).str();
      case STag::Deconstruct: {
        std::vector<Term> args;
        for (int a : l.args) args.push_back(Term::var(name(a)));
        Term t = Term::app(l.functor, std::move(args));
        return name(l.x) + (l.args.empty() ? " == " : " =: ") + t.str();
      }
      case STag::Call: return call_str(l);
      case STag::HoConstruct: return name(l.x) + " := " + call_str(l);
      case STag::HoCall: {
        std::string s = "call(" + name(l.x);
        for (int a : l.args) s += ", " + arg(a).str();
        return s + ")";
      }
      case STag::Init: return "init(" + name(l.x) + ")";
      case STag::Fail: return "fail";
    }
    return "";
  }

  std::string goal(const SGoal& g, int depth) const {
    switch (g.kind) {
      case SGoal::Kind::Lit: return lit(g.lit);
      case SGoal::Kind::Conj: {
        std::string s;
        for (const auto& k : g.kids) {
          std::string part = goal(k, depth);
          if (part.empty()) continue;
          if (!s.empty()) s += ",\n" + indent(depth);
          s += part;
        }
        return s;
      }
      case SGoal::Kind::Disj: {
        std::string s = "(   ";
        for (std::size_t k = 0; k < g.kids.size(); ++k) {
          if (k) s += "\n" + indent(depth) + ";   ";
          std::string part = goal(g.kids[k], depth + 1);
          s += part.empty() ? "true" : part;
        }
        return s + "\n" + indent(depth) + ")";
      }
      case SGoal::Kind::Ite: {
        auto part = [&](const SGoal& k) {
          std::string p = goal(k, depth + 1);
          return p.empty() ? std::string("true") : p;
        };
        return "(   " + part(g.kids[0]) + "\n" + indent(depth) + "->  " + part(g.kids[1]) + "\n" + indent(depth) +
               ";   " + part(g.kids[2]) + "\n" + indent(depth) + ")";
      }
    }
    return "";
  }

  static std::string indent(int depth) { return std::string(4 * static_cast<std::size_t>(depth), ' '); }
};

}  // namespace

std::string render_procedure(const Program& p, const Procedure& proc) { return Renderer(p, proc).run(); }

}  // namespace modal
