#include <set>

#include "modal/frontend.hpp"

namespace modal {

namespace {

class ClauseNormalizer {
 public:
  ClauseNormalizer(const Program& p, int clause_no, std::set<std::string>& taken)
      : prog_(p), clause_no_(clause_no), taken_(taken) {}

  std::string fresh() {
    for (;;) {
      std::string n = "V_" + std::to_string(clause_no_) + "_" + std::to_string(++counter_);
      if (taken_.insert(n).second) return n;
    }
  }

  Goal body(const Term& t) {
    if (t.is(",", 2)) {
      std::vector<Goal> ks;
      append_conj(ks, body(t.args[0]));
      append_conj(ks, body(t.args[1]));
      return Goal::conj(std::move(ks));
    }
    if (t.is(";", 2)) {
      if (t.args[0].is("->", 2))
        return Goal::ite(body(t.args[0].args[0]), body(t.args[0].args[1]), body(t.args[1]));
      std::vector<Goal> ks;
      append_disj(ks, body(t.args[0]));
      append_disj(ks, body(t.args[1]));
      return Goal::disj(std::move(ks));
    }
    if (t.is("->", 2)) return Goal::ite(body(t.args[0]), body(t.args[1]), lit(LitKind::Fail, t.pos));
    if (t.is("\\+", 1)) return Goal::ite(body(t.args[0]), lit(LitKind::Fail, t.pos), lit(LitKind::True, t.pos));
    if (t.is_var) fail_at("T001", t.pos, "variable " + t.name + " used as a goal; use call/N");
    if (t.is("true", 0)) return lit(LitKind::True, t.pos);
    if (t.is("fail", 0) || t.is("false", 0)) return lit(LitKind::Fail, t.pos);
    std::vector<Goal> out;
    if (t.is("=", 2)) {
      equation(t.args[0], t.args[1], t.pos, out);
    } else if (t.name == "call" && t.arity() >= 1) {
      call_goal(t, out);
    } else if (t.is("init", 1) && t.args[0].is_var && !prog_.find_pred("init", 1)) {
      Literal l;
      l.kind = LitKind::Init;
      l.x = t.args[0].name;
      l.pos = t.pos;
      out.push_back(Goal::literal(l));
    } else {
      if (is_number_literal(t.name) || is_string_literal(t.name))
        fail_at("T001", t.pos, "literal " + t.name + " used as a goal");
      if (!prog_.find_pred(t.name, t.arity()))
        fail_at("T002", t.pos, "unknown predicate " + t.name + "/" + std::to_string(t.arity()));
      call_goal(t, out);
    }
    if (out.size() == 1) return out[0];
    return Goal::conj(std::move(out));
  }

  /// Emits `x = t` for a variable x, flattening nested arguments.
  void bind(const std::string& x, const Term& t, SourcePos pos, std::vector<Goal>& out) {
    if (t.is_var) {
      if (t.name != x) out.push_back(eq_vv(x, t.name, pos));
      return;
    }
    Literal l;
    l.kind = LitKind::EqVF;
    l.x = x;
    l.functor = t.name;
    l.pos = pos;
    if (!t.args.empty() && prog_.constructor_owners(t.name, t.arity()).empty()) {
      for (const auto& p : prog_.preds)
        if (p.name == t.name && p.arity > t.arity() && (l.callee_arity == 0 || p.arity < l.callee_arity)) {
          l.kind = LitKind::HoConstruct;
          l.callee_arity = p.arity;
        }
    } else if (t.args.empty() && prog_.constructor_owners(t.name, 0).empty() && !is_number_literal(t.name) &&
               !is_string_literal(t.name)) {
      for (const auto& p : prog_.preds)
        if (p.name == t.name && p.arity > 0 && (l.callee_arity == 0 || p.arity < l.callee_arity)) {
          l.kind = LitKind::HoConstruct;
          l.callee_arity = p.arity;
        }
    }
    std::vector<Goal> after;
    std::set<std::string> used{x};
    for (const auto& a : t.args) {
      if (a.is_var && used.insert(a.name).second) {
        l.args.push_back(a.name);
        continue;
      }
      std::string v = fresh();
      l.args.push_back(v);
      if (a.is_var)
        after.push_back(eq_vv(v, a.name, pos));
      else
        bind(v, a, pos, after);
    }
    out.push_back(Goal::literal(l));
    for (auto& g : after) out.push_back(std::move(g));
  }

  void equation(const Term& a, const Term& b, SourcePos pos, std::vector<Goal>& out) {
    if (a.is_var) return bind(a.name, b, pos, out);
    if (b.is_var) return bind(b.name, a, pos, out);
    std::string v = fresh();
    bind(v, a, pos, out);
    bind(v, b, pos, out);
  }

 private:
  static void append_conj(std::vector<Goal>& ks, Goal g) {
    if (g.kind == Goal::Kind::Conj)
      for (auto& k : g.kids) ks.push_back(std::move(k));
    else
      ks.push_back(std::move(g));
  }
  static void append_disj(std::vector<Goal>& ks, Goal g) {
    if (g.kind == Goal::Kind::Disj)
      for (auto& k : g.kids) ks.push_back(std::move(k));
    else
      ks.push_back(std::move(g));
  }
  static Goal lit(LitKind k, SourcePos pos) {
    Literal l;
    l.kind = k;
    l.pos = pos;
    return Goal::literal(l);
  }
  static Goal eq_vv(const std::string& x, const std::string& y, SourcePos pos) {
    Literal l;
    l.kind = LitKind::EqVV;
    l.x = x;
    l.y = y;
    l.pos = pos;
    return Goal::literal(l);
  }

  void call_goal(const Term& t, std::vector<Goal>& out) {
    Literal l;
    l.pos = t.pos;
    std::size_t first = 0;
    if (t.name == "call") {
      l.kind = LitKind::HoCall;
      first = 1;
    } else {
      l.kind = LitKind::Call;
      l.functor = t.name;
      l.callee_arity = t.arity();
    }
    std::vector<Goal> after;
    std::set<std::string> used;
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      const Term& a = t.args[i];
      std::string name;
      if (a.is_var && used.insert(a.name).second) {
        name = a.name;
      } else if (a.is_var) {
        name = fresh();
        after.push_back(eq_vv(name, a.name, t.pos));
      } else {
        name = fresh();
        bind(name, a, t.pos, out);
      }
      if (i < first)
        l.x = name;
      else
        l.args.push_back(name);
    }
    out.push_back(Goal::literal(l));
    for (auto& g : after) out.push_back(std::move(g));
  }

  const Program& prog_;
  int clause_no_;
  std::set<std::string>& taken_;
  int counter_ = 0;
};

void number_goals(Goal& g, int& next) {
  g.id = next++;
  if (g.kind == Goal::Kind::Lit) {
    g.lit.id = g.id;
    return;
  }
  for (auto& k : g.kids) number_goals(k, next);
}

void normalize_pred(const Program& prog, PredDef& d) {
  std::set<std::string> taken;
  for (const auto& c : d.clauses) {
    std::vector<std::string> vs;
    c.head.collect_vars_ordered(vs);
    c.body.collect_vars_ordered(vs);
    taken.insert(vs.begin(), vs.end());
  }
  // Head variables come from the first clause where that gives distinct variables.
  d.head_vars.clear();
  {
    ClauseNormalizer first(prog, 1, taken);
    std::set<std::string> seen;
    const Term& h = d.clauses[0].head;
    for (std::size_t j = 0; j < d.arity; ++j) {
      const Term& a = h.args[j];
      if (a.is_var && seen.insert(a.name).second)
        d.head_vars.push_back(a.name);
      else
        d.head_vars.push_back(first.fresh());
    }
  }
  std::set<std::string> used(d.head_vars.begin(), d.head_vars.end());
  std::vector<Goal> alts;
  int clause_no = 0;
  for (const auto& c : d.clauses) {
    ++clause_no;
    std::vector<std::string> vs;
    c.head.collect_vars_ordered(vs);
    c.body.collect_vars_ordered(vs);
    Subst ren;
    std::set<std::string> head_mapped;
    for (std::size_t j = 0; j < d.arity; ++j) {
      const Term& a = c.head.args[j];
      if (a.is_var && !ren.count(a.name)) {
        ren[a.name] = Term::var(d.head_vars[j], a.pos);
        head_mapped.insert(a.name);
      }
    }
    ClauseNormalizer cn(prog, clause_no, taken);
    std::set<std::string> clause_names;
    for (const auto& [from, to] : ren) clause_names.insert(to.name);
    for (const auto& v : vs) {
      if (ren.count(v)) continue;
      if (used.count(v) || clause_names.count(v)) {
        std::string n = cn.fresh();
        ren[v] = Term::var(n);
        clause_names.insert(n);
      } else {
        clause_names.insert(v);
      }
    }
    std::vector<Goal> ks;
    for (std::size_t j = 0; j < d.arity; ++j) {
      const Term& a = c.head.args[j];
      if (a.is_var && head_mapped.count(a.name) && ren[a.name].name == d.head_vars[j]) continue;
      cn.bind(d.head_vars[j], apply_subst(a, ren), c.pos, ks);
    }
    Goal b = cn.body(apply_subst(c.body, ren));
    if (b.kind == Goal::Kind::Conj)
      for (auto& k : b.kids) ks.push_back(std::move(k));
    else if (!(b.kind == Goal::Kind::Lit && b.lit.kind == LitKind::True))
      ks.push_back(std::move(b));
    alts.push_back(Goal::conj(std::move(ks)));
    for (const auto& n : clause_names) used.insert(n);
  }
  d.body = alts.size() == 1 ? std::move(alts[0]) : Goal::disj(std::move(alts));
  int next = 0;
  number_goals(d.body, next);
  d.normalized = true;
}

}  // namespace

Program normalize(Program p) {
  for (auto& d : p.preds) {
    if (d.normalized || d.clauses.empty()) continue;
    normalize_pred(p, d);
  }
  return p;
}

}  // namespace modal
