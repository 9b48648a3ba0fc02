#include <functional>
#include <set>

#include "modal/frontend.hpp"

namespace modal {

namespace {

bool is_infer_var(const Term& t) { return t.is_var && t.name.rfind("_G", 0) == 0; }

class TypeUnifier {
 public:
  Term fresh() { return Term::var("_G" + std::to_string(++counter_)); }

  Term walk(Term t) const {
    while (is_infer_var(t)) {
      auto it = bind_.find(t.name);
      if (it == bind_.end()) break;
      t = it->second;
    }
    return t;
  }

  Term resolve(const Term& t) const {
    Term w = walk(t);
    for (auto& a : w.args) a = resolve(a);
    return w;
  }

  bool occurs(const std::string& v, const Term& t) const {
    Term w = walk(t);
    if (w.is_var) return w.name == v;
    for (const auto& a : w.args)
      if (occurs(v, a)) return true;
    return false;
  }

  bool unify(const Term& a, const Term& b) {
    Term x = walk(a), y = walk(b);
    if (is_infer_var(x) && is_infer_var(y) && x.name == y.name) return true;
    if (is_infer_var(x)) {
      if (occurs(x.name, y)) return false;
      bind_[x.name] = y;
      return true;
    }
    if (is_infer_var(y)) return unify(y, x);
    if (x.is_var || y.is_var) return x.is_var && y.is_var && x.name == y.name;
    if (x.name != y.name || x.arity() != y.arity()) return false;
    for (std::size_t i = 0; i < x.arity(); ++i)
      if (!unify(x.args[i], y.args[i])) return false;
    return true;
  }

  /// Instantiates the parameters of a definition with fresh inference variables.
  Subst instantiate(const std::vector<std::string>& params) {
    Subst s;
    for (const auto& p : params) s[p] = fresh();
    return s;
  }

  std::map<std::string, Term> bind_;
  int counter_ = 0;
};

std::vector<std::string> type_params(const std::vector<Term>& types) {
  std::vector<std::string> out;
  for (const auto& t : types) t.collect_vars_ordered(out);
  return out;
}

class PredTyper {
 public:
  PredTyper(const Program& p, PredDef& d) : prog_(p), d_(d) {}

  void run() {
    if (!d_.has_type)
      fail_at("T002", d_.pos, "predicate " + d_.key() + " has clauses but no type declaration");
    for (std::size_t j = 0; j < d_.arity; ++j) types_[d_.head_vars[j]] = d_.types[j];
    visit(d_.body);
    // Ambiguous constructors: take the first candidate that fits, repeating until stable.
    bool progress = true;
    while (!deferred_.empty() && progress) {
      progress = false;
      for (auto it = deferred_.begin(); it != deferred_.end();) {
        int fits = 0;
        const TypeDef* chosen = nullptr;
        for (const TypeDef* cand : it->cands) {
          TypeUnifier trial = u_;
          if (constructor_fits(trial, *it->lit, *cand)) {
            if (!chosen) chosen = cand;
            ++fits;
          }
        }
        if (fits == 1 || (fits > 1 && !pending_more_info(*it->lit))) {
          constructor_fits(u_, *it->lit, *chosen);
          it = deferred_.erase(it);
          progress = true;
        } else if (fits == 0) {
          type_error(*it->lit);
        } else {
          ++it;
        }
      }
      if (!progress && !deferred_.empty()) {
        auto& e = deferred_.front();
        for (const TypeDef* cand : e.cands) {
          TypeUnifier trial = u_;
          if (constructor_fits(trial, *e.lit, *cand)) {
            u_ = trial;
            break;
          }
        }
        deferred_.erase(deferred_.begin());
        progress = true;
      }
    }
    // Remaining inference variables become fresh type parameters.
    std::map<std::string, std::string> leftover;
    std::function<Term(const Term&)> finish = [&](const Term& t) -> Term {
      Term r = u_.resolve(t);
      std::function<void(Term&)> fix = [&](Term& x) {
        if (is_infer_var(x)) {
          auto it = leftover.find(x.name);
          if (it == leftover.end())
            it = leftover.emplace(x.name, "_T" + std::to_string(leftover.size() + 1)).first;
          x.name = it->second;
          return;
        }
        for (auto& a : x.args) fix(a);
      };
      fix(r);
      return r;
    };
    d_.var_types.clear();
    for (const auto& [v, t] : types_) d_.var_types[v] = finish(t);
    std::function<void(Goal&)> fix_theta = [&](Goal& g) {
      if (g.kind == Goal::Kind::Lit) {
        for (auto& [k, t] : g.lit.theta) t = finish(t);
        return;
      }
      for (auto& k : g.kids) fix_theta(k);
    };
    fix_theta(d_.body);
  }

 private:
  struct Deferred {
    Literal* lit;
    std::vector<const TypeDef*> cands;
  };

  Term& type_of(const std::string& v) {
    auto it = types_.find(v);
    if (it == types_.end()) it = types_.emplace(v, u_.fresh()).first;
    return it->second;
  }

  [[noreturn]] void type_error(const Literal& l) {
    fail_at("T001", l.pos, "type error in " + d_.key() + " at literal " + literal_str(l));
  }

  void unify_or_fail(const Term& a, const Term& b, const Literal& l) {
    if (!u_.unify(a, b))
      fail_at("T001", l.pos,
              "type error in " + d_.key() + " at literal " + literal_str(l) + ": " + u_.resolve(a).str() +
                  " does not match " + u_.resolve(b).str());
  }

  bool constructor_fits(TypeUnifier& u, const Literal& l, const TypeDef& d) {
    Subst s = u.instantiate(d.params);
    Term self = Term::atom(d.name);
    for (const auto& p : d.params) self.args.push_back(s[p]);
    const Term* alt = nullptr;
    for (const auto& a : d.alts)
      if (a.name == l.functor && a.arity() == l.args.size()) alt = &a;
    if (!u.unify(type_of(l.x), self)) return false;
    for (std::size_t i = 0; i < l.args.size(); ++i)
      if (!u.unify(type_of(l.args[i]), apply_subst(alt->args[i], s))) return false;
    return true;
  }

  bool pending_more_info(const Literal& l) {
    Term t = u_.walk(type_of(l.x));
    return is_infer_var(t);
  }

  void visit(Goal& g) {
    if (g.kind != Goal::Kind::Lit) {
      for (auto& k : g.kids) visit(k);
      return;
    }
    Literal& l = g.lit;
    switch (l.kind) {
      case LitKind::EqVV: unify_or_fail(type_of(l.x), type_of(l.y), l); break;
      case LitKind::EqVF: {
        if (l.args.empty() && is_number_literal(l.functor)) {
          bool is_float = l.functor.find('.') != std::string::npos;
          unify_or_fail(type_of(l.x), Term::atom(is_float ? "float" : "int"), l);
          break;
        }
        if (l.args.empty() && is_string_literal(l.functor)) {
          unify_or_fail(type_of(l.x), Term::atom("string"), l);
          break;
        }
        auto owners = prog_.constructor_owners(l.functor, l.args.size());
        if (owners.empty())
          fail_at("T001", l.pos,
                  "undefined constructor " + l.functor + "/" + std::to_string(l.args.size()) + " in " + d_.key());
        for (const auto& a : l.args) type_of(a);
        type_of(l.x);
        if (owners.size() == 1) {
          if (!constructor_fits(u_, l, *owners[0])) type_error(l);
        } else {
          deferred_.push_back({&l, owners});
        }
        break;
      }
      case LitKind::Call:
      case LitKind::HoConstruct: {
        const PredDef* callee = prog_.find_pred(l.functor, l.callee_arity);
        if (!callee) fail_at("T002", l.pos, "unknown predicate " + l.functor + "/" + std::to_string(l.callee_arity));
        if (!callee->has_type) fail_at("T002", l.pos, "predicate " + callee->key() + " has no type declaration");
        Subst s = u_.instantiate(type_params(callee->types));
        l.theta = s;
        for (std::size_t i = 0; i < l.args.size(); ++i)
          unify_or_fail(type_of(l.args[i]), apply_subst(callee->types[i], s), l);
        if (l.kind == LitKind::HoConstruct) {
          Term pt = Term::atom("pred");
          for (std::size_t i = l.args.size(); i < callee->arity; ++i)
            pt.args.push_back(apply_subst(callee->types[i], s));
          unify_or_fail(type_of(l.x), pt, l);
        }
        break;
      }
      case LitKind::HoCall: {
        Term pt = Term::atom("pred");
        for (const auto& a : l.args) pt.args.push_back(type_of(a));
        unify_or_fail(type_of(l.x), pt, l);
        break;
      }
      case LitKind::Init: type_of(l.x); break;
      case LitKind::Fail:
      case LitKind::True: break;
    }
  }

  const Program& prog_;
  PredDef& d_;
  TypeUnifier u_;
  std::map<std::string, Term> types_;
  std::vector<Deferred> deferred_;
};

}  // namespace

Program assign_types(Program p) {
  for (auto& d : p.preds) {
    if (!d.normalized) continue;
    PredTyper(p, d).run();
  }
  return p;
}

}  // namespace modal
