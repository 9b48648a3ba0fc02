#include <functional>
#include <set>

#include "modal/frontend.hpp"

namespace modal {

namespace {

std::vector<Term> flatten_op(const Term& t, const std::string& op) {
  std::vector<Term> out;
  const Term* cur = &t;
  while (cur->is(op, 2)) {
    out.push_back(cur->args[0]);
    cur = &cur->args[1];
  }
  out.push_back(*cur);
  return out;
}

std::vector<std::string> head_params(const Term& head, const char* what) {
  std::vector<std::string> params;
  for (const auto& a : head.args) {
    if (!a.is_var) fail_at("P003", head.pos, std::string(what) + " head parameters must be variables");
    for (const auto& p : params)
      if (p == a.name) fail_at("P003", head.pos, std::string(what) + " head parameters must be distinct");
    params.push_back(a.name);
  }
  return params;
}

/// Splits `H -> a1 ; a2 ; ...` (as parsed, `(H -> a1) ; a2 ; ...`) into head and alternatives.
std::pair<Term, std::vector<Term>> split_definition(const Term& body, SourcePos pos) {
  std::vector<Term> items = flatten_op(body, ";");
  if (!items[0].is("->", 2)) fail_at("P003", pos, "expected a definition of the form head -> alternatives");
  Term head = items[0].args[0];
  std::vector<Term> alts = flatten_op(items[0].args[1], ";");
  for (std::size_t i = 1; i < items.size(); ++i) alts.push_back(items[i]);
  return {head, alts};
}

bool contains_nested_new(const Term& t) {
  if (t.is_var) return false;
  if (t.is("new", 0)) return true;
  if (t.name == "pred") return false;
  for (const auto& a : t.args)
    if (contains_nested_new(a)) return true;
  return false;
}

void check_alts(const std::vector<Term>& alts, const std::vector<std::string>& params, SourcePos pos,
                const char* what) {
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto& a : alts) {
    if (a.is_var) fail_at("P003", pos, std::string(what) + " alternative must be a constructor");
    if (!seen.insert({a.name, a.arity()}).second)
      fail_at("P003", pos, "constructor " + a.name + "/" + std::to_string(a.arity()) +
                               " appears twice in one definition");
    std::set<std::string> vars;
    a.collect_vars(vars);
    for (const auto& v : vars) {
      bool ok = false;
      for (const auto& p : params) ok = ok || p == v;
      if (!ok) fail_at("P003", pos, "parameter " + v + " does not appear in the definition head");
    }
  }
}

void add_typedef(Program& p, const Term& arg, SourcePos pos) {
  Term body = arg;
  bool solver = false;
  if (body.is("deriving", 2)) {
    if (!body.args[1].is("solver", 0)) fail_at("P003", pos, "only 'deriving solver' is supported");
    solver = true;
    body = Term(body.args[0]);
  }
  TypeDef d;
  d.pos = pos;
  d.is_solver = solver;
  Term head;
  if (body.is("=", 2)) {
    head = body.args[0];
    d.equiv = body.args[1];
  } else {
    auto [h, alts] = split_definition(body, pos);
    head = h;
    d.alts = alts;
  }
  if (head.is_var) fail_at("P003", pos, "type definition head must be a constructor");
  d.name = head.name;
  d.params = head_params(head, "type");
  if (is_builtin_type(head) || head.name == "pred")
    fail_at("P002", pos, "type " + head.name + " is built in and cannot be redefined");
  if (p.find_type(d.name, d.params.size()))
    fail_at("P002", pos, "duplicate type definition for " + d.name + "/" + std::to_string(d.params.size()));
  check_alts(d.alts, d.params, pos, "type");
  p.typedefs.push_back(std::move(d));
}

void add_instdef(Program& p, const Term& body, SourcePos pos) {
  InstDef d;
  d.pos = pos;
  Term head;
  if (body.is("=", 2)) {
    head = body.args[0];
    d.equiv = body.args[1];
  } else {
    auto [h, alts] = split_definition(body, pos);
    head = h;
    d.alts = alts;
  }
  if (head.is_var) fail_at("P003", pos, "instantiation definition head must be a constructor");
  d.name = head.name;
  d.params = head_params(head, "instantiation");
  if (is_base_inst(head) || head.name == "pred")
    fail_at("P002", pos, "instantiation " + head.name + " is built in and cannot be redefined");
  if (p.find_inst(d.name, d.params.size()))
    fail_at("P002", pos,
            "duplicate instantiation definition for " + d.name + "/" + std::to_string(d.params.size()));
  for (const auto& a : d.alts)
    if (contains_nested_new(a)) fail_at("P003", pos, "new nested in instantiation");
  check_alts(d.alts, d.params, pos, "instantiation");
  p.instdefs.push_back(std::move(d));
}

void add_modedef(Program& p, const Term& body, SourcePos pos) {
  ModeDef d;
  d.pos = pos;
  Term head;
  if (body.is("=", 2)) {
    head = body.args[0];
    d.equiv = body.args[1];
  } else if (body.is("->", 2) && body.args[1].is("->", 2)) {
    head = body.args[0];
    d.call = body.args[1].args[0];
    d.success = body.args[1].args[1];
  } else {
    fail_at("P003", pos, "expected a mode definition of the form head -> (call -> success)");
  }
  if (head.is_var) fail_at("P003", pos, "mode definition head must be a constructor");
  d.name = head.name;
  d.params = head_params(head, "mode");
  if (p.find_mode(d.name, d.params.size()))
    fail_at("P002", pos, "duplicate mode definition for " + d.name + "/" + std::to_string(d.params.size()));
  p.modedefs.push_back(std::move(d));
}

PredDef& pred_entry(Program& p, const std::string& name, std::size_t arity, SourcePos pos) {
  if (PredDef* d = p.find_pred(name, arity)) return *d;
  PredDef d;
  d.name = name;
  d.arity = arity;
  d.pos = pos;
  p.preds.push_back(std::move(d));
  return p.preds.back();
}

void add_pred(Program& p, const Term& decl, SourcePos pos) {
  if (decl.is_var) fail_at("P003", pos, "malformed predicate declaration");
  PredDef& d = pred_entry(p, decl.name, decl.arity(), pos);
  if (d.has_type) fail_at("P002", pos, "duplicate type declaration for predicate " + d.key());
  d.types = decl.args;
  d.has_type = true;
  d.pos = pos;
}

void add_mode(Program& p, const Term& arg, SourcePos pos) {
  Term decl = arg;
  ModeDecl m;
  m.pos = pos;
  if (decl.is("is", 2)) {
    m.determinism = decl.args[1].str();
    decl = Term(decl.args[0]);
  }
  if (decl.is_var) fail_at("P003", pos, "malformed mode declaration");
  PredDef& d = pred_entry(p, decl.name, decl.arity(), pos);
  for (const auto& a : decl.args) m.args.push_back({a, Term()});
  d.modes.push_back(std::move(m));
}

void add_prelude(Program& p) {
  auto ensure = [&](const std::string& name, std::vector<std::string> modes, std::size_t arity) {
    if (p.find_pred(name, arity)) return;
    PredDef d;
    d.name = name;
    d.arity = arity;
    d.has_type = true;
    d.is_prelude = true;
    d.types.assign(arity, Term::atom("int"));
    for (const auto& ms : modes) {
      ModeDecl m;
      m.determinism = "det";
      for (char c : ms) m.args.push_back({Term::atom(c == 'i' ? "in" : "out"), Term()});
      d.modes.push_back(std::move(m));
    }
    p.preds.push_back(std::move(d));
  };
  ensure("+", {"iio", "oii", "ioi"}, 3);
  for (const char* op : {">", "<", ">=", "=<"}) ensure(op, {"ii"}, 2);
}

}  // namespace

Program parse_program(const std::string& source) {
  Program p;
  int query_no = 0;
  for (const auto& item : read_items(source)) {
    const Term& t = item.term;
    switch (item.kind) {
      case RawItem::Kind::Directive: {
        if (t.is("typedef", 1)) {
          add_typedef(p, t.args[0], item.pos);
        } else if (t.is("instdef", 1)) {
          add_instdef(p, t.args[0], item.pos);
        } else if (t.is("modedef", 1)) {
          add_modedef(p, t.args[0], item.pos);
        } else if (t.is("pred", 1)) {
          add_pred(p, t.args[0], item.pos);
        } else if (t.is("mode", 1)) {
          add_mode(p, t.args[0], item.pos);
        } else {
          fail_at("P001", item.pos, "unknown directive " + t.str());
        }
        break;
      }
      case RawItem::Kind::Query: {
        PredDef d;
        d.name = "query" + std::to_string(++query_no);
        d.has_type = true;
        d.is_query = true;
        d.pos = item.pos;
        d.modes.push_back(ModeDecl{{}, "det", item.pos});
        d.clauses.push_back({Term::atom(d.name, item.pos), t, item.pos});
        p.preds.push_back(std::move(d));
        break;
      }
      case RawItem::Kind::Clause: {
        Term head = t;
        Term body = Term::atom("true", item.pos);
        if (t.is(":-", 2)) {
          head = t.args[0];
          body = t.args[1];
        }
        if (head.is_var || is_number_literal(head.name) || is_string_literal(head.name))
          fail_at("P001", item.pos, "clause head must be an atom or compound term");
        PredDef& d = pred_entry(p, head.name, head.arity(), item.pos);
        d.clauses.push_back({head, body, item.pos});
        break;
      }
    }
  }
  add_prelude(p);
  return p;
}

// ---------------------------------------------------------------------------
// Equivalence expansion

namespace {

constexpr int kMaxExpansionDepth = 64;

Term subst_params(const Term& body, const std::vector<std::string>& params, const std::vector<Term>& args) {
  Subst s;
  for (std::size_t i = 0; i < params.size(); ++i) s[params[i]] = args[i];
  return apply_subst(body, s);
}

Term expand_type_rec(const Program& p, const Term& t, SourcePos pos, std::vector<std::string>& stack) {
  if (t.is_var) return t;
  if (is_builtin_type(t)) return t;
  Term out = t;
  for (auto& a : out.args) a = expand_type_rec(p, a, pos, stack);
  if (t.name == "pred") return out;
  const TypeDef* d = p.find_type(t.name, t.arity());
  if (!d) fail_at("T001", pos, "undefined type " + t.name + "/" + std::to_string(t.arity()));
  if (!d->equiv) return out;
  std::string key = t.name + "/" + std::to_string(t.arity());
  for (const auto& s : stack)
    if (s == key) fail_at("P003", d->pos, "circular type equivalences are not allowed (" + key + ")");
  if (stack.size() > static_cast<std::size_t>(kMaxExpansionDepth))
    fail_at("P003", d->pos, "type equivalence expansion too deep");
  stack.push_back(key);
  Term r = expand_type_rec(p, subst_params(*d->equiv, d->params, out.args), pos, stack);
  stack.pop_back();
  return r;
}

Term expand_inst_rec(const Program& p, const Term& i, SourcePos pos, std::vector<std::string>& stack);

ModeArg expand_mode_rec(const Program& p, const Term& m, SourcePos pos, std::vector<std::string>& stack) {
  if (m.is("is", 2)) return expand_mode_rec(p, m.args[0], pos, stack);
  if (m.is("->", 2))
    return {expand_inst_rec(p, m.args[0], pos, stack), expand_inst_rec(p, m.args[1], pos, stack)};
  if (m.is_var) fail_at("P003", pos, "mode parameter " + m.name + " is not allowed here");
  std::string key = "mode " + m.name + "/" + std::to_string(m.arity());
  for (const auto& s : stack)
    if (s == key) fail_at("P003", pos, "circular mode equivalences are not allowed (" + m.name + ")");
  if (const ModeDef* d = p.find_mode(m.name, m.arity())) {
    stack.push_back(key);
    ModeArg r;
    if (d->equiv) {
      r = expand_mode_rec(p, subst_params(*d->equiv, d->params, m.args), pos, stack);
    } else {
      r.call = expand_inst_rec(p, subst_params(*d->call, d->params, m.args), pos, stack);
      r.success = expand_inst_rec(p, subst_params(*d->success, d->params, m.args), pos, stack);
    }
    stack.pop_back();
    return r;
  }
  auto base = [](const char* n) { return Term::atom(n); };
  if (m.args.empty()) {
    if (m.name == "in" || m.name == "gg") return {base("ground"), base("ground")};
    if (m.name == "out" || m.name == "ng") return {base("new"), base("ground")};
    if (m.name == "oo") return {base("old"), base("old")};
    if (m.name == "og") return {base("old"), base("ground")};
    if (m.name == "no") return {base("new"), base("old")};
  } else if (m.args.size() == 1) {
    Term i = expand_inst_rec(p, m.args[0], pos, stack);
    if (m.name == "in") return {i, i};
    if (m.name == "out") return {base("new"), i};
  }
  fail_at("P003", pos, "unknown mode " + m.str());
}

Term expand_inst_rec(const Program& p, const Term& i, SourcePos pos, std::vector<std::string>& stack) {
  if (i.is("is", 2)) return expand_inst_rec(p, i.args[0], pos, stack);
  if (i.is_var) return i;
  if (is_base_inst(i)) return i;
  if (i.name == "pred") {
    Term out = Term::app("pred", {}, i.pos);
    for (const auto& m : i.args) {
      ModeArg a = expand_mode_rec(p, m, pos, stack);
      out.args.push_back(Term::app("->", {a.call, a.success}));
    }
    return out;
  }
  const InstDef* d = p.find_inst(i.name, i.arity());
  if (!d) fail_at("P003", pos, "undefined instantiation " + i.name + "/" + std::to_string(i.arity()));
  Term out = i;
  for (auto& a : out.args) a = expand_inst_rec(p, a, pos, stack);
  if (!d->equiv) return out;
  std::string key = "inst " + i.name + "/" + std::to_string(i.arity());
  for (const auto& s : stack)
    if (s == key) fail_at("P003", d->pos, "circular instantiation equivalences are not allowed (" + i.name + ")");
  if (stack.size() > static_cast<std::size_t>(kMaxExpansionDepth))
    fail_at("P003", d->pos, "instantiation equivalence expansion too deep");
  stack.push_back(key);
  Term r = expand_inst_rec(p, subst_params(*d->equiv, d->params, out.args), pos, stack);
  stack.pop_back();
  return r;
}

}  // namespace

Term expand_type(const Program& p, const Term& type, SourcePos pos) {
  std::vector<std::string> stack;
  return expand_type_rec(p, type, pos, stack);
}

Term expand_inst(const Program& p, const Term& inst, SourcePos pos) {
  std::vector<std::string> stack;
  return expand_inst_rec(p, inst, pos, stack);
}

ModeArg expand_mode(const Program& p, const Term& mode, SourcePos pos) {
  std::vector<std::string> stack;
  return expand_mode_rec(p, mode, pos, stack);
}

Program expand_equivalences(Program p) {
  const Program& src = p;
  std::vector<TypeDef> types = src.typedefs;
  for (auto& d : types) {
    if (d.equiv) {
      *d.equiv = expand_type(src, *d.equiv, d.pos);
      continue;
    }
    for (auto& a : d.alts)
      for (auto& t : a.args) t = expand_type(src, t, d.pos);
  }
  std::vector<InstDef> insts = src.instdefs;
  for (auto& d : insts) {
    if (d.equiv) {
      *d.equiv = expand_inst(src, *d.equiv, d.pos);
      continue;
    }
    for (auto& a : d.alts) {
      for (auto& t : a.args) t = expand_inst(src, t, d.pos);
      if (contains_nested_new(a)) fail_at("P003", d.pos, "new nested in instantiation");
    }
  }
  std::vector<PredDef> preds = src.preds;
  for (auto& d : preds) {
    if (!d.modes.empty() && !d.has_type)
      fail_at("T002", d.pos, "mode declared for predicate " + d.key() + " without a type declaration");
    for (auto& t : d.types) t = expand_type(src, t, d.pos);
    for (auto& m : d.modes) {
      if (m.args.size() != d.arity) fail_at("P003", m.pos, "mode declaration arity does not match " + d.key());
      for (auto& a : m.args) {
        Term raw = a.call;
        a = expand_mode(src, raw, m.pos);
        if (!a.call.is_ground() || !a.success.is_ground())
          fail_at("P003", m.pos, "mode declarations must use ground instantiations: " + raw.str());
      }
    }
  }
  p.typedefs = std::move(types);
  p.instdefs = std::move(insts);
  p.preds = std::move(preds);
  return p;
}

Program load_program(const std::string& source) {
  return assign_types(normalize(expand_equivalences(parse_program(source))));
}

}  // namespace modal
