#include "modal/driver.hpp"

#include <algorithm>

#include "modal/frontend.hpp"
#include "modal/render.hpp"
#include "modal/tigrammar.hpp"

namespace modal {

std::string format_diagnostics(const std::vector<Diagnostic>& ds) {
  std::string s;
  for (const auto& d : ds) s += d.str() + "\n";
  return s;
}

namespace {

void check_regular(const Program& p, TiBuilder& b) {
  for (const auto& d : p.preds)
    for (const auto& t : d.types) b.grammar_of_type(t);
}

}  // namespace

CheckReport check_source(const std::string& source, const Options& opts) {
  CheckReport rep;
  Program prog;
  try {
    prog = load_program(source);
  } catch (const FrontendError& e) {
    rep.diagnostics.push_back(e.diagnostic());
    rep.exit_code = 2;
    return rep;
  }
  rep.diagnostics = prog.warnings;
  GrammarStore store;
  TiBuilder builder(prog, store);
  try {
    check_regular(prog, builder);
  } catch (const NonRegularError& e) {
    rep.diagnostics.push_back({"P003", Severity::Error, e.what(), {}, ""});
    rep.exit_code = 2;
    return rep;
  }
  bool errors = false;
  bool internal = false;
  for (const auto& d : prog.preds) {
    if (d.is_prelude || !d.normalized) continue;
    for (std::size_t k = 0; k < d.modes.size(); ++k) {
      ModeCheckResult r;
      try {
        r = check_mode(prog, d, static_cast<int>(k), builder, opts);
      } catch (const NonRegularError& e) {
        rep.diagnostics.push_back({"P003", Severity::Error, e.what(), d.pos, d.key()});
        rep.exit_code = 2;
        return rep;
      }
      rep.diagnostics.insert(rep.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
      if (!r.ok) {
        errors = true;
        continue;
      }
      std::string why = recheck(prog, r.proc, builder, opts);
      if (!why.empty()) {
        rep.diagnostics.push_back(
            {"I001", Severity::Error, "recheck of " + r.proc.name + " failed: " + why, d.pos, r.proc.name});
        internal = true;
        continue;
      }
      rep.output += render_procedure(prog, r.proc);
      rep.procedures.push_back(std::move(r.proc));
    }
  }
  auto w = builder.take_warnings();
  rep.diagnostics.insert(rep.diagnostics.end(), w.begin(), w.end());
  bool warnings = std::any_of(rep.diagnostics.begin(), rep.diagnostics.end(),
                              [](const Diagnostic& d) { return !d.is_error(); });
  if (internal)
    rep.exit_code = 3;
  else if (errors || (opts.werror && warnings))
    rep.exit_code = 1;
  return rep;
}

DumpReport dump_ti(const std::string& source, const std::string& type, const std::string& inst) {
  DumpReport rep;
  try {
    Program prog = load_program(source);
    auto one = [](const std::string& text) {
      auto items = read_items(text + " .");
      if (items.size() != 1) fail_at("P001", {}, "expected a single term: " + text);
      return items[0].term;
    };
    Term t = expand_type(prog, one(type), {});
    Term i = expand_inst(prog, one(inst), {});
    GrammarStore store;
    TiBuilder builder(prog, store);
    Grammar g = builder.rt(t, i);
    rep.output = store.dump(g);
    if (!rep.output.empty() && rep.output.back() != '\n') rep.output += "\n";
    rep.diagnostics = builder.take_warnings();
  } catch (const FrontendError& e) {
    rep.diagnostics.push_back(e.diagnostic());
    rep.exit_code = 2;
  } catch (const NonRegularError& e) {
    rep.diagnostics.push_back({"P003", Severity::Error, e.what(), {}, ""});
    rep.exit_code = 2;
  }
  return rep;
}

}  // namespace modal
