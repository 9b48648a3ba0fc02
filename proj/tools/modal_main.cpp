#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "modal/driver.hpp"
#include "modal/oracle.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream f(path);
  if (!f) return false;
  std::stringstream ss;
  ss << f.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mode checker for a small HAL subset"};
  app.require_subcommand(1);

  std::string file;
  modal::Options opts;
  bool no_init = false;
  auto* check = app.add_subcommand("check", "Mode check a program and print the reordered procedures");
  check->add_option("FILE", file, "Input program")->required();
  check->add_flag("--no-init", no_init, "Disable automatic init insertion");
  check->add_flag("--werror", opts.werror, "Treat warnings as errors");

  std::string type, inst;
  auto* dump = app.add_subcommand("dump-ti", "Print the ti-grammar of a type and instantiation");
  dump->add_option("FILE", file, "Program supplying the definitions")->required();
  dump->add_option("--type", type, "Type expression")->required();
  dump->add_option("--inst", inst, "Instantiation expression")->required();

  int depth = 4;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  auto* oracle = app.add_subcommand("oracle", "Run the grammar property suite against bounded enumeration");
  oracle->add_option("--depth", depth, "Tree height bound")->check(CLI::Range(1, 6));
  oracle->add_option("--samples", samples, "Number of random grammar pairs");
  oracle->add_option("--seed", seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  if (*oracle) {
    modal::OracleReport rep = modal::run_oracle(depth, samples, seed);
    std::cout << rep.summary();
    for (const auto& f : rep.failures) std::cerr << f << "\n";
    return rep.total_failed() == 0 ? 0 : 1;
  }

  std::string source;
  if (!read_file(file, source)) {
    std::cerr << file << ": cannot read file\n";
    return 2;
  }
  if (*dump) {
    modal::DumpReport rep = modal::dump_ti(source, type, inst);
    std::cout << rep.output;
    std::cerr << modal::format_diagnostics(rep.diagnostics);
    return rep.exit_code;
  }
  opts.init = !no_init;
  modal::CheckReport rep = modal::check_source(source, opts);
  std::cout << rep.output;
  std::cerr << modal::format_diagnostics(rep.diagnostics);
  return rep.exit_code;
}
