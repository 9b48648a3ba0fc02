#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "modal/driver.hpp"
#include "modal/frontend.hpp"
#include "modal/grammar.hpp"
#include "modal/oracle.hpp"
#include "modal/tigrammar.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(MODAL_DATA_DIR) + "/" + name; }

inline std::string read_data(const std::string& name) {
  std::ifstream f(data_path(name));
  if (!f) throw std::runtime_error("missing test data " + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Builds a grammar from lines `NT -> alt ; alt ...`, root first.
/// Alternatives: `[]`, `[A|B]`, `f(A,...)`, `a`, `#var#`, `$ground(T)$`,
/// `$old(T)$`, `$gpred$`, `$int$`, `$ipred$(A,B,...)`. The non-terminal
/// `new` denotes the shared new grammar.
class GrammarText {
 public:
  explicit GrammarText(modal::GrammarStore& s) : s_(s) {}

  modal::Grammar build(const std::string& text) {
    modal::Transaction tx(s_);
    std::map<std::string, modal::NtId> ids;
    std::map<modal::NtId, std::vector<modal::Production>> prods;
    auto nt = [&](const std::string& name) {
      if (name == "new") return modal::GrammarStore::kNew;
      auto it = ids.find(name);
      if (it != ids.end()) return it->second;
      modal::NtId id = tx.add(name);
      ids[name] = id;
      return id;
    };
    std::istringstream in(text);
    std::string line;
    modal::NtId root = 0;
    bool first = true;
    while (std::getline(in, line)) {
      auto arrow = line.find("->");
      if (arrow == std::string::npos) continue;
      modal::NtId lhs = nt(trim(line.substr(0, arrow)));
      if (first) {
        root = lhs;
        first = false;
      }
      for (const auto& alt : split_top(line.substr(arrow + 2), ';')) prods[lhs].push_back(production(trim(alt), nt));
    }
    for (auto& [id, ps] : prods) tx.set(id, ps);
    return tx.commit(modal::Grammar::rules(root));
  }

 private:
  modal::GrammarStore& s_;

  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (c == sep && depth == 0) {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  }

  template <class Nt>
  modal::Production production(const std::string& alt, Nt& nt) {
    if (alt == "[]") return {s_.tree_symbol("[]", 0), {}};
    if (alt == "#var#") return {s_.var_symbol(), {}};
    if (alt == "$gpred$") return {s_.gpred_symbol(), {}};
    if (alt.rfind("$ground(", 0) == 0) return {s_.ground_param_symbol(alt.substr(8, alt.size() - 10)), {}};
    if (alt.rfind("$old(", 0) == 0) return {s_.old_param_symbol(alt.substr(5, alt.size() - 7)), {}};
    if (alt.front() == '[') {
      auto bar = alt.find('|');
      return {s_.tree_symbol(".", 2),
              {nt(trim(alt.substr(1, bar - 1))), nt(trim(alt.substr(bar + 1, alt.size() - bar - 2)))}};
    }
    auto open = alt.find('(');
    if (alt.rfind("$ipred$", 0) == 0) {
      auto kids = split_top(alt.substr(open + 1, alt.size() - open - 2), ',');
      modal::Production p{s_.ipred_symbol(kids.size()), {}};
      for (const auto& k : kids) p.kids.push_back(nt(trim(k)));
      return p;
    }
    if (alt.front() == '$') return {s_.builtin_symbol(alt.substr(1, alt.size() - 2)), {}};
    if (open == std::string::npos) return {s_.tree_symbol(alt, 0), {}};
    auto kids = split_top(alt.substr(open + 1, alt.size() - open - 2), ',');
    modal::Production p{s_.tree_symbol(alt.substr(0, open), kids.size()), {}};
    for (const auto& k : kids) p.kids.push_back(nt(trim(k)));
    return p;
  }
};

/// Bounded-language equality of grammars that may live in different stores.
inline bool same_language(const modal::GrammarStore& sa, modal::Grammar a, const modal::GrammarStore& sb,
                          modal::Grammar b, int depth) {
  modal::TreeTable trees;
  modal::Enumerator ea(sa, trees), eb(sb, trees);
  return ea.language(a, depth) == eb.language(b, depth);
}

inline std::vector<std::string> language_strings(const modal::GrammarStore& s, modal::Grammar g, int depth) {
  modal::TreeTable trees;
  modal::Enumerator e(s, trees);
  std::vector<std::string> out;
  for (auto t : e.language(g, depth)) out.push_back(trees.str(t));
  std::sort(out.begin(), out.end());
  return out;
}

/// Parses a type or instantiation expression in the context of a program.
inline modal::Term term_of(const std::string& text) {
  auto items = modal::read_items(text + " .");
  return items.at(0).term;
}

struct Loaded {
  modal::Program program;
  modal::GrammarStore store;
  modal::TiBuilder builder;

  explicit Loaded(const std::string& source) : program(modal::load_program(source)), builder(program, store) {}

  modal::Grammar rt(const std::string& type, const std::string& inst) {
    return builder.rt(modal::expand_type(program, term_of(type), {}),
                      modal::expand_inst(program, term_of(inst), {}));
  }
  modal::Grammar base(const std::string& type, const std::string& b) {
    return builder.base(modal::expand_type(program, term_of(type), {}), b);
  }
};

/// Splits rendered output into trimmed non-empty lines.
inline std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) {
    std::size_t b = l.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    out.push_back(l.substr(b));
  }
  return out;
}

/// The rendered text of one procedure, joined into a single line.
inline std::string procedure_text(const modal::CheckReport& rep, const std::string& name) {
  std::string out;
  bool in = false;
  for (const auto& l : lines(rep.output)) {
    if (l.rfind(name + "(", 0) == 0 || l.rfind(name + " ", 0) == 0) in = true;
    else if (l.find(":-") != std::string::npos || l.rfind("?-", 0) == 0) in = false;
    if (!in) continue;
    if (!out.empty()) out += " ";
    out += l;
  }
  return out;
}

inline int count_code(const modal::CheckReport& rep, const std::string& code) {
  int n = 0;
  for (const auto& d : rep.diagnostics)
    if (d.code == code) ++n;
  return n;
}

}  // namespace testing
