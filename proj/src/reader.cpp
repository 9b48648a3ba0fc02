#include <cctype>
#include <map>

#include "modal/frontend.hpp"

namespace modal {

namespace {

enum class Tok { Atom, Var, Number, String, Punct, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  SourcePos pos;
  bool layout_before = false;
};

const std::string kSymbolChars = "+-*/\\^<>=~:.?@#&$";

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool layout = skip_layout();
      Token t = next();
      t.layout_before = layout;
      out.push_back(t);
      if (t.kind == Tok::Eof) break;
    }
    return out;
  }

 private:
  char peek(std::size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
  SourcePos here() const { return {line_, col_}; }
  char get() {
    char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  bool skip_layout() {
    bool any = false;
    for (;;) {
      char c = peek();
      if (c == '\0') return any;
      if (std::isspace(static_cast<unsigned char>(c))) {
        get();
        any = true;
      } else if (c == '%') {
        while (peek() != '\0' && peek() != '\n') get();
        any = true;
      } else if (c == '/' && peek(1) == '*') {
        SourcePos p = here();
        get();
        get();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (peek() == '\0') fail_at("P001", p, "unterminated block comment");
          get();
        }
        get();
        get();
        any = true;
      } else {
        return any;
      }
    }
  }

  Token next() {
    Token t;
    t.pos = here();
    char c = peek();
    if (c == '\0') {
      t.kind = Tok::Eof;
      return t;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      t.kind = Tok::Atom;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') t.text += get();
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Var;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') t.text += get();
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Number;
      while (std::isdigit(static_cast<unsigned char>(peek()))) t.text += get();
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        t.text += get();
        while (std::isdigit(static_cast<unsigned char>(peek()))) t.text += get();
      }
      return t;
    }
    if (c == '"') {
      t.kind = Tok::String;
      t.text += get();
      while (peek() != '"') {
        if (peek() == '\0' || peek() == '\n') fail_at("P001", t.pos, "unterminated string literal");
        if (peek() == '\\') t.text += get();
        t.text += get();
      }
      t.text += get();
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::Atom;
      get();
      while (peek() != '\'') {
        if (peek() == '\0' || peek() == '\n') fail_at("P001", t.pos, "unterminated quoted atom");
        t.text += get();
      }
      get();
      return t;
    }
    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == '|' || c == '{' || c == '}') {
      t.kind = Tok::Punct;
      t.text = std::string(1, get());
      return t;
    }
    if (c == ';' || c == '!') {
      t.kind = Tok::Atom;
      t.text = std::string(1, get());
      return t;
    }
    if (kSymbolChars.find(c) != std::string::npos) {
      if (c == '.') {
        char n = peek(1);
        if (n == '\0' || n == '%' || std::isspace(static_cast<unsigned char>(n))) {
          get();
          t.kind = Tok::End;
          return t;
        }
      }
      t.kind = Tok::Atom;
      while (kSymbolChars.find(peek()) != std::string::npos && peek() != '\0') t.text += get();
      return t;
    }
    fail_at("P001", t.pos, std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

enum class Assoc { XFX, XFY, YFX, FY, FX };

struct OpDef {
  int prec;
  Assoc assoc;
};

const std::map<std::string, OpDef>& infix_ops() {
  static const std::map<std::string, OpDef> ops = {
      {":-", {1200, Assoc::XFX}}, {"deriving", {1150, Assoc::XFX}}, {";", {1100, Assoc::XFY}},
      {"->", {1050, Assoc::XFY}}, {",", {1000, Assoc::XFY}},        {"=", {700, Assoc::XFX}},
      {"\\=", {700, Assoc::XFX}}, {"==", {700, Assoc::XFX}},        {"<", {700, Assoc::XFX}},
      {">", {700, Assoc::XFX}},   {"=<", {700, Assoc::XFX}},        {">=", {700, Assoc::XFX}},
      {"is", {700, Assoc::XFX}},  {"+", {500, Assoc::YFX}},         {"-", {500, Assoc::YFX}},
      {"*", {400, Assoc::YFX}},   {"/", {400, Assoc::YFX}},
  };
  return ops;
}

const std::map<std::string, OpDef>& prefix_ops() {
  static const std::map<std::string, OpDef> ops = {
      {":-", {1200, Assoc::FX}},      {"?-", {1200, Assoc::FX}},    {"typedef", {1150, Assoc::FY}},
      {"instdef", {1150, Assoc::FY}}, {"modedef", {1150, Assoc::FY}}, {"pred", {1150, Assoc::FY}},
      {"mode", {1150, Assoc::FY}},    {"\\+", {900, Assoc::FY}},    {"-", {200, Assoc::FY}},
  };
  return ops;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<RawItem> run() {
    std::vector<RawItem> out;
    while (cur().kind != Tok::Eof) {
      SourcePos p = cur().pos;
      Term t = parse(1200, true).first;
      if (cur().kind != Tok::End) error("expected '.' at end of clause");
      ++i_;
      RawItem item;
      item.pos = p;
      if (t.is(":-", 1)) {
        item.kind = RawItem::Kind::Directive;
        item.term = t.args[0];
      } else if (t.is("?-", 1)) {
        item.kind = RawItem::Kind::Query;
        item.term = t.args[0];
      } else {
        item.kind = RawItem::Kind::Clause;
        item.term = t;
      }
      out.push_back(std::move(item));
    }
    return out;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& peek(std::size_t k) const {
    return i_ + k < toks_.size() ? toks_[i_ + k] : toks_.back();
  }
  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = cur();
    std::string near = t.kind == Tok::Eof ? "end of file" : t.kind == Tok::End ? "'.'" : "'" + t.text + "'";
    fail_at("P001", t.pos, msg + " near " + near);
  }
  bool is_punct(const std::string& s) const { return cur().kind == Tok::Punct && cur().text == s; }
  void expect_punct(const std::string& s) {
    if (!is_punct(s)) error("expected '" + s + "'");
    ++i_;
  }

  bool starts_term(const Token& t) const {
    switch (t.kind) {
      case Tok::Atom:
        return infix_ops().count(t.text) == 0 || prefix_ops().count(t.text) != 0;
      case Tok::Var:
      case Tok::Number:
      case Tok::String: return true;
      case Tok::Punct: return t.text == "(" || t.text == "[" || t.text == "{";
      default: return false;
    }
  }

  std::string fresh_anon() { return "_" + std::to_string(++anon_); }

  std::pair<Term, int> parse(int max_prec, bool allow_comma) {
    auto [left, left_prec] = parse_primary(max_prec, allow_comma);
    for (;;) {
      const Token& t = cur();
      std::string name;
      if (t.kind == Tok::Atom && infix_ops().count(t.text)) {
        name = t.text;
      } else if (t.kind == Tok::Punct && t.text == "," && allow_comma) {
        name = ",";
      } else if (t.kind == Tok::Punct && t.text == "|" && allow_comma) {
        name = ";";
      } else {
        break;
      }
      OpDef op = infix_ops().at(name);
      if (op.prec > max_prec) break;
      int left_max = op.assoc == Assoc::YFX ? op.prec : op.prec - 1;
      if (left_prec > left_max) break;
      int right_max = op.assoc == Assoc::XFY ? op.prec : op.prec - 1;
      SourcePos p = t.pos;
      ++i_;
      Term right = parse(right_max, allow_comma).first;
      left = Term::app(name, {left, right}, p);
      left_prec = op.prec;
    }
    return {left, left_prec};
  }

  std::vector<Term> parse_args() {
    std::vector<Term> args;
    expect_punct("(");
    for (;;) {
      args.push_back(parse(1200, false).first);
      if (is_punct(",")) {
        ++i_;
        continue;
      }
      expect_punct(")");
      return args;
    }
  }

  Term parse_list(SourcePos p) {
    std::vector<Term> items;
    for (;;) {
      items.push_back(parse(1200, false).first);
      if (is_punct(",")) {
        ++i_;
        continue;
      }
      break;
    }
    Term tail = Term::atom("[]", p);
    if (is_punct("|")) {
      ++i_;
      tail = parse(1200, false).first;
    }
    expect_punct("]");
    for (auto it = items.rbegin(); it != items.rend(); ++it) tail = Term::app(".", {*it, tail}, it->pos);
    return tail;
  }

  std::pair<Term, int> parse_primary(int max_prec, bool allow_comma) {
    const Token t = cur();
    switch (t.kind) {
      case Tok::Number:
        ++i_;
        return {Term::atom(t.text, t.pos), 0};
      case Tok::String:
        ++i_;
        return {Term::atom(t.text, t.pos), 0};
      case Tok::Var:
        ++i_;
        return {Term::var(t.text == "_" ? fresh_anon() : t.text, t.pos), 0};
      case Tok::Punct:
        if (t.text == "(") {
          ++i_;
          Term inner = parse(1200, true).first;
          expect_punct(")");
          return {inner, 0};
        }
        if (t.text == "[") {
          ++i_;
          if (is_punct("]")) {
            ++i_;
            return {Term::atom("[]", t.pos), 0};
          }
          return {parse_list(t.pos), 0};
        }
        error("unexpected token");
      case Tok::Atom: {
        ++i_;
        if (is_punct("(") && !cur().layout_before) return {Term::app(t.text, parse_args(), t.pos), 0};
        if (t.text == "-" && cur().kind == Tok::Number && !cur().layout_before) {
          Token n = cur();
          ++i_;
          return {Term::atom("-" + n.text, t.pos), 0};
        }
        auto pit = prefix_ops().find(t.text);
        if (pit != prefix_ops().end() && starts_term(cur())) {
          OpDef op = pit->second;
          int prec = op.prec;
          if (prec > max_prec) prec = 999;
          int arg_max = op.assoc == Assoc::FY ? prec : prec - 1;
          Term arg = parse(arg_max, allow_comma).first;
          return {Term::app(t.text, {arg}, t.pos), prec};
        }
        return {Term::atom(t.text, t.pos), 0};
      }
      case Tok::End: error("unexpected end of clause");
      case Tok::Eof: error("unexpected end of file");
    }
    error("unexpected token");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  int anon_ = 0;
};

}  // namespace

std::vector<RawItem> read_items(const std::string& source) {
  Lexer lx(source);
  Parser ps(lx.run());
  return ps.run();
}

}  // namespace modal
