#include "polypart/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace polypart {

ParseError::ParseError(int line, int column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { ident, number, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::optional<double> optimum() const { return optimum_; }

  Token next() {
    skip_space_and_comments();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
      t.kind = Tok::ident;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < text_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return number(t);
    }
    static const char* two_char[] = {">=", "<=", "=="};
    for (const char* op : two_char) {
      if (text_.substr(pos_, 2) == op) {
        advance();
        advance();
        t.kind = Tok::symbol;
        t.text = op;
        return t;
      }
    }
    if (std::string_view(";:*^+-=").find(c) != std::string_view::npos) {
      advance();
      t.kind = Tok::symbol;
      t.text = std::string(1, c);
      return t;
    }
    throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        const int line = line_;
        const int col = col_;
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        annotation(text_.substr(start + 1, pos_ - start - 1), line, col);
      } else {
        break;
      }
    }
  }

  void annotation(std::string_view body, int line, int col) {
    std::istringstream in{std::string(body)};
    std::string key;
    in >> key;
    if (key != "optimum") return;
    std::string value;
    in >> value;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw ParseError(line, col, "non-numeric optimum annotation '" + value + "'");
    }
    optimum_ = v;
  }

  Token number(Token t) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      int save_col = col_;
      advance();
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) advance();
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      } else {
        pos_ = save;
        col_ = save_col;
      }
    }
    const std::string_view s = text_.substr(start, pos_ - start);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), t.value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError(t.line, t.column, "malformed number '" + std::string(s) + "'");
    }
    t.kind = Tok::number;
    t.text = std::string(s);
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::optional<double> optimum_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { tok_ = lex_.next(); }

  RawModel run() {
    bool maximize = false;
    bool have_objective = false;
    std::set<std::string> constraint_names;
    while (tok_.kind != Tok::end) {
      if (tok_.kind != Tok::ident) fail("expected a statement keyword");
      const Token kw = tok_;
      if (kw.text == "var") {
        shift();
        declare_continuous();
      } else if (kw.text == "bin") {
        shift();
        const Token name = expect_ident("variable name");
        add_variable(name, {name.text, VarKind::binary, 0.0, 1.0});
        expect(";");
      } else if (kw.text == "min" || kw.text == "max") {
        if (have_objective) fail("objective declared twice");
        shift();
        have_objective = true;
        maximize = kw.text == "max";
        model_.objective = expression();
        expect(";");
      } else if (kw.text == "s.t.") {
        shift();
        const Token name = expect_ident("constraint name");
        if (!constraint_names.insert(name.text).second) {
          throw ParseError(name.line, name.column, "duplicate constraint name '" + name.text + "'");
        }
        expect(":");
        RawConstraint c;
        c.name = name.text;
        c.expr = expression();
        c.rel = relation();
        c.rhs = signed_number("right-hand side");
        c.rhs -= c.expr.constant;
        c.expr.constant = 0.0;
        expect(";");
        model_.constraints.push_back(std::move(c));
      } else {
        fail("unknown statement '" + kw.text + "'");
      }
    }
    model_.reference_optimum = lex_.optimum();
    if (maximize) {
      for (auto& m : model_.objective.terms) m.coef = -m.coef;
      model_.objective.constant = -model_.objective.constant;
      canonicalize(model_.objective);
      if (model_.reference_optimum) model_.reference_optimum = -*model_.reference_optimum;
    }
    return std::move(model_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(tok_.line, tok_.column, msg); }

  void shift() { tok_ = lex_.next(); }

  bool at(const char* sym) const { return tok_.kind == Tok::symbol && tok_.text == sym; }

  void expect(const char* sym) {
    if (!at(sym)) fail(std::string("expected '") + sym + "'");
    shift();
  }

  Token expect_ident(const char* what) {
    if (tok_.kind != Tok::ident) fail(std::string("expected ") + what);
    Token t = tok_;
    shift();
    return t;
  }

  void add_variable(const Token& name, Variable v) {
    if (index_.contains(name.text)) {
      throw ParseError(name.line, name.column, "duplicate variable '" + name.text + "'");
    }
    index_[name.text] = static_cast<int>(model_.variables.size());
    model_.variables.push_back(std::move(v));
  }

  double signed_number(const char* what) {
    double sign = 1.0;
    if (at("-") || at("+")) {
      if (at("-")) sign = -1.0;
      shift();
    }
    if (tok_.kind == Tok::ident && tok_.text == "inf") {
      shift();
      return sign * kInf;
    }
    if (tok_.kind != Tok::number) fail(std::string("non-numeric ") + what);
    const double v = sign * tok_.value;
    shift();
    return v;
  }

  void declare_continuous() {
    const Token name = expect_ident("variable name");
    Variable v{name.text, VarKind::continuous, -kInf, kInf};
    while (at(">=") || at("<=")) {
      const bool lower = at(">=");
      shift();
      const double b = signed_number("bound");
      (lower ? v.lower : v.upper) = b;
    }
    if (v.lower > v.upper) {
      throw ParseError(name.line, name.column, "variable '" + name.text + "': lower bound exceeds upper bound");
    }
    expect(";");
    add_variable(name, std::move(v));
  }

  Relation relation() {
    if (at("<=")) {
      shift();
      return Relation::le;
    }
    if (at(">=")) {
      shift();
      return Relation::ge;
    }
    if (at("=") || at("==")) {
      shift();
      return Relation::eq;
    }
    fail("expected a relation (<=, >=, =)");
  }

  Expr expression() {
    Expr e;
    double sign = 1.0;
    if (at("-") || at("+")) {
      if (at("-")) sign = -1.0;
      shift();
    }
    for (;;) {
      Monomial m = product();
      m.coef *= sign;
      if (m.factors.empty()) {
        e.constant += m.coef;
      } else {
        e.terms.push_back(std::move(m));
      }
      if (at("+")) {
        sign = 1.0;
      } else if (at("-")) {
        sign = -1.0;
      } else {
        break;
      }
      shift();
    }
    canonicalize(e);
    return e;
  }

  Monomial product() {
    Monomial m;
    m.coef = 1.0;
    for (;;) {
      if (tok_.kind == Tok::number) {
        m.coef *= tok_.value;
        shift();
      } else if (tok_.kind == Tok::ident) {
        auto it = index_.find(tok_.text);
        if (it == index_.end()) fail("undeclared identifier '" + tok_.text + "'");
        const int var = it->second;
        shift();
        int power = 1;
        if (at("^")) {
          shift();
          if (tok_.kind != Tok::number || tok_.value < 1.0 || tok_.value != std::floor(tok_.value) ||
              tok_.value > 64.0) {
            fail("exponent must be a positive integer");
          }
          power = static_cast<int>(tok_.value);
          shift();
        }
        m.factors.emplace_back(var, power);
      } else {
        fail("expected a number or variable");
      }
      if (!at("*")) break;
      shift();
    }
    return m;
  }

  Lexer lex_;
  Token tok_;
  RawModel model_;
  std::unordered_map<std::string, int> index_;
};

void append_expr(std::string& out, const RawModel& m, const Expr& e) {
  bool first = true;
  auto emit_sign = [&](double coef) {
    if (first) {
      if (coef < 0) out += "-";
    } else {
      out += coef < 0 ? " - " : " + ";
    }
    first = false;
  };
  for (const auto& t : e.terms) {
    emit_sign(t.coef);
    const double mag = std::abs(t.coef);
    bool need_star = false;
    if (mag != 1.0) {
      out += format_number(mag);
      need_star = true;
    }
    for (const auto& [var, power] : t.factors) {
      if (need_star) out += "*";
      out += m.variables[static_cast<std::size_t>(var)].name;
      if (power > 1) out += "^" + std::to_string(power);
      need_star = true;
    }
  }
  if (e.constant != 0.0 || first) {
    emit_sign(e.constant);
    out += format_number(std::abs(e.constant));
  }
}

}  // namespace

RawModel parse(std::string_view text) { return Parser(text).run(); }

RawModel parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.what());
  }
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string write(const RawModel& m) {
  std::string out = "# mlt 1\n";
  if (m.reference_optimum) out += "# optimum " + format_number(*m.reference_optimum) + "\n";
  for (const auto& v : m.variables) {
    if (v.is_binary()) {
      out += "bin " + v.name + ";\n";
      continue;
    }
    out += "var " + v.name;
    if (v.lower != -kInf) out += " >= " + format_number(v.lower);
    if (v.upper != kInf) out += " <= " + format_number(v.upper);
    out += ";\n";
  }
  if (!m.objective.terms.empty() || m.objective.constant != 0.0) {
    out += "min ";
    append_expr(out, m, m.objective);
    out += ";\n";
  }
  for (const auto& c : m.constraints) {
    out += "s.t. " + c.name + ": ";
    append_expr(out, m, c.expr);
    out += std::string(" ") + to_string(c.rel) + " " + format_number(c.rhs) + ";\n";
  }
  return out;
}

std::string write(const Model& model) { return write(to_raw(model)); }

}  // namespace polypart
