#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "cairo/rules/rules.hpp"

namespace cairo {

namespace {

std::string join_rule_diags(const std::vector<RuleDiagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (d.severity != "error") continue;
    if (!out.empty()) out += "; ";
    if (!d.rule_id.empty()) out += d.rule_id + ": ";
    if (d.line > 0) out += std::to_string(d.line) + ":" + std::to_string(d.col) + ": ";
    out += d.message;
  }
  return out;
}

enum class Tok { Name, Var, Number, String, LParen, RParen, Comma, And, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

class Lexer {
 public:
  Lexer(std::string_view s, int line_offset) : s_(s), line_(1 + line_offset) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      int line = line_, col = col_;
      if (pos_ >= s_.size()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      char c = s_[pos_];
      if (match("\xE2\x88\xA7")) {  // U+2227 LOGICAL AND
        out.push_back({Tok::And, "^", line, col});
      } else if (match("\xE2\x86\x92")) {  // U+2192 RIGHTWARDS ARROW
        out.push_back({Tok::Arrow, "->", line, col});
      } else if (match("->")) {
        out.push_back({Tok::Arrow, "->", line, col});
      } else if (c == '^') {
        advance(1);
        out.push_back({Tok::And, "^", line, col});
      } else if (c == '(') {
        advance(1);
        out.push_back({Tok::LParen, "(", line, col});
      } else if (c == ')') {
        advance(1);
        out.push_back({Tok::RParen, ")", line, col});
      } else if (c == ',') {
        advance(1);
        out.push_back({Tok::Comma, ",", line, col});
      } else if (c == '?') {
        advance(1);
        std::string name = ident();
        if (name.empty()) throw error(line, col, "expected a variable name after '?'");
        out.push_back({Tok::Var, name, line, col});
      } else if (c == '"') {
        out.push_back({Tok::String, string_lit(line, col), line, col});
      } else if (c == '-' || c == '+' || (c >= '0' && c <= '9') || c == '.') {
        out.push_back({Tok::Number, number(line, col), line, col});
      } else if (is_alpha(c)) {
        std::string name = ident();
        if (pos_ < s_.size() && s_[pos_] == ':') {
          advance(1);
          std::string local = ident();
          if (local.empty()) throw error(line_, col_, "expected a local name after ':'");
          name += ":" + local;
        }
        out.push_back({Tok::Name, name, line, col});
      } else {
        throw error(line, col, "unexpected character '" + std::string(codepoint()) + "'");
      }
    }
  }

  static RuleError error(int line, int col, const std::string& msg) {
    return RuleError({{"error", "SyntaxError", msg, line, col, {}}});
  }

 private:
  static bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
  static bool is_alnum(char c) { return is_alpha(c) || (c >= '0' && c <= '9'); }

  std::string_view codepoint() const {
    std::size_t n = 1;
    auto u = static_cast<unsigned char>(s_[pos_]);
    if (u >= 0xF0) n = 4;
    else if (u >= 0xE0) n = 3;
    else if (u >= 0xC0) n = 2;
    return s_.substr(pos_, n);
  }

  void advance(std::size_t bytes) {
    std::size_t end = std::min(s_.size(), pos_ + bytes);
    while (pos_ < end) {
      auto u = static_cast<unsigned char>(s_[pos_]);
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((u & 0xC0) != 0x80) {
        ++col_;
      }
      ++pos_;
    }
  }

  bool match(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) return false;
    advance(lit.size());
    return true;
  }

  void skip_space() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') advance(1);
      else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance(1);
      } else break;
    }
  }

  std::string ident() {
    std::size_t start = pos_;
    if (pos_ < s_.size() && is_alpha(s_[pos_])) {
      while (pos_ < s_.size() && is_alnum(s_[pos_])) advance(1);
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string number(int line, int col) {
    std::size_t start = pos_;
    if (s_[pos_] == '-' || s_[pos_] == '+') {
      if (s_[pos_] == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') throw error(line, col, "unexpected '->'");
      advance(1);
    }
    bool digits = false;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') advance(1), digits = true;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      advance(1);
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') advance(1), digits = true;
    }
    if (digits && pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      advance(1);
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) advance(1);
      bool exp = false;
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') advance(1), exp = true;
      if (!exp) throw error(line, col, "malformed number exponent");
    }
    if (!digits) throw error(line, col, "malformed number");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string string_lit(int line, int col) {
    advance(1);
    std::string out;
    while (true) {
      if (pos_ >= s_.size() || s_[pos_] == '\n') throw error(line, col, "unterminated string literal");
      char c = s_[pos_];
      if (c == '"') {
        advance(1);
        return out;
      }
      if (c == '\\') {
        advance(1);
        if (pos_ >= s_.size()) throw error(line, col, "unterminated string literal");
        out += s_[pos_];
        advance(1);
        continue;
      }
      out += c;
      advance(1);
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  int col_ = 1;
};

DataValue number_value(const Token& t) {
  bool is_decimal = t.text.find_first_of(".eE") != std::string::npos;
  const char* b = t.text.data() + (t.text[0] == '+' ? 1 : 0);
  const char* e = t.text.data() + t.text.size();
  if (is_decimal) {
    double d = 0;
    auto r = std::from_chars(b, e, d);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(d))
      throw Lexer::error(t.line, t.col, "number '" + t.text + "' is not a finite decimal");
    return DataValue::decimal(d);
  }
  std::int64_t i = 0;
  auto r = std::from_chars(b, e, i);
  if (r.ec != std::errc() || r.ptr != e) throw Lexer::error(t.line, t.col, "integer '" + t.text + "' out of range");
  return DataValue::integer(i);
}

struct RawArg {
  Token tok;
};

struct RawAtom {
  Token pred;
  std::vector<Token> args;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const TBox& tbox) : t_(std::move(toks)), tbox_(tbox) {}

  // Returns body, head and whether an arrow was present.
  void run(std::vector<RawAtom>& body, std::vector<RawAtom>& head, bool& arrow) {
    std::vector<RawAtom>* cur = &body;
    arrow = false;
    if (peek().kind == Tok::End) throw Lexer::error(peek().line, peek().col, "empty rule");
    cur->push_back(atom());
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::And) {
        next();
        // a dangling connective right before the arrow is tolerated
        if (peek().kind == Tok::Arrow && !arrow) continue;
        cur->push_back(atom());
      } else if (t.kind == Tok::Arrow) {
        if (arrow) throw Lexer::error(t.line, t.col, "second '->' in rule");
        next();
        arrow = true;
        cur = &head;
        cur->push_back(atom());
      } else {
        throw Lexer::error(t.line, t.col, "expected '^', '->' or end of rule, found '" + t.text + "'");
      }
    }
  }

 private:
  const Token& peek() const { return t_[i_]; }
  const Token& next() { return t_[i_++]; }

  const Token& expect(Tok k, const char* what) {
    const Token& t = peek();
    if (t.kind != k)
      throw Lexer::error(t.line, t.col, std::string("expected ") + what + (t.kind == Tok::End ? ", found end of rule" : ", found '" + t.text + "'"));
    return next();
  }

  RawAtom atom() {
    RawAtom a;
    a.pred = expect(Tok::Name, "an atom");
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      while (true) {
        const Token& t = peek();
        if (t.kind != Tok::Var && t.kind != Tok::Name && t.kind != Tok::Number && t.kind != Tok::String)
          throw Lexer::error(t.line, t.col, "expected an argument" + (t.kind == Tok::End ? std::string() : ", found '" + t.text + "'"));
        a.args.push_back(next());
        if (peek().kind == Tok::Comma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "')' or ','");
    return a;
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
  const TBox& tbox_;
};

class Resolver {
 public:
  Resolver(const TBox& tbox, std::string rule_id) : tbox_(tbox), rule_id_(std::move(rule_id)) {}

  Atom resolve(const RawAtom& a, bool in_head) {
    const Token& p = a.pred;
    const std::string& name = p.text;
    if (name == "differentFrom" || name == "owl:differentFrom" || name == "swrl:differentFrom") {
      arity(a, 2);
      if (in_head) head_error(p);
      return DifferentFromAtom{individual_term(a.args[0]), individual_term(a.args[1])};
    }
    QName q = qname(p);
    if (q.prefix == "sqwrl") {
      if (q.local != "select") unknown(p, "unsupported SQWRL built-in '" + name + "'");
      if (a.args.empty()) throw Lexer::error(p.line, p.col, "sqwrl:select needs at least one variable");
      SelectAtom s;
      for (const auto& t : a.args) {
        if (t.kind != Tok::Var) throw Lexer::error(t.line, t.col, "sqwrl:select arguments must be variables");
        s.vars.push_back(Var{t.text});
      }
      return s;
    }
    if (q.prefix == "swrb") {
      auto op = builtin_from_name(q.local);
      if (!op) unknown(p, "unknown built-in '" + name + "'");
      arity(a, 2);
      if (in_head) head_error(p);
      return BuiltinAtom{*op, data_term(a.args[0]), data_term(a.args[1])};
    }
    if (tbox_.is_concept(q)) {
      arity(a, 1);
      return ClassAtom{q, individual_term(a.args[0])};
    }
    if (const RoleDef* r = tbox_.role(q)) {
      arity(a, 2);
      if (in_head) head_error(p);
      if (r->kind == RoleKind::Object)
        return ObjectPropAtom{q, individual_term(a.args[0]), individual_term(a.args[1])};
      return DataPropAtom{q, individual_term(a.args[0]), data_term(a.args[1])};
    }
    unknown(p, "unknown concept or role '" + q.str() + "'");
  }

 private:
  [[noreturn]] void unknown(const Token& t, const std::string& msg) {
    throw RuleError({{"error", "UnknownName", msg, t.line, t.col, rule_id_}});
  }

  [[noreturn]] void head_error(const Token& t) {
    throw Lexer::error(t.line, t.col, "only class atoms and sqwrl:select may appear in a rule head");
  }

  void arity(const RawAtom& a, std::size_t n) {
    if (a.args.size() != n)
      throw Lexer::error(a.pred.line, a.pred.col,
                         a.pred.text + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + ", got " +
                             std::to_string(a.args.size()));
  }

  QName qname(const Token& t) {
    try {
      return tbox_.namespaces.resolve(t.text);
    } catch (const Error& e) {
      unknown(t, e.what());
    }
  }

  Term individual_term(const Token& t) {
    if (t.kind == Tok::Var) return Var{t.text};
    if (t.kind != Tok::Name || t.text == "true" || t.text == "false")
      throw Lexer::error(t.line, t.col, "expected a variable or individual name, found '" + t.text + "'");
    QName q = qname(t);
    if (tbox_.is_concept(q) || tbox_.role(q))
      throw RuleError({{"error", "KindConflict", "'" + q.str() + "' is a concept or role, not an individual", t.line,
                        t.col, rule_id_}});
    return q;
  }

  Term data_term(const Token& t) {
    switch (t.kind) {
      case Tok::Var: return Var{t.text};
      case Tok::Number: return number_value(t);
      case Tok::String: return DataValue::string(t.text);
      case Tok::Name:
        if (t.text == "true") return DataValue::boolean(true);
        if (t.text == "false") return DataValue::boolean(false);
        return DataValue::enum_token(qname(t));
      default: throw Lexer::error(t.line, t.col, "expected a value");
    }
  }

  const TBox& tbox_;
  std::string rule_id_;
};

}  // namespace

RuleError::RuleError(std::vector<RuleDiagnostic> diags)
    : Error(diags.empty() ? "RuleError" : diags.front().code, join_rule_diags(diags)), diags_(std::move(diags)) {}

Rule parse_rule(std::string_view text, const TBox& tbox, std::string id, std::string label, int line_offset) {
  auto tag = [&](RuleError e) {
    auto d = e.diagnostics();
    for (auto& x : d) x.rule_id = id;
    return RuleError(std::move(d));
  };
  try {
    auto toks = Lexer(text, line_offset).run();
    std::vector<RawAtom> raw_body, raw_head;
    bool arrow = false;
    Parser(toks, tbox).run(raw_body, raw_head, arrow);
    if (!arrow) {
      // SQWRL query form: trailing select atoms joined with '^' act as the head.
      while (!raw_body.empty()) {
        const auto& p = raw_body.back().pred.text;
        if (p != "sqwrl:select") break;
        raw_head.insert(raw_head.begin(), raw_body.back());
        raw_body.pop_back();
      }
      if (raw_head.empty()) {
        const Token& end = toks.back();
        throw Lexer::error(end.line, end.col, "expected '->' followed by a rule head");
      }
    }
    if (raw_body.empty()) {
      const Token& t = toks.front();
      throw Lexer::error(t.line, t.col, "rule body is empty");
    }
    Rule rule;
    rule.id = id;
    rule.label = label;
    Resolver res(tbox, id);
    for (const auto& a : raw_body) {
      if (a.pred.text == "sqwrl:select")
        throw Lexer::error(a.pred.line, a.pred.col, "sqwrl:select may only appear in the head");
      rule.body.push_back(res.resolve(a, false));
    }
    for (const auto& a : raw_head) rule.head.push_back(res.resolve(a, true));

    auto body = rule.body_vars();
    std::vector<std::string> unsafe;
    for (const auto& v : rule.head_vars())
      if (!body.count(v)) unsafe.push_back("?" + v.name);
    if (!unsafe.empty()) {
      std::string list;
      for (const auto& u : unsafe) list += (list.empty() ? "" : ", ") + u;
      throw RuleError({{"error", "UnsafeRule", "head variable(s) not bound in the body: " + list,
                        raw_head.front().pred.line, raw_head.front().pred.col, id}});
    }
    return rule;
  } catch (const RuleError& e) {
    throw tag(e);
  }
}

RulePack parse_rule_pack(std::string_view text, const TBox& tbox) {
  RulePack pack;
  std::vector<RuleDiagnostic> errors;
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };
  auto fail = [&](int line, const std::string& msg) { errors.push_back({"error", "SyntaxError", msg, line, 1, {}}); };

  std::set<std::string> ids;
  std::size_t i = 0;
  while (i < lines.size()) {
    auto line = trim(lines[i]);
    int lineno = static_cast<int>(i) + 1;
    if (line.empty() || line.front() == '#') {
      ++i;
      continue;
    }
    if (line.substr(0, 5) == "pack ") {
      pack.id = std::string(trim(line.substr(5)));
      ++i;
      continue;
    }
    if (line.substr(0, 8) == "version ") {
      pack.version = std::string(trim(line.substr(8)));
      ++i;
      continue;
    }
    if (line.substr(0, 5) != "rule ") {
      fail(lineno, "expected 'rule <ID> \"<label>\"'");
      ++i;
      continue;
    }
    auto rest = trim(line.substr(5));
    auto sp = rest.find_first_of(" \t");
    std::string id(rest.substr(0, sp));
    std::string label;
    if (sp != std::string_view::npos) {
      auto l = trim(rest.substr(sp));
      if (l.size() < 2 || l.front() != '"' || l.back() != '"') {
        fail(lineno, "rule label must be a double-quoted string");
      } else {
        for (std::size_t k = 1; k + 1 < l.size(); ++k) {
          if (l[k] == '\\' && k + 2 < l.size()) ++k;
          label += l[k];
        }
      }
    }
    if (!is_valid_local_name(id)) fail(lineno, "invalid rule id '" + id + "'");
    if (!ids.insert(id).second) errors.push_back({"error", "DuplicateRule", "duplicate rule id '" + id + "'", lineno, 1, id});
    ++i;
    std::size_t start = i;
    std::string body;
    while (i < lines.size()) {
      auto l = trim(lines[i]);
      if (l.empty() || l.substr(0, 5) == "rule ") break;
      body += std::string(lines[i]) + "\n";
      ++i;
    }
    if (trim(body).empty()) {
      errors.push_back({"error", "SyntaxError", "rule '" + id + "' has no text", lineno, 1, id});
      continue;
    }
    try {
      pack.rules.push_back(parse_rule(body, tbox, id, label, static_cast<int>(start)));
    } catch (const RuleError& e) {
      errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
    }
  }
  if (!errors.empty()) throw RuleError(errors);
  return pack;
}

}  // namespace cairo
