// Textual model language: lexer, recursive-descent parser, serializer.
//
//   param NAME = NUMBER [coverage] ;
//   state INT "label" class = operational|fail_operational|fail_safe|fail_unsafe ;
//   trans INT -> INT rate = EXPR [kind = failure|repair] ;
//   init INT = NUMBER ;
//   option horizon = NUMBER ;
//
// EXPR is built from numbers, parameter names, + - * and parentheses.
// `#` starts a comment that runs to the end of the line.
#ifndef DEPMARK_LANG_HPP
#define DEPMARK_LANG_HPP

#include <algorithm>
#include <charconv>
#include <climits>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "validate.hpp"

namespace depmark {

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in bytes
  int length = 0;
};

struct ParseError {
  enum class Kind { kLexical, kSyntactic, kSemantic };
  SourceSpan span;
  std::string message;
  Kind kind = Kind::kSyntactic;
};

inline std::string format_parse_error(const ParseError& e) {
  std::ostringstream os;
  os << e.span.line << ":" << e.span.column << ": "
     << (e.kind == ParseError::Kind::kLexical     ? "lexical"
         : e.kind == ParseError::Kind::kSyntactic ? "syntax"
                                                  : "semantic")
     << " error: " << e.message;
  return os.str();
}

class ParseFailure : public Error {
 public:
  explicit ParseFailure(std::vector<ParseError> errors)
      : Error(errors.empty() ? "parse failed" : format_parse_error(errors.front())),
        errors_(std::move(errors)) {}
  const std::vector<ParseError>& errors() const noexcept { return errors_; }

 private:
  std::vector<ParseError> errors_;
};

/// A parsed model plus the source span of each statement, keyed by the
/// same subject strings validation findings use.
struct ParsedDocument {
  MarkovModel model;
  std::map<std::string, SourceSpan> spans;
};

namespace detail {

enum class Tok {
  kIdent, kNumber, kString, kSemi, kEquals, kArrow, kPlus, kMinus, kStar,
  kLParen, kRParen, kEnd, kInvalid
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;  // identifier name, decoded string, or number spelling
  double number = 0.0;
  bool integral = false;
  SourceSpan span;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kIdent: return "identifier '" + t.text + "'";
    case Tok::kNumber: return "number '" + t.text + "'";
    case Tok::kString: return "string \"" + t.text + "\"";
    case Tok::kSemi: return "';'";
    case Tok::kEquals: return "'='";
    case Tok::kArrow: return "'->'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kEnd: return "end of input";
    case Tok::kInvalid: return "invalid token";
  }
  return "token";
}

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<ParseError>& errors) : src_(src), errors_(errors) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      if (t.kind == Tok::kInvalid) continue;
      out.push_back(std::move(t));
      if (out.back().kind == Tok::kEnd) break;
    }
    return out;
  }

 private:
  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && pos_ < src_.size(); ++k) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void error(SourceSpan span, std::string msg) {
    errors_.push_back({span, std::move(msg), ParseError::Kind::kLexical});
  }

  Token next() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
    Token t;
    t.span = {line_, col_, 0};
    std::size_t start = pos_;
    auto finish = [&](Tok kind) {
      t.kind = kind;
      t.span.length = static_cast<int>(pos_ - start);
      return t;
    };
    if (pos_ >= src_.size()) return finish(Tok::kEnd);

    char c = peek();
    if (ident_start(c)) {
      while (ident_start(peek()) || digit(peek())) advance();
      t.text = std::string(src_.substr(start, pos_ - start));
      return finish(Tok::kIdent);
    }
    if (digit(c) || (c == '.' && digit(peek(1)))) return number(t, start);
    if (c == '"') return string(t, start);
    switch (c) {
      case ';': advance(); return finish(Tok::kSemi);
      case '=': advance(); return finish(Tok::kEquals);
      case '+': advance(); return finish(Tok::kPlus);
      case '*': advance(); return finish(Tok::kStar);
      case '(': advance(); return finish(Tok::kLParen);
      case ')': advance(); return finish(Tok::kRParen);
      case '-':
        if (peek(1) == '>') {
          advance(2);
          return finish(Tok::kArrow);
        }
        advance();
        return finish(Tok::kMinus);
      default: break;
    }
    // U+2212 MINUS SIGN is accepted as '-'.
    if (src_.substr(pos_, 3) == "\xE2\x88\x92") {
      advance(3);
      return finish(Tok::kMinus);
    }
    advance();
    t.span.length = 1;
    error(t.span, std::string("unexpected character '") +
                      (static_cast<unsigned char>(c) < 0x80 && c >= 0x20 ? std::string(1, c)
                                                                         : std::string("\\x") +
                                                                               hex(c)) +
                      "'");
    t.kind = Tok::kInvalid;
    return t;
  }

  static std::string hex(char c) {
    static const char* digits = "0123456789ABCDEF";
    auto u = static_cast<unsigned char>(c);
    return {digits[u >> 4], digits[u & 15]};
  }

  Token number(Token& t, std::size_t start) {
    bool integral = true;
    while (digit(peek())) advance();
    if (peek() == '.') {
      integral = false;
      advance();
      while (digit(peek())) advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
      integral = false;
      advance(2);
      while (digit(peek())) advance();
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    t.integral = integral;
    t.span.length = static_cast<int>(pos_ - start);
    const char* b = src_.data() + start;
    const char* e = src_.data() + pos_;
    auto res = std::from_chars(b, e, t.number);
    if (res.ec != std::errc() || res.ptr != e) {
      error(t.span, "number '" + t.text + "' is out of range");
      t.kind = Tok::kInvalid;
      return t;
    }
    t.kind = Tok::kNumber;
    return t;
  }

  Token string(Token& t, std::size_t start) {
    advance();  // opening quote
    for (;;) {
      char c = peek();
      if (pos_ >= src_.size() || c == '\n') {
        t.span.length = static_cast<int>(pos_ - start);
        error(t.span, "unterminated string literal");
        t.kind = Tok::kInvalid;
        return t;
      }
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\' && (peek(1) == '"' || peek(1) == '\\')) {
        t.text += peek(1);
        advance(2);
        continue;
      }
      t.text += c;
      advance();
    }
    t.span.length = static_cast<int>(pos_ - start);
    t.kind = Tok::kString;
    return t;
  }

  std::string_view src_;
  std::vector<ParseError>& errors_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<ParseError>& errors)
      : toks_(std::move(toks)), errors_(errors) {}

  ParsedDocument run() {
    ParsedDocument doc;
    while (cur().kind != Tok::kEnd) {
      SourceSpan start = cur().span;
      try {
        statement(doc, start);
      } catch (const Recover&) {
        // skip to the end of the broken statement
        while (cur().kind != Tok::kEnd && cur().kind != Tok::kSemi) ++pos_;
        if (cur().kind == Tok::kSemi) ++pos_;
      }
    }
    if (!saw_init_) default_initial(doc);
    std::sort(doc.model.states.begin(), doc.model.states.end(),
              [](const State& a, const State& b) { return a.id < b.id; });
    return doc;
  }

 private:
  struct Recover {};

  const Token& cur() const { return toks_[pos_]; }

  [[noreturn]] void fail(const Token& at, const std::string& msg) {
    errors_.push_back({at.span, msg, ParseError::Kind::kSyntactic});
    throw Recover{};
  }
  void semantic(SourceSpan span, std::string msg) {
    errors_.push_back({span, std::move(msg), ParseError::Kind::kSemantic});
  }

  const Token& expect(Tok kind, const char* what) {
    if (cur().kind != kind) fail(cur(), std::string("expected ") + what + ", found " + describe(cur()));
    return toks_[pos_++];
  }
  void keyword(std::string_view kw) {
    if (cur().kind != Tok::kIdent || cur().text != kw)
      fail(cur(), "expected '" + std::string(kw) + "', found " + describe(cur()));
    ++pos_;
  }
  bool at_keyword(std::string_view kw) const {
    return cur().kind == Tok::kIdent && cur().text == kw;
  }

  int state_id() {
    const Token& t = expect(Tok::kNumber, "state id");
    if (!t.integral || t.number < 1 || t.number > INT_MAX)
      fail(t, "state id must be a positive integer, found " + describe(t));
    return static_cast<int>(t.number);
  }

  SourceSpan close(SourceSpan start) {
    const Token& semi = expect(Tok::kSemi, "';'");
    SourceSpan s = start;
    if (semi.span.line == start.line)
      s.length = semi.span.column + semi.span.length - start.column;
    else
      s.length = start.length;
    return s;
  }

  void statement(ParsedDocument& doc, SourceSpan start) {
    if (cur().kind != Tok::kIdent) fail(cur(), "expected a statement, found " + describe(cur()));
    std::string kw = cur().text;
    MarkovModel& m = doc.model;
    if (kw == "param") {
      ++pos_;
      Token name = expect(Tok::kIdent, "parameter name");
      expect(Tok::kEquals, "'='");
      double value = expect(Tok::kNumber, "number").number;
      bool coverage = false;
      if (at_keyword("coverage")) {
        ++pos_;
        coverage = true;
      }
      SourceSpan span = close(start);
      if (m.params.count(name.text)) {
        semantic(name.span, "duplicate parameter '" + name.text + "'");
        return;
      }
      m.params[name.text] = value;
      if (coverage) m.coverage_params.insert(name.text);
      doc.spans["param:" + name.text] = span;
    } else if (kw == "state") {
      ++pos_;
      SourceSpan id_span = cur().span;
      int id = state_id();
      Token label = expect(Tok::kString, "state label");
      keyword("class");
      expect(Tok::kEquals, "'='");
      Token cls_tok = expect(Tok::kIdent, "state class");
      auto cls = state_class_from(cls_tok.text);
      if (!cls)
        fail(cls_tok, "unknown state class '" + cls_tok.text +
                          "' (expected operational, fail_operational, fail_safe or fail_unsafe)");
      SourceSpan span = close(start);
      if (label.text.empty()) semantic(label.span, "state label must not be empty");
      if (m.index_of(id)) {
        semantic(id_span, "duplicate state id " + std::to_string(id));
        return;
      }
      m.states.push_back({id, label.text, *cls});
      doc.spans["state:" + std::to_string(id)] = span;
    } else if (kw == "trans") {
      ++pos_;
      Transition tr;
      tr.from = state_id();
      expect(Tok::kArrow, "'->'");
      tr.to = state_id();
      keyword("rate");
      expect(Tok::kEquals, "'='");
      tr.rate = expr();
      if (at_keyword("kind")) {
        ++pos_;
        expect(Tok::kEquals, "'='");
        Token k = expect(Tok::kIdent, "transition kind");
        if (k.text == "failure")
          tr.kind = TransitionKind::kFailure;
        else if (k.text == "repair")
          tr.kind = TransitionKind::kRepair;
        else
          fail(k, "unknown transition kind '" + k.text + "' (expected failure or repair)");
      }
      SourceSpan span = close(start);
      doc.spans["trans:" + std::to_string(m.transitions.size())] = span;
      m.transitions.push_back(std::move(tr));
    } else if (kw == "init") {
      ++pos_;
      SourceSpan id_span = cur().span;
      int id = state_id();
      expect(Tok::kEquals, "'='");
      double p = expect(Tok::kNumber, "probability").number;
      SourceSpan span = close(start);
      saw_init_ = true;
      if (!doc.spans.count("init")) doc.spans["init"] = span;
      if (m.initial.count(id)) {
        semantic(id_span, "duplicate init for state " + std::to_string(id));
        return;
      }
      m.initial[id] = p;
      init_refs_.emplace_back(id, id_span);
      doc.spans["init:" + std::to_string(id)] = span;
    } else if (kw == "option") {
      ++pos_;
      Token name = expect(Tok::kIdent, "option name");
      expect(Tok::kEquals, "'='");
      double value = expect(Tok::kNumber, "number").number;
      close(start);
      if (name.text != "horizon") {
        semantic(name.span, "unknown option '" + name.text + "'");
        return;
      }
      m.horizon = value;
    } else {
      fail(cur(), "expected param, state, trans, init or option, found " + describe(cur()));
    }
  }

 public:
  /// Semantic checks needing the whole document.
  void finish(ParsedDocument& doc) {
    for (const auto& [id, span] : init_refs_)
      if (!doc.model.index_of(id))
        semantic(span, "init references unknown state " + std::to_string(id));
  }

 private:
  RateExpr expr() {
    RateExpr lhs = term();
    for (;;) {
      if (cur().kind == Tok::kPlus) {
        ++pos_;
        lhs = std::move(lhs) + term();
      } else if (cur().kind == Tok::kMinus) {
        ++pos_;
        lhs = std::move(lhs) - term();
      } else {
        return lhs;
      }
    }
  }
  RateExpr term() {
    RateExpr lhs = factor();
    while (cur().kind == Tok::kStar) {
      ++pos_;
      lhs = std::move(lhs) * factor();
    }
    return lhs;
  }
  RateExpr factor() {
    const Token& t = cur();
    if (t.kind == Tok::kNumber) {
      ++pos_;
      return RateExpr::constant(t.number);
    }
    if (t.kind == Tok::kIdent) {
      ++pos_;
      return RateExpr::param(t.text);
    }
    if (t.kind == Tok::kLParen) {
      ++pos_;
      if (++depth_ > 256) fail(t, "expression nested too deeply");
      RateExpr e = expr();
      --depth_;
      expect(Tok::kRParen, "')'");
      return e;
    }
    fail(t, "expected a number, parameter name or '(', found " + describe(t));
  }

  void default_initial(ParsedDocument& doc) {
    const State* best = nullptr;
    for (const auto& s : doc.model.states)
      if (s.cls == StateClass::kOperational && (!best || s.id < best->id)) best = &s;
    if (best) doc.model.initial[best->id] = 1.0;
  }

  std::vector<Token> toks_;
  std::vector<ParseError>& errors_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  bool saw_init_ = false;
  std::vector<std::pair<int, SourceSpan>> init_refs_;
};

// Span of the last byte of `text`.
inline SourceSpan end_span(std::string_view text) {
  SourceSpan s{1, 1, 0};
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '\n') {
      ++s.line;
      s.column = 1;
    } else {
      ++s.column;
    }
  }
  if (!text.empty()) s.length = 1;
  return s;
}

}  // namespace detail

/// Lexes and parses without model-level validation. Throws ParseFailure for
/// lexical and syntax errors and for duplicate state ids, duplicate
/// parameters, and init statements naming unknown states. With no `init`
/// statement the lowest-id operational state gets probability 1.
inline ParsedDocument parse_document(std::string_view text) {
  std::vector<ParseError> errors;
  auto toks = detail::Lexer(text, errors).run();
  // An unexpected end of input points at the last byte of the document.
  if (toks.back().span.length == 0 && !text.empty()) toks.back().span = detail::end_span(text);
  detail::Parser parser(std::move(toks), errors);
  ParsedDocument doc = parser.run();
  parser.finish(doc);
  if (!errors.empty()) {
    std::stable_sort(errors.begin(), errors.end(), [](const ParseError& a, const ParseError& b) {
      return std::tie(a.span.line, a.span.column) < std::tie(b.span.line, b.span.column);
    });
    throw ParseFailure(std::move(errors));
  }
  return doc;
}

/// Parses and validates; fatal validation findings become semantic errors.
inline MarkovModel parse(std::string_view text) {
  ParsedDocument doc = parse_document(text);
  ValidationReport report = validate(doc.model);
  std::vector<ParseError> errors;
  for (const auto& f : report.findings) {
    if (f.severity != Severity::kFatal) continue;
    SourceSpan span = detail::end_span(text);
    if (auto it = doc.spans.find(f.subject); it != doc.spans.end()) span = it->second;
    errors.push_back({span, f.message, ParseError::Kind::kSemantic});
  }
  if (!errors.empty()) throw ParseFailure(std::move(errors));
  return std::move(doc.model);
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Canonical text: options, params by name, states by id, transitions by
/// (from, to), then init by id. parse(serialize(m)) reproduces m.
inline std::string serialize(const MarkovModel& model) {
  std::ostringstream os;
  if (model.horizon) os << "option horizon = " << detail::format_number(*model.horizon) << ";\n";
  for (const auto& [name, value] : model.params) {
    os << "param " << name << " = " << detail::format_number(value);
    if (model.coverage_params.count(name)) os << " coverage";
    os << ";\n";
  }
  auto states = model.states;
  std::sort(states.begin(), states.end(), [](const State& a, const State& b) { return a.id < b.id; });
  for (const auto& s : states)
    os << "state " << s.id << " " << detail::quote(s.label) << " class = " << to_string(s.cls)
       << ";\n";
  auto trans = model.transitions;
  std::stable_sort(trans.begin(), trans.end(), [](const Transition& a, const Transition& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (const auto& t : trans) {
    os << "trans " << t.from << " -> " << t.to << " rate = " << t.rate.to_string();
    if (t.kind == TransitionKind::kRepair) os << " kind = repair";
    os << ";\n";
  }
  for (const auto& [id, p] : model.initial)
    os << "init " << id << " = " << detail::format_number(p) << ";\n";
  return os.str();
}

}  // namespace depmark

#endif  // DEPMARK_LANG_HPP
