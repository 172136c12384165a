#include "mpst/parse.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace mpst {

namespace {

enum class Tok {
  Ident,
  Number,
  String,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Dot,
  Bar,
  Arrow,
  Eq,
  Lt,
  Gt,
  Amp,
  SelOp,  // (+)
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  Rational number;
  bool is_int = false;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::Eof) return out;
    }
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& detail) {
    throw ParseError("syntax", line_, col_, detail);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    for (;;) {
      char c = peek();
      if (c == '#') {
        while (peek() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Token make(Tok k, std::string text, int line, int col) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.line = line;
    t.col = col;
    return t;
  }

  Token next() {
    int line = line_, col = col_;
    char c = peek();
    if (c == '\0') return make(Tok::Eof, "", line, col);
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        id += advance();
      }
      return make(Tok::Ident, std::move(id), line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number(line, col);
    }
    if (c == '"') return string_lit(line, col);
    advance();
    switch (c) {
      case '(':
        if (peek() == '+' && peek(1) == ')') {
          advance();
          advance();
          return make(Tok::SelOp, "(+)", line, col);
        }
        return make(Tok::LParen, "(", line, col);
      case ')': return make(Tok::RParen, ")", line, col);
      case '{': return make(Tok::LBrace, "{", line, col);
      case '}': return make(Tok::RBrace, "}", line, col);
      case '[': return make(Tok::LBracket, "[", line, col);
      case ']': return make(Tok::RBracket, "]", line, col);
      case ',': return make(Tok::Comma, ",", line, col);
      case ':': return make(Tok::Colon, ":", line, col);
      case '.': return make(Tok::Dot, ".", line, col);
      case '|': return make(Tok::Bar, "|", line, col);
      case '=': return make(Tok::Eq, "=", line, col);
      case '<': return make(Tok::Lt, "<", line, col);
      case '>': return make(Tok::Gt, ">", line, col);
      case '&': return make(Tok::Amp, "&", line, col);
      case '-':
        if (peek() == '>') {
          advance();
          return make(Tok::Arrow, "->", line, col);
        }
        fail("stray '-'");
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  // Integer, contiguous decimal (1.25) or contiguous fraction (3/5).
  Token number(int line, int col) {
    std::string raw;
    if (peek() == '-') raw += advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) raw += advance();
    bool is_int = true;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_int = false;
      raw += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) raw += advance();
    } else if (peek() == '/' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      is_int = false;
      raw += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) raw += advance();
    }
    auto val = parse_rational(raw);
    if (!val) fail("malformed number '" + raw + "'");
    Token t = make(Tok::Number, raw, line, col);
    t.number = *val;
    t.is_int = is_int;
    return t;
  }

  Token string_lit(int line, int col) {
    advance();  // opening quote
    std::string text;
    for (;;) {
      char c = peek();
      if (c == '\0' || c == '\n') fail("unterminated string literal");
      advance();
      if (c == '"') break;
      if (c == '\\') {
        char e = peek();
        if (e != '"' && e != '\\') fail("unsupported escape in string literal");
        text += advance();
      } else {
        text += c;
      }
    }
    Token t = make(Tok::String, std::move(text), line, col);
    return t;
  }
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseOptions* opts)
      : toks_(std::move(toks)), opts_(opts) {}

  ProcPtr run_process() {
    ProcPtr p = parse_par();
    expect(Tok::Eof, "end of input");
    return p;
  }

  GlobalPtr run_global() {
    GlobalPtr g = parse_global({});
    expect(Tok::Eof, "end of input");
    return g;
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;
  const ParseOptions* opts_;
  std::set<Name> sessions_;  // new-bound names in scope
  std::map<std::string, GlobalPtr> file_cache_;

  const Token& cur() const { return toks_[at_]; }
  const Token& ahead(std::size_t n) const {
    std::size_t i = at_ + n;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token take() { return toks_[at_++]; }

  [[noreturn]] void fail(const std::string& detail, const char* kind = "syntax") {
    throw ParseError(kind, cur().line, cur().col, detail);
  }

  bool at_ident(const char* word) const {
    return cur().kind == Tok::Ident && cur().text == word;
  }

  Token expect(Tok k, const std::string& what) {
    if (cur().kind != k) fail("expected " + what + ", found '" + describe(cur()) + "'");
    return take();
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::Eof: return "end of input";
      case Tok::Number: return t.text;
      case Tok::String: return "\"" + t.text + "\"";
      default: return t.text;
    }
  }

  Name expect_name(const std::string& what) {
    if (cur().kind != Tok::Ident) fail("expected " + what);
    return take().text;
  }

  // ---- processes ----

  ProcPtr parse_par() {
    std::vector<ProcPtr> parts;
    parts.push_back(parse_prefix());
    while (cur().kind == Tok::Bar) {
      take();
      parts.push_back(parse_prefix());
    }
    ProcPtr p = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) p = p_par(parts[i], p);
    return p;
  }

  ProcPtr parse_prefix() {
    if (cur().kind == Tok::Number) {
      Token t = take();
      if (t.is_int && t.number == 0) return p_nil();
      throw ParseError("syntax", t.line, t.col, "expected process, found number");
    }
    if (cur().kind == Tok::LParen) {
      take();
      ProcPtr p = parse_par();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at_ident("new")) return parse_restrict();
    if (at_ident("def")) return parse_def();
    if (cur().kind == Tok::Ident) return parse_ident_form();
    fail("expected process");
  }

  ProcPtr parse_restrict() {
    take();  // new
    std::vector<Name> names;
    names.push_back(expect_name("session name"));
    while (cur().kind == Tok::Comma) {
      take();
      names.push_back(expect_name("session name"));
    }
    GlobalPtr anno;
    if (cur().kind == Tok::Colon) {
      Token colon = take();
      if (names.size() != 1) {
        throw ParseError("annotation", colon.line, colon.col,
                         "a global-type annotation requires a single session");
      }
      anno = parse_annotation();
    }
    expect(Tok::Dot, "'.'");
    std::set<Name> saved = sessions_;
    sessions_.insert(names.begin(), names.end());
    ProcPtr body = parse_prefix();
    sessions_ = saved;
    ProcPtr p = body;
    for (std::size_t i = names.size(); i-- > 0;) {
      p = p_restrict(names[i], p, i == 0 ? anno : nullptr);
    }
    return p;
  }

  GlobalPtr parse_annotation() {
    if (cur().kind == Tok::String) {
      Token ref = take();
      return load_global_file(ref);
    }
    if (cur().kind == Tok::Lt) {
      take();
      GlobalPtr g = parse_global({});
      expect(Tok::Gt, "'>' closing the annotation");
      return g;
    }
    fail("expected a quoted file reference or '<' global type '>'");
  }

  GlobalPtr load_global_file(const Token& ref) {
    auto it = file_cache_.find(ref.text);
    if (it != file_cache_.end()) return it->second;
    std::string content;
    if (opts_ && opts_->file_loader) {
      content = opts_->file_loader(ref.text);
    } else {
      std::string base = opts_ ? opts_->base_dir : std::string(".");
      std::string path = base.empty() ? ref.text : base + "/" + ref.text;
      std::ifstream in(path);
      if (!in) {
        throw ParseError("file", ref.line, ref.col,
                         "cannot open global type file '" + path + "'");
      }
      std::stringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
    GlobalPtr g;
    try {
      g = parse_global_type(content);
    } catch (const ParseError& e) {
      throw ParseError(e.kind, ref.line, ref.col,
                       "in annotation '" + ref.text + "': " + e.what());
    }
    file_cache_.emplace(ref.text, g);
    return g;
  }

  ProcPtr parse_def() {
    take();  // def
    Name name = expect_name("process variable");
    expect(Tok::LParen, "'('");
    std::vector<Name> params;
    if (cur().kind != Tok::RParen) {
      params.push_back(expect_name("parameter"));
      while (cur().kind == Tok::Comma) {
        take();
        params.push_back(expect_name("parameter"));
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t j = i + 1; j < params.size(); ++j) {
        if (params[i] == params[j]) fail("duplicate parameter '" + params[i] + "'");
      }
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Eq, "'='");
    ProcPtr body = parse_prefix();
    if (!at_ident("in")) fail("expected 'in'");
    take();
    ProcPtr scope = parse_prefix();
    return p_def(std::move(name), std::move(params), std::move(body),
                 std::move(scope));
  }

  ProcPtr parse_ident_form() {
    Token id = take();
    if (cur().kind == Tok::LParen) return parse_call(id);
    if (cur().kind != Tok::LBracket) {
      fail("expected '(' or '[' after '" + id.text + "'");
    }
    take();
    Name role1 = expect_name("role");
    expect(Tok::RBracket, "']'");
    Channel chan;
    Name partner;
    if (cur().kind == Tok::LBracket) {
      take();
      partner = expect_name("role");
      expect(Tok::RBracket, "']'");
      chan = Channel{id.text, role1};
    } else {
      chan = Channel{id.text, std::nullopt};
      partner = role1;
    }
    if (cur().kind == Tok::SelOp) {
      take();
      return parse_select(std::move(chan), std::move(partner));
    }
    if (cur().kind == Tok::Amp) {
      take();
      return parse_branch(std::move(chan), std::move(partner));
    }
    fail("expected '(+)' or '&'");
  }

  ProcPtr parse_call(const Token& id) {
    take();  // (
    std::vector<CallArg> args;
    if (cur().kind != Tok::RParen) {
      args.push_back(parse_call_arg());
      while (cur().kind == Tok::Comma) {
        take();
        args.push_back(parse_call_arg());
      }
    }
    expect(Tok::RParen, "')'");
    return p_call(id.text, std::move(args));
  }

  CallArg parse_call_arg() {
    if (cur().kind == Tok::Ident && cur().text != "true" && cur().text != "false") {
      Token id = take();
      if (cur().kind == Tok::LBracket) {
        take();
        Name role = expect_name("role");
        expect(Tok::RBracket, "']'");
        return Channel{id.text, role};
      }
      if (sessions_.count(id.text)) return Value{SessionRef{id.text}};
      return Channel{id.text, std::nullopt};
    }
    return CallArg{parse_value()};
  }

  Value parse_value() {
    if (cur().kind == Tok::Number) {
      Token t = take();
      if (!t.is_int) {
        throw ParseError("syntax", t.line, t.col, "expected an integer value");
      }
      long long v = 0;
      try {
        v = std::stoll(t.text);
      } catch (const std::exception&) {
        throw ParseError("syntax", t.line, t.col, "integer value out of range");
      }
      return Value{static_cast<std::int64_t>(v)};
    }
    if (cur().kind == Tok::String) return Value{StrVal{take().text}};
    if (cur().kind == Tok::Ident) {
      Token id = take();
      if (id.text == "true") return Value{true};
      if (id.text == "false") return Value{false};
      if (sessions_.count(id.text)) return Value{SessionRef{id.text}};
      return Value{StrVal{id.text}};
    }
    fail("expected a value");
  }

  ProcPtr parse_select(Channel chan, Name partner) {
    Token open = expect(Tok::LBrace, "'{'");
    std::vector<SelectArmP> arms;
    std::set<Name> labels;
    if (cur().kind == Tok::RBrace) {
      throw ParseError("empty-choice", open.line, open.col,
                       "selection requires at least one arm");
    }
    for (;;) {
      if (cur().kind != Tok::Number) fail("expected a probability");
      Token pt = take();
      if (!in_unit_interval(pt.number)) {
        throw ParseError("bad-probability", pt.line, pt.col,
                         "probability " + pt.text + " outside [0,1]");
      }
      expect(Tok::Colon, "':'");
      Token lt = cur();
      Name label = expect_name("label");
      if (!labels.insert(label).second) {
        throw ParseError("duplicate-label", lt.line, lt.col,
                         "duplicate label '" + label + "'");
      }
      expect(Tok::LParen, "'('");
      Value payload = parse_value();
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      ProcPtr cont = parse_prefix();
      arms.push_back(SelectArmP{pt.number, std::move(label), std::move(payload),
                                std::move(cont)});
      if (cur().kind == Tok::Comma) {
        take();
        continue;
      }
      break;
    }
    expect(Tok::RBrace, "'}'");
    return p_select(std::move(chan), std::move(partner), std::move(arms));
  }

  ProcPtr parse_branch(Channel chan, Name partner) {
    Token open = expect(Tok::LBrace, "'{'");
    std::vector<BranchArmP> arms;
    std::set<Name> labels;
    if (cur().kind == Tok::RBrace) {
      throw ParseError("empty-choice", open.line, open.col,
                       "branching requires at least one arm");
    }
    for (;;) {
      Token lt = cur();
      Name label = expect_name("label");
      if (!labels.insert(label).second) {
        throw ParseError("duplicate-label", lt.line, lt.col,
                         "duplicate label '" + label + "'");
      }
      expect(Tok::LParen, "'('");
      Name binder = expect_name("binder");
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      ProcPtr cont = parse_prefix();
      arms.push_back(BranchArmP{std::move(label), std::move(binder), std::move(cont)});
      if (cur().kind == Tok::Comma) {
        take();
        continue;
      }
      break;
    }
    expect(Tok::RBrace, "'}'");
    return p_branch(std::move(chan), std::move(partner), std::move(arms));
  }

  // ---- global types ----

  GlobalPtr parse_global(std::set<Name> tvars) {
    if (at_ident("end")) {
      take();
      return g_end();
    }
    if (at_ident("rec")) {
      Token rec = take();
      Name var = expect_name("recursion variable");
      expect(Tok::Dot, "'.'");
      std::set<Name> inner = tvars;
      inner.insert(var);
      GlobalPtr body = parse_global(inner);
      if (!guarded(var, body)) {
        throw ParseError("unguarded-recursion", rec.line, rec.col,
                         "recursion variable '" + var + "' is not guarded");
      }
      return g_rec(std::move(var), std::move(body));
    }
    if (cur().kind == Tok::Ident) {
      Token id = take();
      if (cur().kind != Tok::Arrow) {
        if (!tvars.count(id.text)) {
          throw ParseError("unbound-type-var", id.line, id.col,
                           "unbound recursion variable '" + id.text + "'");
        }
        return g_var(id.text);
      }
      take();  // ->
      Name to = expect_name("role");
      if (to == id.text) {
        throw ParseError("self-communication", id.line, id.col,
                         "role '" + to + "' cannot communicate with itself");
      }
      if (cur().kind == Tok::Colon) take();  // optional separator
      Token open = expect(Tok::LBrace, "'{'");
      std::vector<GlobalArm> arms;
      std::set<Name> labels;
      if (cur().kind == Tok::RBrace) {
        throw ParseError("empty-choice", open.line, open.col,
                         "interaction requires at least one arm");
      }
      for (;;) {
        ImpreciseProb delta = parse_interval();
        expect(Tok::Colon, "':'");
        Token lt = cur();
        Name label = expect_name("label");
        if (!labels.insert(label).second) {
          throw ParseError("duplicate-label", lt.line, lt.col,
                           "duplicate label '" + label + "'");
        }
        expect(Tok::LParen, "'('");
        Sort sort = parse_sort();
        expect(Tok::RParen, "')'");
        expect(Tok::Dot, "'.'");
        GlobalPtr cont = parse_global(tvars);
        arms.push_back(GlobalArm{delta, std::move(label), sort, std::move(cont)});
        if (cur().kind == Tok::Comma) {
          take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return g_interaction(id.text, std::move(to), std::move(arms));
    }
    fail("expected a global type");
  }

  static bool guarded(const Name& var, const GlobalPtr& g) {
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, GVar>) {
            return n.name != var;
          } else if constexpr (std::is_same_v<T, GRec>) {
            return n.var == var || guarded(var, n.body);
          } else {
            return true;  // an interaction prefixes everything below it
          }
        },
        g->node);
  }

  ImpreciseProb parse_interval() {
    if (cur().kind == Tok::Number) {
      Token t = take();
      ImpreciseProb d{t.number, t.number};
      if (!d.valid()) {
        throw ParseError("bad-interval", t.line, t.col,
                         "probability " + t.text + " outside [0,1]");
      }
      return d;
    }
    Token open = expect(Tok::LBracket, "'[' or a probability");
    if (cur().kind != Tok::Number) fail("expected interval endpoint");
    Rational lo = take().number;
    expect(Tok::Comma, "','");
    if (cur().kind != Tok::Number) fail("expected interval endpoint");
    Rational hi = take().number;
    expect(Tok::RBracket, "']'");
    ImpreciseProb d{std::move(lo), std::move(hi)};
    if (!d.valid()) {
      throw ParseError("bad-interval", open.line, open.col,
                       "interval " + interval_string(d) + " is not within [0,1]");
    }
    return d;
  }

  Sort parse_sort() {
    Token t = cur();
    Name s = expect_name("sort");
    if (s == "nat") return Sort::Nat;
    if (s == "int") return Sort::Int;
    if (s == "bool") return Sort::Bool;
    if (s == "string") return Sort::Str;
    throw ParseError("syntax", t.line, t.col,
                     "unknown sort '" + s + "' (expected nat, int, bool, string)");
  }
};

}  // namespace

ProcPtr parse_process(const std::string& text, const ParseOptions& opts) {
  Parser p(Lexer(text).run(), &opts);
  return p.run_process();
}

GlobalPtr parse_global_type(const std::string& text) {
  Parser p(Lexer(text).run(), nullptr);
  return p.run_global();
}

}  // namespace mpst
