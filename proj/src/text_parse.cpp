#include <cctype>
#include <cstdlib>
#include <unordered_map>

#include "acckit/text.hpp"

namespace acckit {
namespace {

struct Token {
  enum Kind {
    Ident,    // bare word, including keywords
    Value,    // %name
    Int,      // decimal integer, optional leading '-', or 0x...
    String,   // "name"
    Punct,    // single char: ( ) { } = , : < >
    End,
  };
  Kind kind;
  std::string text;  // without sigils/quotes
  int line, col;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token &peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (c == '%') {
      get();
      tok_ = {Token::Value, ident(), tok_.line, tok_.col};
      return;
    }
    if (c == '"') {
      get();
      std::string s;
      while (pos_ < src_.size() && src_[pos_] != '"')
        s.push_back(get());
      if (pos_ >= src_.size())
        throw ParseError(tok_.line, tok_.col, "unterminated string");
      get();
      tok_ = {Token::String, std::move(s), tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::string s;
      s.push_back(get());
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == 'x'))
        s.push_back(get());
      tok_ = {Token::Int, std::move(s), tok_.line, tok_.col};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
      tok_ = {Token::Ident, ident(), tok_.line, tok_.col};
      return;
    }
    get();
    tok_ = {Token::Punct, std::string(1, c), tok_.line, tok_.col};
  }

  std::string ident() {
    std::string s;
    if (pos_ < src_.size() && src_[pos_] == '@')
      s.push_back(get());
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '-') {
        // '-' appears in keywords like extern-call / host-work; a bare ident
        // may not end with '-', so only take it when a word char follows.
        if (c == '-') {
          if (pos_ + 1 >= src_.size() ||
              !(std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) ||
                src_[pos_ + 1] == '_'))
            break;
        }
        s.push_back(get());
      } else {
        break;
      }
    }
    if (s.empty())
      throw ParseError(line_, col_, "expected identifier");
    return s;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          get();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        break;
      }
    }
  }

  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Program run() {
    Program p;
    while (lex_.peek().kind == Token::Ident && lex_.peek().text == "accel") {
      lex_.next();
      p.accels.push_back(expect(Token::String, "accelerator name").text);
    }
    while (lex_.peek().kind != Token::End) {
      Token t = expect(Token::Ident, "'func'");
      if (t.text != "func")
        fail(t, "expected 'func' or 'accel'");
      p.functions.push_back(function(p));
    }
    return p;
  }

private:
  [[noreturn]] void fail(const Token &t, const std::string &msg) {
    throw ParseError(t.line, t.col, msg);
  }

  Token expect(Token::Kind k, const std::string &what) {
    Token t = lex_.next();
    if (t.kind != k)
      fail(t, "expected " + what + ", got '" + t.text + "'");
    return t;
  }

  void expect_punct(char c) {
    Token t = lex_.next();
    if (t.kind != Token::Punct || t.text[0] != c)
      fail(t, std::string("expected '") + c + "'");
  }

  bool eat_punct(char c) {
    if (lex_.peek().kind == Token::Punct && lex_.peek().text[0] == c) {
      lex_.next();
      return true;
    }
    return false;
  }

  bool peek_ident(std::string_view word) {
    return lex_.peek().kind == Token::Ident && lex_.peek().text == word;
  }

  std::int64_t integer() {
    Token t = expect(Token::Int, "integer");
    return std::strtoll(t.text.c_str(), nullptr, 0);
  }

  ValueType type(const Program &p) {
    Token t = lex_.next();
    if (t.kind != Token::Ident)
      fail(t, "expected type");
    if (t.text == "state" || t.text == "token") {
      expect_punct('<');
      Token name = expect(Token::String, "accelerator name");
      expect_punct('>');
      if (!p.declares_accel(name.text))
        fail(name, "unknown accelerator \"" + name.text + "\"");
      return t.text == "state" ? ValueType::state(name.text)
                               : ValueType::token(name.text);
    }
    if (t.text.size() > 1 && t.text[0] == 'i') {
      int w = std::atoi(t.text.c_str() + 1);
      if (w >= 1 && w <= 64)
        return ValueType::integer(w);
    }
    fail(t, "expected type, got '" + t.text + "'");
  }

  Function function(const Program &p) {
    Function f;
    Token name = expect(Token::Ident, "function name");
    if (name.text.empty() || name.text[0] != '@')
      fail(name, "function name must start with '@'");
    f.name = name.text.substr(1);
    expect_punct('(');
    expect_punct(')');
    expect_punct('{');
    names_.clear();
    block(p, f, f.body, /*needs_yield=*/false);
    return f;
  }

  ValueId lookup(const Token &t) {
    auto it = names_.find(t.text);
    if (it == names_.end())
      fail(t, "unknown value %" + t.text);
    return it->second;
  }

  ValueId operand(const Function &f, const Program &) {
    Token t = expect(Token::Value, "value");
    (void)f;
    return lookup(t);
  }

  ValueId int_operand(Function &f) {
    Token t = expect(Token::Value, "value");
    ValueId v = lookup(t);
    if (!f.type_of(v).is_int())
      fail(t, "operand %" + t.text + " is not an integer");
    return v;
  }

  ValueId define(Function &f, const Token &name, ValueType t) {
    if (names_.count(name.text))
      fail(name, "value %" + name.text + " redefined");
    ValueId v = f.new_value(std::move(t));
    names_.emplace(name.text, v);
    return v;
  }

  // Parses ops until '}'. When needs_yield is set an empty yield is appended
  // if the region does not end with one.
  void block(const Program &p, Function &f, Block &b, bool needs_yield) {
    while (!eat_punct('}')) {
      if (lex_.peek().kind == Token::End)
        fail(lex_.peek(), "unexpected end of input, missing '}'");
      op(p, f, b);
    }
    if (needs_yield &&
        (b.ops.empty() || b.ops.back().kind != OpKind::Yield)) {
      Operation y;
      y.kind = OpKind::Yield;
      y.uid = f.take_uid();
      b.ops.push_back(std::move(y));
    }
  }

  void op(const Program &p, Function &f, Block &b) {
    std::vector<Token> result_names;
    if (lex_.peek().kind == Token::Value) {
      result_names.push_back(lex_.next());
      while (eat_punct(','))
        result_names.push_back(expect(Token::Value, "value"));
      expect_punct('=');
    }

    Token kw = expect(Token::Ident, "operation");
    Operation o;
    o.uid = f.take_uid();
    o.line = kw.line;
    o.col = kw.col;

    auto finish_typed_results = [&](const char *what) {
      // ':' t1, t2, ... with one type per result name.
      if (result_names.empty())
        return;
      expect_punct(':');
      for (std::size_t i = 0; i < result_names.size(); ++i) {
        if (i)
          expect_punct(',');
        o.results.push_back(define(f, result_names[i], type(p)));
      }
      (void)what;
    };

    if (kw.text == "const") {
      o.kind = OpKind::Const;
      o.literal = integer();
      if (result_names.size() != 1)
        fail(kw, "const defines exactly one value");
      expect_punct(':');
      ValueType t = type(p);
      if (!t.is_int())
        fail(kw, "const type must be an integer");
      o.results.push_back(define(f, result_names[0], std::move(t)));
    } else if (auto ar = arith_from_name(kw.text)) {
      o.kind = OpKind::Arith;
      o.arith = *ar;
      Token lhs_tok = expect(Token::Value, "value");
      ValueId lhs = lookup(lhs_tok);
      expect_punct(',');
      Token rhs_tok = expect(Token::Value, "value");
      ValueId rhs = lookup(rhs_tok);
      o.operands = {lhs, rhs};
      if (result_names.size() != 1)
        fail(kw, "arith defines exactly one value");
      expect_punct(':');
      ValueType t = type(p);
      if (!t.is_int())
        fail(kw, "arith type must be an integer");
      if (f.type_of(lhs) != t || f.type_of(rhs) != t)
        fail(kw, "arith operand width mismatch");
      o.results.push_back(define(f, result_names[0], std::move(t)));
    } else if (kw.text == "setup") {
      o.kind = OpKind::Setup;
      Token accel = expect(Token::String, "accelerator name");
      if (!p.declares_accel(accel.text))
        fail(accel, "unknown accelerator \"" + accel.text + "\"");
      o.symbol = accel.text;
      expect_punct('(');
      if (!eat_punct(')')) {
        do {
          Token field = expect(Token::Ident, "field name");
          expect_punct('=');
          Token vt = expect(Token::Value, "value");
          ValueId v = lookup(vt);
          if (!f.type_of(v).is_int())
            fail(vt, "field value must be an integer");
          o.fields.push_back(field.text);
          o.operands.push_back(v);
        } while (eat_punct(','));
        expect_punct(')');
      }
      if (peek_ident("from")) {
        lex_.next();
        Token st = expect(Token::Value, "state value");
        ValueId v = lookup(st);
        if (!f.type_of(v).is_state() || f.type_of(v).accel != o.symbol)
          fail(st, "'from' operand must be state<\"" + o.symbol + "\">");
        o.operands.push_back(v);
        o.from_state = true;
      }
      if (result_names.size() != 1)
        fail(kw, "setup defines exactly one value");
      expect_punct(':');
      ValueType t = type(p);
      if (!t.is_state() || t.accel != o.symbol)
        fail(kw, "setup result must be state<\"" + o.symbol + "\">");
      o.results.push_back(define(f, result_names[0], std::move(t)));
    } else if (kw.text == "launch") {
      o.kind = OpKind::Launch;
      Token st = expect(Token::Value, "state value");
      ValueId sv = lookup(st);
      if (!f.type_of(sv).is_state())
        fail(st, "launch operand must be a state value");
      o.symbol = f.type_of(sv).accel;
      o.operands.push_back(sv);
      if (eat_punct('(')) {
        if (!eat_punct(')')) {
          do {
            Token field = expect(Token::Ident, "field name");
            expect_punct('=');
            Token vt = expect(Token::Value, "value");
            ValueId v = lookup(vt);
            if (!f.type_of(v).is_int())
              fail(vt, "field value must be an integer");
            o.fields.push_back(field.text);
            o.operands.push_back(v);
          } while (eat_punct(','));
          expect_punct(')');
        }
      }
      Token ops_kw = expect(Token::Ident, "'ops'");
      if (ops_kw.text != "ops")
        fail(ops_kw, "expected 'ops'");
      expect_punct('=');
      if (lex_.peek().kind == Token::Value) {
        o.operands.push_back(int_operand(f));
        o.ops_operand = true;
      } else {
        o.ops_attr = integer();
        if (*o.ops_attr < 0)
          fail(ops_kw, "ops must be non-negative");
      }
      if (result_names.size() != 1)
        fail(kw, "launch defines exactly one value");
      expect_punct(':');
      ValueType t = type(p);
      if (!t.is_token() || t.accel != o.symbol)
        fail(kw, "launch result must be token<\"" + o.symbol + "\">");
      o.results.push_back(define(f, result_names[0], std::move(t)));
    } else if (kw.text == "await") {
      o.kind = OpKind::Await;
      Token tk = expect(Token::Value, "token value");
      ValueId v = lookup(tk);
      if (!f.type_of(v).is_token())
        fail(tk, "await operand must be a token");
      o.operands.push_back(v);
      if (!result_names.empty())
        fail(kw, "await has no results");
    } else if (kw.text == "for") {
      o.kind = OpKind::For;
      Token iv_name = expect(Token::Value, "induction variable");
      expect_punct('=');
      o.lower = integer();
      Token to_kw = expect(Token::Ident, "'to'");
      if (to_kw.text != "to")
        fail(to_kw, "expected 'to'");
      o.upper = integer();
      Token step_kw = expect(Token::Ident, "'step'");
      if (step_kw.text != "step")
        fail(step_kw, "expected 'step'");
      o.step = integer();
      Block body;
      std::vector<Token> arg_names;
      if (peek_ident("iter")) {
        lex_.next();
        expect_punct('(');
        do {
          Token arg = expect(Token::Value, "iter argument");
          expect_punct('=');
          Token init = expect(Token::Value, "initial value");
          ValueId iv = lookup(init);
          expect_punct(':');
          ValueType t = type(p);
          if (f.type_of(iv) != t)
            fail(init, "iter initial value type mismatch");
          o.operands.push_back(iv);
          arg_names.push_back(arg);
        } while (eat_punct(','));
        expect_punct(')');
      }
      expect_punct('{');
      // Region values scope over the body only; names introduced inside stay
      // visible afterwards in this flat map, but dominance is re-checked by
      // the verifier so shadowing-free input keeps working.
      body.args.push_back(define(f, iv_name, ValueType::integer(64)));
      for (std::size_t i = 0; i < arg_names.size(); ++i)
        body.args.push_back(
            define(f, arg_names[i], f.type_of(o.operands[i])));
      block(p, f, body, /*needs_yield=*/true);
      o.regions.push_back(std::move(body));
      if (!result_names.empty()) {
        expect_punct(':');
        for (std::size_t i = 0; i < result_names.size(); ++i) {
          if (i)
            expect_punct(',');
          o.results.push_back(define(f, result_names[i], type(p)));
        }
      }
    } else if (kw.text == "if") {
      o.kind = OpKind::If;
      Token ct = expect(Token::Value, "condition");
      ValueId cv = lookup(ct);
      o.operands.push_back(cv);
      expect_punct('{');
      Block then_b, else_b;
      block(p, f, then_b, /*needs_yield=*/true);
      Token else_kw = expect(Token::Ident, "'else'");
      if (else_kw.text != "else")
        fail(else_kw, "expected 'else'");
      expect_punct('{');
      block(p, f, else_b, /*needs_yield=*/true);
      o.regions.push_back(std::move(then_b));
      o.regions.push_back(std::move(else_b));
      finish_typed_results("if");
    } else if (kw.text == "yield") {
      o.kind = OpKind::Yield;
      if (lex_.peek().kind == Token::Value) {
        o.operands.push_back(operand(f, p));
        while (eat_punct(','))
          o.operands.push_back(operand(f, p));
      }
      if (!result_names.empty())
        fail(kw, "yield has no results");
    } else if (kw.text == "extern-call") {
      o.kind = OpKind::ExternCall;
      o.symbol = expect(Token::String, "callee name").text;
      expect_punct('(');
      if (!eat_punct(')')) {
        do {
          o.operands.push_back(int_operand(f));
        } while (eat_punct(','));
        expect_punct(')');
      }
      if (peek_ident("effects")) {
        lex_.next();
        expect_punct('=');
        Token mode = expect(Token::Ident, "'all' or 'none'");
        if (mode.text == "all")
          o.effects = Effects::All;
        else if (mode.text == "none")
          o.effects = Effects::None;
        else
          fail(mode, "effects must be 'all' or 'none'");
      }
      finish_typed_results("extern-call");
    } else if (kw.text == "host-work") {
      o.kind = OpKind::HostWork;
      Token cyc = expect(Token::Ident, "'cycles'");
      if (cyc.text != "cycles")
        fail(cyc, "expected 'cycles'");
      expect_punct('=');
      o.literal = integer();
      if (o.literal < 0)
        fail(cyc, "cycles must be non-negative");
      if (!result_names.empty())
        fail(kw, "host-work has no results");
    } else {
      fail(kw, "unknown operation '" + kw.text + "'");
    }

    b.ops.push_back(std::move(o));
  }

  Lexer lex_;
  std::unordered_map<std::string, ValueId> names_;
};

} // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

} // namespace acckit
