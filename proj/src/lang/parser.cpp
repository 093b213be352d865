#include "heapfix/parser.hpp"

#include <cctype>
#include <charconv>

namespace heapfix {

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBrack,
  RBrack,
  Semi,
  Comma,
  Colon,
  Assign, // :=
  Rel,    // < <= == != > >=
  Not,
  AndAnd,
  OrOr,
  Minus,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i_;
        while (j < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
          ++j;
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(i_, j - i_));
        advance(j - i_);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i_;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j])))
          ++j;
        t.kind = Tok::Number;
        t.text = std::string(src_.substr(i_, j - i_));
        advance(j - i_);
      } else {
        auto two = src_.substr(i_, 2);
        if (two == ":=") {
          t.kind = Tok::Assign;
        } else if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
          t.kind = Tok::Rel;
        } else if (two == "&&") {
          t.kind = Tok::AndAnd;
        } else if (two == "||") {
          t.kind = Tok::OrOr;
        }
        if (t.kind != Tok::End) {
          t.text = std::string(two);
          advance(2);
        } else {
          switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case '[': t.kind = Tok::LBrack; break;
          case ']': t.kind = Tok::RBrack; break;
          case ';': t.kind = Tok::Semi; break;
          case ',': t.kind = Tok::Comma; break;
          case ':': t.kind = Tok::Colon; break;
          case '<':
          case '>': t.kind = Tok::Rel; break;
          case '!': t.kind = Tok::Not; break;
          case '-': t.kind = Tok::Minus; break;
          default:
            throw ProgramError(std::string("unexpected character '") + c + "'", t.pos);
          }
          t.text = std::string(1, c);
          advance(1);
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance(size_t n) {
    for (size_t k = 0; k < n; ++k, ++i_) {
      if (src_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else if (src_.substr(i_, 2) == "//") {
        while (i_ < src_.size() && src_[i_] != '\n')
          advance(1);
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_keyword(const std::string &s) {
  static const char *kw[] = {"fn",    "if",   "else", "while", "return", "goto", "skip",
                             "abort", "free", "malloc", "NULL", "true",  "false", "ptr", "int"};
  for (const char *k : kw)
    if (s == k)
      return true;
  return false;
}

RelOp rel_of(const std::string &s) {
  if (s == "<") return RelOp::Lt;
  if (s == "<=") return RelOp::Le;
  if (s == "==") return RelOp::Eq;
  if (s == "!=") return RelOp::Ne;
  if (s == ">") return RelOp::Gt;
  return RelOp::Ge;
}

class Parser {
public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  Program program() {
    Program p;
    while (!at(Tok::End))
      p.functions.push_back(function());
    return p;
  }

  BoolExpr standalone_expr() {
    BoolExpr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

  std::vector<Stmt> standalone_stmts() {
    std::vector<Stmt> out;
    while (!at(Tok::End))
      out.push_back(stmt());
    return out;
  }

private:
  const Token &peek(size_t k = 0) const {
    size_t j = std::min(pos_ + k, toks_.size() - 1);
    return toks_[j];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(const char *w) const { return at(Tok::Ident) && peek().text == w; }

  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1)
      ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string &what) const {
    const Token &t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ProgramError("expected " + what + ", found " + got, t.pos);
  }

  Token expect(Tok k, const char *what) {
    if (!at(k))
      fail(what);
    return take();
  }

  void expect_word(const char *w) {
    if (!at_word(w))
      fail(std::string("'") + w + "'");
    take();
  }

  std::string ident(const char *what) {
    if (!at(Tok::Ident) || is_keyword(peek().text))
      fail(what);
    return take().text;
  }

  FunctionDef function() {
    FunctionDef fn;
    fn.pos = peek().pos;
    expect_word("fn");
    fn.name = ident("function name");
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      for (;;) {
        Param p;
        p.name = ident("parameter name");
        expect(Tok::Colon, "':'");
        if (at_word("ptr"))
          p.kind = VarKind::Ptr;
        else if (at_word("int"))
          p.kind = VarKind::Int;
        else
          fail("'ptr' or 'int'");
        take();
        fn.params.push_back(p);
        if (!at(Tok::Comma))
          break;
        take();
      }
    }
    expect(Tok::RParen, "')'");
    fn.body = block();
    return fn;
  }

  std::vector<Stmt> block() {
    expect(Tok::LBrace, "'{'");
    std::vector<Stmt> out;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End))
        fail("'}'");
      out.push_back(stmt());
    }
    take();
    return out;
  }

  Stmt stmt() {
    std::string label;
    if (at(Tok::Ident) && !is_keyword(peek().text) && peek(1).kind == Tok::Colon) {
      label = take().text;
      take();
    }
    Stmt s = bare_stmt();
    s.label = label;
    return s;
  }

  Stmt bare_stmt() {
    Stmt s;
    s.pos = peek().pos;
    if (at_word("skip")) {
      take();
      s.kind = StmtKind::Skip;
      expect(Tok::Semi, "';'");
    } else if (at_word("abort")) {
      take();
      s.kind = StmtKind::Abort;
      expect(Tok::LParen, "'('");
      expect(Tok::RParen, "')'");
      expect(Tok::Semi, "';'");
    } else if (at_word("free")) {
      take();
      s.kind = StmtKind::Free;
      expect(Tok::LParen, "'('");
      s.target = ident("variable");
      expect(Tok::RParen, "')'");
      expect(Tok::Semi, "';'");
    } else if (at_word("return")) {
      take();
      s.kind = StmtKind::Return;
      if (!at(Tok::Semi)) {
        s.value = operand();
        s.has_value = true;
      }
      expect(Tok::Semi, "';'");
    } else if (at_word("goto")) {
      take();
      s.kind = StmtKind::Goto;
      s.goto_label = ident("label");
      expect(Tok::Semi, "';'");
    } else if (at_word("if")) {
      return if_stmt();
    } else if (at_word("while")) {
      take();
      s.kind = StmtKind::While;
      expect(Tok::LParen, "'('");
      s.cond = expr();
      expect(Tok::RParen, "')'");
      s.then_body = block();
    } else if (at(Tok::LBrack)) {
      take();
      s.kind = StmtKind::Store;
      s.address = operand();
      expect(Tok::RBrack, "']'");
      expect(Tok::Assign, "':='");
      s.value = operand();
      expect(Tok::Semi, "';'");
    } else if (at(Tok::Ident) && !is_keyword(peek().text) && peek(1).kind == Tok::LParen) {
      s.kind = StmtKind::Call;
      s.callee = take().text;
      s.args = args();
      expect(Tok::Semi, "';'");
    } else {
      s.target = ident("statement");
      expect(Tok::Assign, "':='");
      if (at(Tok::LBrack)) {
        take();
        s.kind = StmtKind::Load;
        s.address = operand();
        expect(Tok::RBrack, "']'");
      } else if (at_word("malloc")) {
        take();
        s.kind = StmtKind::Malloc;
        expect(Tok::LParen, "'('");
        expect(Tok::RParen, "')'");
      } else if (at(Tok::Ident) && !is_keyword(peek().text) && peek(1).kind == Tok::LParen) {
        s.kind = StmtKind::Call;
        s.callee = take().text;
        s.args = args();
      } else {
        s.kind = StmtKind::Assign;
        s.value = operand();
      }
      expect(Tok::Semi, "';'");
    }
    return s;
  }

  Stmt if_stmt() {
    Stmt s;
    s.pos = peek().pos;
    expect_word("if");
    s.kind = StmtKind::If;
    expect(Tok::LParen, "'('");
    s.cond = expr();
    expect(Tok::RParen, "')'");
    s.then_body = block();
    if (at_word("else")) {
      take();
      s.has_else = true;
      if (at_word("if"))
        s.else_body.push_back(if_stmt());
      else
        s.else_body = block();
    }
    return s;
  }

  std::vector<Operand> args() {
    expect(Tok::LParen, "'('");
    std::vector<Operand> out;
    if (!at(Tok::RParen)) {
      for (;;) {
        out.push_back(operand());
        if (!at(Tok::Comma))
          break;
        take();
      }
    }
    expect(Tok::RParen, "')'");
    return out;
  }

  Operand operand() {
    if (at_word("NULL")) {
      take();
      return Operand::null();
    }
    bool neg = false;
    if (at(Tok::Minus)) {
      take();
      neg = true;
    }
    if (at(Tok::Number)) {
      Token t = take();
      long v = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc())
        throw ProgramError("integer literal out of range", t.pos);
      return Operand::integer(neg ? -v : v);
    }
    if (neg)
      fail("integer literal");
    return Operand::var(ident("operand"));
  }

  BoolExpr expr() {
    BoolExpr e = conj();
    while (at(Tok::OrOr)) {
      take();
      e = BoolExpr::binary(BoolExpr::Kind::Or, std::move(e), conj());
    }
    return e;
  }

  BoolExpr conj() {
    BoolExpr e = unary();
    while (at(Tok::AndAnd)) {
      take();
      e = BoolExpr::binary(BoolExpr::Kind::And, std::move(e), unary());
    }
    return e;
  }

  BoolExpr unary() {
    if (at(Tok::Not)) {
      take();
      // `!p` is shorthand for `!(p != NULL)`.
      if (at(Tok::Ident) && !is_keyword(peek().text) && peek(1).kind != Tok::Rel)
        return BoolExpr::negation(
            BoolExpr::rel(Operand::var(take().text), RelOp::Ne, Operand::null()));
      return BoolExpr::negation(unary());
    }
    if (at(Tok::LParen)) {
      take();
      BoolExpr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at_word("true") || at_word("false"))
      return BoolExpr::truth(take().text == "true");
    Operand l = operand();
    if (!at(Tok::Rel))
      fail("comparison operator");
    RelOp op = rel_of(take().text);
    Operand r = operand();
    return BoolExpr::rel(std::move(l), op, std::move(r));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

void assign_ids(std::vector<Stmt> &body) {
  int n = 0;
  for_each_stmt_mut(body, [&](Stmt &s) {
    s.ordinal = n;
    s.uid = n;
    ++n;
  });
}

} // namespace

Program parse_program(std::string_view source) {
  Program p = Parser(source).program();
  for (auto &fn : p.functions)
    assign_ids(fn.body);
  check_program(p);
  return p;
}

BoolExpr parse_bool_expr(std::string_view source) { return Parser(source).standalone_expr(); }

std::vector<Stmt> parse_stmts(std::string_view source) {
  std::vector<Stmt> out = Parser(source).standalone_stmts();
  assign_ids(out);
  return out;
}

} // namespace heapfix
