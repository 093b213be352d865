#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace heapfix {

enum class VarKind { Ptr, Int };

const char *to_string(VarKind kind);

struct SourcePos {
  int line = 0;
  int col = 0;
};

/// Error raised for malformed programs: syntax errors, undefined labels,
/// recursion, kind mismatches and use-before-definition.
class ProgramError : public std::runtime_error {
public:
  ProgramError(const std::string &msg, SourcePos pos)
      : std::runtime_error(format(msg, pos)), pos_(pos), detail_(msg) {}

  SourcePos pos() const { return pos_; }
  const std::string &detail() const { return detail_; }

private:
  static std::string format(const std::string &msg, SourcePos pos);
  SourcePos pos_;
  std::string detail_;
};

/// A variable, `NULL`, or an integer literal.
struct Operand {
  enum class Kind { Var, Null, Int };
  Kind kind = Kind::Null;
  std::string name;
  long value = 0;

  static Operand var(std::string n) { return {Kind::Var, std::move(n), 0}; }
  static Operand null() { return {Kind::Null, {}, 0}; }
  static Operand integer(long v) { return {Kind::Int, {}, v}; }

  bool is_var() const { return kind == Kind::Var; }
  bool operator==(const Operand &) const = default;
};

enum class RelOp { Lt, Le, Eq, Ne, Gt, Ge };

const char *to_string(RelOp op);
RelOp negate(RelOp op);
RelOp flip(RelOp op);

struct BoolExpr {
  enum class Kind { True, False, Or, And, Not, Rel };
  Kind kind = Kind::True;
  RelOp op = RelOp::Eq;
  Operand lhs;
  Operand rhs;
  std::vector<BoolExpr> args;

  static BoolExpr truth(bool v) {
    BoolExpr b;
    b.kind = v ? Kind::True : Kind::False;
    return b;
  }
  static BoolExpr rel(Operand l, RelOp op, Operand r) {
    BoolExpr b;
    b.kind = Kind::Rel;
    b.op = op;
    b.lhs = std::move(l);
    b.rhs = std::move(r);
    return b;
  }
  static BoolExpr negation(BoolExpr inner) {
    BoolExpr b;
    b.kind = Kind::Not;
    b.args.push_back(std::move(inner));
    return b;
  }
  static BoolExpr binary(Kind k, BoolExpr l, BoolExpr r) {
    BoolExpr b;
    b.kind = k;
    b.args.push_back(std::move(l));
    b.args.push_back(std::move(r));
    return b;
  }

  bool operator==(const BoolExpr &) const = default;
};

enum class StmtKind {
  Assign, // v := operand
  Load,   // v := [operand]
  Store,  // [operand] := operand
  Malloc, // v := malloc()
  Free,   // free(v)
  Call,   // v := f(args)  or  f(args)
  If,
  While,
  Return,
  Goto,
  Skip,
  Abort,
};

/// One command. Compound commands own their bodies; `seq` is a vector of
/// statements rather than a node of its own.
///
/// `uid` survives patch application so analysis results on a patched program
/// can be related to the original. `ordinal` is the pre-order index and is
/// recomputed whenever the function changes.
struct Stmt {
  StmtKind kind = StmtKind::Skip;
  std::string target;  // assigned, freed or called-into variable
  Operand address;     // Load / Store address
  Operand value;       // Assign rhs, Store rhs, Return value
  bool has_value = false;
  std::string callee;
  std::vector<Operand> args;
  BoolExpr cond;
  std::vector<Stmt> then_body; // If-then, While body
  std::vector<Stmt> else_body;
  bool has_else = false;
  std::string label; // label attached to this statement, may be empty
  std::string goto_label;

  int uid = 0;
  int ordinal = 0;
  SourcePos pos;
};

/// Structural equality; ignores uid, ordinal and source position.
bool same_shape(const Stmt &a, const Stmt &b);
bool same_shape(const std::vector<Stmt> &a, const std::vector<Stmt> &b);

struct Param {
  std::string name;
  VarKind kind = VarKind::Ptr;
  bool operator==(const Param &) const = default;
};

enum class ReturnKind { Void, Ptr, Int };

struct FunctionDef {
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourcePos pos;

  // Filled by check_program().
  std::map<std::string, VarKind> var_kinds;
  std::map<std::string, int> labels; // label -> ordinal
  ReturnKind return_kind = ReturnKind::Void;
  int stmt_count = 0;

  const Stmt *find(int ordinal) const;
  const Stmt *find_uid(int uid) const;
  bool is_param(const std::string &v) const;
};

struct Program {
  std::vector<FunctionDef> functions;

  const FunctionDef *find(const std::string &name) const;
  FunctionDef *find(const std::string &name);
  /// Callees before callers.
  std::vector<std::string> bottom_up_order() const;
};

bool same_shape(const Program &a, const Program &b);

enum class Anchor { Before, After };

struct Location {
  std::string function;
  int ordinal = 0;
  Anchor anchor = Anchor::After;
  bool operator==(const Location &) const = default;
  auto operator<=>(const Location &) const = default;
};

/// Visits every statement in pre-order.
template <typename Fn> void for_each_stmt(const std::vector<Stmt> &body, Fn &&fn) {
  for (const Stmt &s : body) {
    fn(s);
    for_each_stmt(s.then_body, fn);
    for_each_stmt(s.else_body, fn);
  }
}

template <typename Fn> void for_each_stmt_mut(std::vector<Stmt> &body, Fn &&fn) {
  for (Stmt &s : body) {
    fn(s);
    for_each_stmt_mut(s.then_body, fn);
    for_each_stmt_mut(s.else_body, fn);
  }
}

/// Validates the program and fills in derived per-function data (variable
/// kinds, labels, ordinals, return kind). Throws ProgramError.
void check_program(Program &program);

/// Number of AST nodes in a statement list / boolean expression.
int node_count(const std::vector<Stmt> &body);
int node_count(const BoolExpr &expr);

} // namespace heapfix
