#include <sstream>

#include "heapfix/parser.hpp"

namespace heapfix {

namespace {

int precedence(const BoolExpr &e) {
  switch (e.kind) {
  case BoolExpr::Kind::Or: return 1;
  case BoolExpr::Kind::And: return 2;
  default: return 3;
  }
}

std::string wrap(const BoolExpr &e, int min_prec) {
  std::string s = print_bool_expr(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

std::string args_text(const std::vector<Operand> &args) {
  std::string s;
  for (size_t i = 0; i < args.size(); ++i) {
    if (i)
      s += ", ";
    s += print_operand(args[i]);
  }
  return s;
}

void print_block(std::ostringstream &os, const std::vector<Stmt> &body, int indent);

void print_stmt(std::ostringstream &os, const Stmt &s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  if (!s.label.empty())
    os << s.label << ": ";
  switch (s.kind) {
  case StmtKind::Assign:
    os << s.target << " := " << print_operand(s.value) << ";\n";
    break;
  case StmtKind::Load:
    os << s.target << " := [" << print_operand(s.address) << "];\n";
    break;
  case StmtKind::Store:
    os << "[" << print_operand(s.address) << "] := " << print_operand(s.value) << ";\n";
    break;
  case StmtKind::Malloc:
    os << s.target << " := malloc();\n";
    break;
  case StmtKind::Free:
    os << "free(" << s.target << ");\n";
    break;
  case StmtKind::Call:
    if (!s.target.empty())
      os << s.target << " := ";
    os << s.callee << "(" << args_text(s.args) << ");\n";
    break;
  case StmtKind::Return:
    os << "return";
    if (s.has_value)
      os << " " << print_operand(s.value);
    os << ";\n";
    break;
  case StmtKind::Goto:
    os << "goto " << s.goto_label << ";\n";
    break;
  case StmtKind::Skip:
    os << "skip;\n";
    break;
  case StmtKind::Abort:
    os << "abort();\n";
    break;
  case StmtKind::If:
    os << "if (" << print_bool_expr(s.cond) << ") {\n";
    print_block(os, s.then_body, indent + 1);
    os << pad << "}";
    if (s.has_else) {
      os << " else {\n";
      print_block(os, s.else_body, indent + 1);
      os << pad << "}";
    }
    os << "\n";
    break;
  case StmtKind::While:
    os << "while (" << print_bool_expr(s.cond) << ") {\n";
    print_block(os, s.then_body, indent + 1);
    os << pad << "}\n";
    break;
  }
}

void print_block(std::ostringstream &os, const std::vector<Stmt> &body, int indent) {
  for (const Stmt &s : body)
    print_stmt(os, s, indent);
}

} // namespace

std::string print_operand(const Operand &op) {
  switch (op.kind) {
  case Operand::Kind::Null: return "NULL";
  case Operand::Kind::Int: return std::to_string(op.value);
  case Operand::Kind::Var: return op.name;
  }
  return "?";
}

std::string print_bool_expr(const BoolExpr &e) {
  switch (e.kind) {
  case BoolExpr::Kind::True: return "true";
  case BoolExpr::Kind::False: return "false";
  case BoolExpr::Kind::Or: return wrap(e.args[0], 1) + " || " + wrap(e.args[1], 2);
  case BoolExpr::Kind::And: return wrap(e.args[0], 2) + " && " + wrap(e.args[1], 3);
  case BoolExpr::Kind::Not: return "!(" + print_bool_expr(e.args[0]) + ")";
  case BoolExpr::Kind::Rel:
    return print_operand(e.lhs) + " " + to_string(e.op) + " " + print_operand(e.rhs);
  }
  return "?";
}

std::string print_stmts(const std::vector<Stmt> &body, int indent) {
  std::ostringstream os;
  print_block(os, body, indent);
  return os.str();
}

std::string print_function(const FunctionDef &fn) {
  std::ostringstream os;
  os << "fn " << fn.name << "(";
  for (size_t i = 0; i < fn.params.size(); ++i) {
    if (i)
      os << ", ";
    os << fn.params[i].name << ": " << to_string(fn.params[i].kind);
  }
  os << ") {\n";
  print_block(os, fn.body, 1);
  os << "}\n";
  return os.str();
}

std::string print_program(const Program &program) {
  std::string out;
  for (size_t i = 0; i < program.functions.size(); ++i) {
    if (i)
      out += "\n";
    out += print_function(program.functions[i]);
  }
  return out;
}

} // namespace heapfix
