#pragma once

#include <string_view>

#include "heapfix/ast.hpp"

namespace heapfix {

/// Parses and checks a program in the `.mc` concrete syntax. Every statement
/// gets `uid == ordinal`. Throws ProgramError on syntax or semantic errors.
Program parse_program(std::string_view source);

/// Parses a standalone boolean expression (used by tests and bindings).
BoolExpr parse_bool_expr(std::string_view source);

/// Parses a statement list without braces, e.g. `if (p == NULL) { return NULL; }`.
/// The result is not checked against any function scope.
std::vector<Stmt> parse_stmts(std::string_view source);

/// Pretty printer. `parse_program(print_program(p))` is shape-equal to `p`.
std::string print_program(const Program &program);
std::string print_function(const FunctionDef &fn);
std::string print_stmts(const std::vector<Stmt> &body, int indent = 0);
std::string print_bool_expr(const BoolExpr &expr);
std::string print_operand(const Operand &op);

} // namespace heapfix
