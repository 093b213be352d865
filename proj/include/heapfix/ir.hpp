#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heapfix/ast.hpp"

namespace heapfix {

/// Flat control-flow form of one function, shared by the symbolic engine and
/// the definite-assignment check. Structured commands lower to branches and
/// jumps; every instruction remembers the statement it came from.
struct Instr {
  enum class Op { Assign, Load, Store, Malloc, Free, Call, Abort, Return, Branch, Jump, Nop };
  Op op = Op::Nop;

  std::string target;
  Operand address;
  Operand value;
  bool has_value = false;
  std::string callee;
  std::vector<Operand> args;
  BoolExpr cond;

  int next = -1;      // fall-through / jump / branch-true successor
  int next_else = -1; // branch-false successor
  bool loop_head = false;

  int ordinal = -1; // -1 for synthetic instructions (jumps, implicit return)
  int uid = -1;
  SourcePos pos;
};

struct FunctionIR {
  std::string name;
  std::vector<Param> params;
  std::vector<Instr> code;
  // ordinal -> [first pc, pc just past the statement's code)
  std::map<int, std::pair<int, int>> span;
};

FunctionIR lower_function(const FunctionDef &fn);

/// Variables read by an instruction.
std::vector<std::string> used_vars(const Instr &in);

/// Must-assigned variables on entry to each instruction; nullopt where the
/// instruction is unreachable.
std::vector<std::optional<std::set<std::string>>> assigned_before(const FunctionDef &fn,
                                                                  const FunctionIR &ir);

/// Variables definitely assigned at a statement location.
std::set<std::string> assigned_at(const FunctionDef &fn, int ordinal, Anchor anchor);

} // namespace heapfix
