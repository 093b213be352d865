#include "heapfix/ast.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "heapfix/ir.hpp"

namespace heapfix {

const char *to_string(VarKind kind) { return kind == VarKind::Ptr ? "ptr" : "int"; }

std::string ProgramError::format(const std::string &msg, SourcePos pos) {
  std::ostringstream os;
  if (pos.line > 0)
    os << pos.line << ":" << pos.col << ": ";
  os << msg;
  return os.str();
}

const char *to_string(RelOp op) {
  switch (op) {
  case RelOp::Lt: return "<";
  case RelOp::Le: return "<=";
  case RelOp::Eq: return "==";
  case RelOp::Ne: return "!=";
  case RelOp::Gt: return ">";
  case RelOp::Ge: return ">=";
  }
  return "?";
}

RelOp negate(RelOp op) {
  switch (op) {
  case RelOp::Lt: return RelOp::Ge;
  case RelOp::Le: return RelOp::Gt;
  case RelOp::Eq: return RelOp::Ne;
  case RelOp::Ne: return RelOp::Eq;
  case RelOp::Gt: return RelOp::Le;
  case RelOp::Ge: return RelOp::Lt;
  }
  return op;
}

RelOp flip(RelOp op) {
  switch (op) {
  case RelOp::Lt: return RelOp::Gt;
  case RelOp::Le: return RelOp::Ge;
  case RelOp::Gt: return RelOp::Lt;
  case RelOp::Ge: return RelOp::Le;
  default: return op;
  }
}

bool same_shape(const Stmt &a, const Stmt &b) {
  return a.kind == b.kind && a.target == b.target && a.address == b.address && a.value == b.value &&
         a.has_value == b.has_value && a.callee == b.callee && a.args == b.args && a.cond == b.cond &&
         a.has_else == b.has_else && a.label == b.label && a.goto_label == b.goto_label &&
         same_shape(a.then_body, b.then_body) && same_shape(a.else_body, b.else_body);
}

bool same_shape(const std::vector<Stmt> &a, const std::vector<Stmt> &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_shape(a[i], b[i]))
      return false;
  return true;
}

bool same_shape(const Program &a, const Program &b) {
  if (a.functions.size() != b.functions.size())
    return false;
  for (size_t i = 0; i < a.functions.size(); ++i) {
    const auto &fa = a.functions[i];
    const auto &fb = b.functions[i];
    if (fa.name != fb.name || fa.params != fb.params || !same_shape(fa.body, fb.body))
      return false;
  }
  return true;
}

const Stmt *FunctionDef::find(int ordinal) const {
  const Stmt *hit = nullptr;
  for_each_stmt(body, [&](const Stmt &s) {
    if (s.ordinal == ordinal)
      hit = &s;
  });
  return hit;
}

const Stmt *FunctionDef::find_uid(int uid) const {
  const Stmt *hit = nullptr;
  for_each_stmt(body, [&](const Stmt &s) {
    if (s.uid == uid)
      hit = &s;
  });
  return hit;
}

bool FunctionDef::is_param(const std::string &v) const {
  return std::any_of(params.begin(), params.end(), [&](const Param &p) { return p.name == v; });
}

const FunctionDef *Program::find(const std::string &name) const {
  for (const auto &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

FunctionDef *Program::find(const std::string &name) {
  for (auto &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

namespace {

std::set<std::string> callees_of(const FunctionDef &fn) {
  std::set<std::string> out;
  for_each_stmt(fn.body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Call)
      out.insert(s.callee);
  });
  return out;
}

} // namespace

std::vector<std::string> Program::bottom_up_order() const {
  std::vector<std::string> order;
  std::set<std::string> done;
  std::function<void(const FunctionDef &)> visit = [&](const FunctionDef &fn) {
    if (!done.insert(fn.name).second)
      return;
    for (const auto &c : callees_of(fn))
      if (const FunctionDef *callee = find(c))
        visit(*callee);
    order.push_back(fn.name);
  };
  for (const auto &fn : functions)
    visit(fn);
  return order;
}

int node_count(const BoolExpr &expr) {
  int n = 1;
  if (expr.kind == BoolExpr::Kind::Rel)
    n += 2;
  for (const auto &a : expr.args)
    n += node_count(a);
  return n;
}

int node_count(const std::vector<Stmt> &body) {
  int n = 0;
  for (const Stmt &s : body) {
    n += 1;
    switch (s.kind) {
    case StmtKind::Assign:
    case StmtKind::Load:
    case StmtKind::Malloc:
      n += 2;
      break;
    case StmtKind::Store:
      n += 2;
      break;
    case StmtKind::Free:
    case StmtKind::Goto:
      n += 1;
      break;
    case StmtKind::Call:
      n += 1 + static_cast<int>(s.args.size()) + (s.target.empty() ? 0 : 1);
      break;
    case StmtKind::Return:
      n += s.has_value ? 1 : 0;
      break;
    case StmtKind::If:
    case StmtKind::While:
      n += node_count(s.cond);
      break;
    case StmtKind::Skip:
    case StmtKind::Abort:
      break;
    }
    n += node_count(s.then_body) + node_count(s.else_body);
  }
  return n;
}

namespace {

class Checker {
public:
  explicit Checker(Program &p) : program_(p) {}

  void run() {
    std::set<std::string> names;
    for (auto &fn : program_.functions)
      if (!names.insert(fn.name).second)
        throw ProgramError("duplicate function '" + fn.name + "'", fn.pos);
    for (auto &fn : program_.functions)
      for_each_stmt(fn.body, [&](const Stmt &s) {
        if (s.kind == StmtKind::Call && !program_.find(s.callee))
          throw ProgramError("call to undefined function '" + s.callee + "'", s.pos);
      });
    check_acyclic();
    for (const auto &name : program_.bottom_up_order())
      check_function(*program_.find(name));
  }

private:
  void check_acyclic() {
    std::map<std::string, int> state; // 0 new, 1 active, 2 done
    std::function<void(const FunctionDef &)> dfs = [&](const FunctionDef &fn) {
      state[fn.name] = 1;
      for (const auto &c : callees_of(fn)) {
        int st = state[c];
        if (st == 1)
          throw ProgramError("recursion through '" + c + "' is not supported", fn.pos);
        if (st == 0)
          dfs(*program_.find(c));
      }
      state[fn.name] = 2;
    };
    for (const auto &fn : program_.functions)
      if (state[fn.name] == 0)
        dfs(fn);
  }

  void check_function(FunctionDef &fn) {
    fn.var_kinds.clear();
    fn.labels.clear();
    fn.return_kind = ReturnKind::Void;
    std::set<std::string> seen_params;
    for (const auto &p : fn.params) {
      if (!seen_params.insert(p.name).second)
        throw ProgramError("duplicate parameter '" + p.name + "'", fn.pos);
      fn.var_kinds[p.name] = p.kind;
    }

    int ordinal = 0;
    for_each_stmt_mut(fn.body, [&](Stmt &s) { s.ordinal = ordinal++; });
    fn.stmt_count = ordinal;

    check_labels(fn);
    for_each_stmt_mut(fn.body, [&](Stmt &s) { check_kinds(fn, s); });
    check_definite_assignment(fn);
  }

  void check_labels(FunctionDef &fn) {
    std::map<std::string, int> label_loop;
    std::vector<std::pair<const Stmt *, int>> gotos;
    std::function<void(const std::vector<Stmt> &, int)> walk = [&](const std::vector<Stmt> &body,
                                                                     int loop) {
      for (const Stmt &s : body) {
        if (!s.label.empty()) {
          if (fn.labels.count(s.label))
            throw ProgramError("duplicate label '" + s.label + "'", s.pos);
          fn.labels[s.label] = s.ordinal;
          label_loop[s.label] = loop;
        }
        if (s.kind == StmtKind::Goto)
          gotos.emplace_back(&s, loop);
        walk(s.then_body, s.kind == StmtKind::While ? s.uid * 2 + 1 : loop);
        walk(s.else_body, loop);
      }
    };
    // Loop identity only needs to be unique per function; uids are unique.
    walk(fn.body, 0);
    for (auto [g, loop] : gotos) {
      auto it = label_loop.find(g->goto_label);
      if (it == label_loop.end())
        throw ProgramError("undefined label '" + g->goto_label + "'", g->pos);
      if (it->second != loop)
        throw ProgramError("goto '" + g->goto_label + "' crosses a while-loop boundary", g->pos);
    }
  }

  VarKind kind_of(const FunctionDef &fn, const Operand &op, SourcePos pos) {
    switch (op.kind) {
    case Operand::Kind::Null:
      return VarKind::Ptr;
    case Operand::Kind::Int:
      return VarKind::Int;
    case Operand::Kind::Var: {
      auto it = fn.var_kinds.find(op.name);
      if (it == fn.var_kinds.end())
        throw ProgramError("undefined variable '" + op.name + "'", pos);
      return it->second;
    }
    }
    return VarKind::Int;
  }

  void define(FunctionDef &fn, const std::string &v, VarKind k, SourcePos pos) {
    auto [it, fresh] = fn.var_kinds.emplace(v, k);
    if (!fresh && it->second != k)
      throw ProgramError("variable '" + v + "' used as both ptr and int", pos);
  }

  void expect(const FunctionDef &fn, const Operand &op, VarKind k, SourcePos pos, const char *what) {
    if (kind_of(fn, op, pos) != k)
      throw ProgramError(std::string(what) + " must be " + to_string(k), pos);
  }

  void check_cond(const FunctionDef &fn, const BoolExpr &b, SourcePos pos) {
    if (b.kind == BoolExpr::Kind::Rel) {
      VarKind l = kind_of(fn, b.lhs, pos);
      VarKind r = kind_of(fn, b.rhs, pos);
      if (l != r)
        throw ProgramError("comparison between ptr and int", pos);
      if (l == VarKind::Ptr && b.op != RelOp::Eq && b.op != RelOp::Ne)
        throw ProgramError("pointers only support == and !=", pos);
    }
    for (const auto &a : b.args)
      check_cond(fn, a, pos);
  }

  void check_kinds(FunctionDef &fn, Stmt &s) {
    switch (s.kind) {
    case StmtKind::Assign:
      define(fn, s.target, kind_of(fn, s.value, s.pos), s.pos);
      break;
    case StmtKind::Load:
      expect(fn, s.address, VarKind::Ptr, s.pos, "load address");
      define(fn, s.target, VarKind::Ptr, s.pos);
      break;
    case StmtKind::Store:
      expect(fn, s.address, VarKind::Ptr, s.pos, "store address");
      expect(fn, s.value, VarKind::Ptr, s.pos, "stored value");
      break;
    case StmtKind::Malloc:
      define(fn, s.target, VarKind::Ptr, s.pos);
      break;
    case StmtKind::Free:
      expect(fn, Operand::var(s.target), VarKind::Ptr, s.pos, "freed value");
      break;
    case StmtKind::Call: {
      const FunctionDef &callee = *program_.find(s.callee);
      if (callee.params.size() != s.args.size())
        throw ProgramError("wrong number of arguments to '" + s.callee + "'", s.pos);
      for (size_t i = 0; i < s.args.size(); ++i)
        expect(fn, s.args[i], callee.params[i].kind, s.pos, "argument");
      if (!s.target.empty()) {
        if (callee.return_kind == ReturnKind::Void)
          throw ProgramError("'" + s.callee + "' returns no value", s.pos);
        define(fn, s.target, callee.return_kind == ReturnKind::Ptr ? VarKind::Ptr : VarKind::Int,
               s.pos);
      }
      break;
    }
    case StmtKind::If:
    case StmtKind::While:
      check_cond(fn, s.cond, s.pos);
      break;
    case StmtKind::Return: {
      if (!s.has_value)
        break;
      ReturnKind rk = kind_of(fn, s.value, s.pos) == VarKind::Ptr ? ReturnKind::Ptr : ReturnKind::Int;
      if (fn.return_kind != ReturnKind::Void && fn.return_kind != rk)
        throw ProgramError("function '" + fn.name + "' returns both ptr and int", s.pos);
      fn.return_kind = rk;
      break;
    }
    case StmtKind::Goto:
    case StmtKind::Skip:
    case StmtKind::Abort:
      break;
    }
  }

  void check_definite_assignment(const FunctionDef &fn) {
    FunctionIR ir = lower_function(fn);
    auto in = assigned_before(fn, ir);
    for (size_t pc = 0; pc < ir.code.size(); ++pc) {
      if (!in[pc])
        continue;
      for (const auto &v : used_vars(ir.code[pc]))
        if (!in[pc]->count(v))
          throw ProgramError("variable '" + v + "' may be used before assignment", ir.code[pc].pos);
    }
  }

  Program &program_;
};

} // namespace

void check_program(Program &program) { Checker(program).run(); }

} // namespace heapfix
