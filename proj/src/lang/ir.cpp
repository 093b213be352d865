#include "heapfix/ir.hpp"

#include <functional>
#include <map>

namespace heapfix {

namespace {

class Lowering {
public:
  explicit Lowering(const FunctionDef &fn) { ir_.name = fn.name; ir_.params = fn.params; }

  FunctionIR run(const FunctionDef &fn) {
    lower_block(fn.body);
    Instr ret;
    ret.op = Instr::Op::Return;
    emit(ret);
    for (auto &[idx, label] : pending_gotos_)
      ir_.code[idx].next = label_pc_.at(label);
    return std::move(ir_);
  }

private:
  int emit(Instr in) {
    int pc = static_cast<int>(ir_.code.size());
    ir_.code.push_back(std::move(in));
    return pc;
  }
  int here() const { return static_cast<int>(ir_.code.size()); }

  static Instr from(const Stmt &s, Instr::Op op) {
    Instr in;
    in.op = op;
    in.ordinal = s.ordinal;
    in.uid = s.uid;
    in.pos = s.pos;
    return in;
  }

  void lower_block(const std::vector<Stmt> &body) {
    for (const Stmt &s : body)
      lower(s);
  }

  // Straight-line instructions fall through to pc + 1; patched below.
  void lower(const Stmt &s) {
    if (!s.label.empty())
      label_pc_[s.label] = here();
    int first = here();
    lower_kind(s);
    ir_.span[s.ordinal] = {first, here()};
  }

  void lower_kind(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Assign: {
      Instr in = from(s, Instr::Op::Assign);
      in.target = s.target;
      in.value = s.value;
      straight(std::move(in));
      break;
    }
    case StmtKind::Load: {
      Instr in = from(s, Instr::Op::Load);
      in.target = s.target;
      in.address = s.address;
      straight(std::move(in));
      break;
    }
    case StmtKind::Store: {
      Instr in = from(s, Instr::Op::Store);
      in.address = s.address;
      in.value = s.value;
      straight(std::move(in));
      break;
    }
    case StmtKind::Malloc: {
      Instr in = from(s, Instr::Op::Malloc);
      in.target = s.target;
      straight(std::move(in));
      break;
    }
    case StmtKind::Free: {
      Instr in = from(s, Instr::Op::Free);
      in.address = Operand::var(s.target);
      straight(std::move(in));
      break;
    }
    case StmtKind::Call: {
      Instr in = from(s, Instr::Op::Call);
      in.target = s.target;
      in.callee = s.callee;
      in.args = s.args;
      straight(std::move(in));
      break;
    }
    case StmtKind::Abort:
      emit(from(s, Instr::Op::Abort));
      break;
    case StmtKind::Return: {
      Instr in = from(s, Instr::Op::Return);
      in.value = s.value;
      in.has_value = s.has_value;
      emit(std::move(in));
      break;
    }
    case StmtKind::Skip:
      straight(from(s, Instr::Op::Nop));
      break;
    case StmtKind::Goto: {
      Instr in = from(s, Instr::Op::Jump);
      int pc = emit(std::move(in));
      pending_gotos_.emplace_back(pc, s.goto_label);
      break;
    }
    case StmtKind::If: {
      Instr br = from(s, Instr::Op::Branch);
      br.cond = s.cond;
      int br_pc = emit(std::move(br));
      ir_.code[br_pc].next = here();
      lower_block(s.then_body);
      Instr j;
      j.op = Instr::Op::Jump;
      int j_pc = emit(std::move(j));
      ir_.code[br_pc].next_else = here();
      lower_block(s.else_body);
      ir_.code[j_pc].next = here();
      break;
    }
    case StmtKind::While: {
      Instr br = from(s, Instr::Op::Branch);
      br.cond = s.cond;
      br.loop_head = true;
      int head = emit(std::move(br));
      ir_.code[head].next = here();
      lower_block(s.then_body);
      Instr j;
      j.op = Instr::Op::Jump;
      j.next = head;
      emit(std::move(j));
      ir_.code[head].next_else = here();
      break;
    }
    }
  }

  void straight(Instr in) {
    int pc = emit(std::move(in));
    ir_.code[pc].next = pc + 1;
  }

  FunctionIR ir_;
  std::map<std::string, int> label_pc_;
  std::vector<std::pair<int, std::string>> pending_gotos_;
};

} // namespace

FunctionIR lower_function(const FunctionDef &fn) { return Lowering(fn).run(fn); }

std::vector<std::string> used_vars(const Instr &in) {
  std::vector<std::string> out;
  auto add = [&](const Operand &o) {
    if (o.is_var())
      out.push_back(o.name);
  };
  add(in.address);
  add(in.value);
  for (const auto &a : in.args)
    add(a);
  std::function<void(const BoolExpr &)> cond = [&](const BoolExpr &b) {
    if (b.kind == BoolExpr::Kind::Rel) {
      add(b.lhs);
      add(b.rhs);
    }
    for (const auto &a : b.args)
      cond(a);
  };
  if (in.op == Instr::Op::Branch)
    cond(in.cond);
  return out;
}

std::vector<std::optional<std::set<std::string>>> assigned_before(const FunctionDef &fn,
                                                                  const FunctionIR &ir) {
  const size_t n = ir.code.size();
  std::vector<std::optional<std::set<std::string>>> in(n);
  if (n == 0)
    return in;
  std::set<std::string> entry;
  for (const auto &p : fn.params)
    entry.insert(p.name);
  in[0] = entry;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t pc = 0; pc < n; ++pc) {
      if (!in[pc])
        continue;
      const Instr &ins = ir.code[pc];
      std::set<std::string> out = *in[pc];
      if (!ins.target.empty())
        out.insert(ins.target);
      auto flow = [&](int succ) {
        if (succ < 0 || static_cast<size_t>(succ) >= n)
          return;
        auto &dst = in[succ];
        if (!dst) {
          dst = out;
          changed = true;
          return;
        }
        for (auto it = dst->begin(); it != dst->end();) {
          if (!out.count(*it)) {
            it = dst->erase(it);
            changed = true;
          } else {
            ++it;
          }
        }
      };
      switch (ins.op) {
      case Instr::Op::Return:
      case Instr::Op::Abort:
        break;
      case Instr::Op::Branch:
        flow(ins.next);
        flow(ins.next_else);
        break;
      default:
        flow(ins.next);
      }
    }
  }
  return in;
}

std::set<std::string> assigned_at(const FunctionDef &fn, int ordinal, Anchor anchor) {
  FunctionIR ir = lower_function(fn);
  auto in = assigned_before(fn, ir);
  auto it = ir.span.find(ordinal);
  if (it == ir.span.end())
    return {};
  auto [first, end] = it->second;
  if (anchor == Anchor::Before)
    return in[first] ? *in[first] : std::set<std::string>{};
  if (static_cast<size_t>(end) < in.size() && in[end])
    return *in[end];
  std::set<std::string> out = in[first] ? *in[first] : std::set<std::string>{};
  const Stmt *s = fn.find(ordinal);
  if (s && !s->target.empty() && s->kind != StmtKind::Free)
    out.insert(s->target);
  return out;
}

} // namespace heapfix
