#pragma once

// Bounded exhaustive concrete interpreter used as a test oracle. Every
// nondeterministic input (parameter values, contents of input cells,
// allocation outcome) is a choice point, made on first use; run_all
// enumerates every choice sequence depth-first.

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "heapfix/engine.hpp"
#include "heapfix/ir.hpp"

namespace interp {

using heapfix::BugKind;

constexpr long kNull = 0;
constexpr long kGarbage = std::numeric_limits<long>::min();
constexpr long kUnread = kGarbage + 1; // entry parameter not chosen yet

struct Cell {
  long content = kGarbage;
  bool known = false; // input cells get their content on first read
  bool input = false;
  bool freed = false;
};

struct Outcome {
  enum class Kind { Ok, Err, Abort, Cut } kind = Kind::Ok;
  BugKind bug = BugKind::Npe;
  std::string function;
  int uid = 0;
  std::set<int> executed; // uids of executed statements of the entry function
};

class Chooser {
public:
  explicit Chooser(std::vector<int> prefix) : prefix_(std::move(prefix)) {}
  int choose(int n) {
    int c = pos_ < prefix_.size() ? prefix_[pos_] : 0;
    if (pos_ >= prefix_.size())
      prefix_.push_back(0);
    arity_.push_back(n);
    ++pos_;
    return c;
  }
  const std::vector<int> &taken() const { return prefix_; }
  const std::vector<int> &arity() const { return arity_; }

private:
  std::vector<int> prefix_;
  std::vector<int> arity_;
  size_t pos_ = 0;
};

struct Cut {};
struct Fault {
  Outcome o;
};

class Machine {
public:
  Machine(const heapfix::Program &p, Chooser &ch, std::vector<long> ints, int unroll)
      : p_(p), ch_(ch), ints_(std::move(ints)), unroll_(unroll) {}

  Outcome run(const std::string &fn) {
    Outcome o;
    try {
      const auto &def = *p_.find(fn);
      for (const auto &par : def.params)
        unread_[par.name] = par.kind;
      std::vector<long> args(def.params.size(), kUnread);
      o.kind = Outcome::Kind::Ok;
      call(fn, args, &o.executed);
      if (aborted_)
        o.kind = Outcome::Kind::Abort;
    } catch (const Cut &) {
      o.kind = Outcome::Kind::Cut;
    } catch (Fault &f) {
      f.o.executed = o.executed;
      return f.o;
    }
    return o;
  }

private:
  long input_ptr() {
    std::vector<long> inputs;
    for (const auto &[id, c] : heap_)
      if (c.input)
        inputs.push_back(id);
    int c = ch_.choose(static_cast<int>(inputs.size()) + 2);
    if (c == 0)
      return kNull;
    if (c <= static_cast<int>(inputs.size()))
      return inputs[static_cast<size_t>(c - 1)];
    long id = next_++;
    heap_[id].input = true;
    return id;
  }

  [[noreturn]] void fault(BugKind k, const std::string &fn, int uid) {
    Fault f;
    f.o.kind = Outcome::Kind::Err;
    f.o.bug = k;
    f.o.function = fn;
    f.o.uid = uid;
    throw f;
  }

  Cell &deref(long v, const heapfix::Instr &in, const std::string &fn, bool is_free) {
    if (v == kGarbage)
      throw Cut{};
    if (v == kNull)
      fault(BugKind::Npe, fn, in.uid);
    Cell &c = heap_.at(v);
    if (c.freed)
      fault(is_free ? BugKind::DoubleFree : BugKind::UseAfterFree, fn, in.uid);
    return c;
  }

  long content(Cell &c) {
    if (c.input && !c.known) {
      c.content = input_ptr();
      c.known = true;
    }
    return c.content;
  }

  bool cond(const heapfix::BoolExpr &b, std::map<std::string, long> &env) {
    using K = heapfix::BoolExpr::Kind;
    switch (b.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Not: return !cond(b.args[0], env);
    case K::And: return cond(b.args[0], env) && cond(b.args[1], env);
    case K::Or: return cond(b.args[0], env) || cond(b.args[1], env);
    case K::Rel: {
      long l = val(b.lhs, env), r = val(b.rhs, env);
      if (l == kGarbage || r == kGarbage)
        throw Cut{};
      switch (b.op) {
      case heapfix::RelOp::Lt: return l < r;
      case heapfix::RelOp::Le: return l <= r;
      case heapfix::RelOp::Eq: return l == r;
      case heapfix::RelOp::Ne: return l != r;
      case heapfix::RelOp::Gt: return l > r;
      case heapfix::RelOp::Ge: return l >= r;
      }
    }
    }
    return false;
  }

  long val(const heapfix::Operand &op, std::map<std::string, long> &env) {
    switch (op.kind) {
    case heapfix::Operand::Kind::Null: return kNull;
    case heapfix::Operand::Kind::Int: return op.value;
    case heapfix::Operand::Kind::Var: {
      long &v = env.at(op.name);
      if (v == kUnread) {
        v = unread_.at(op.name) == heapfix::VarKind::Ptr ? input_ptr()
                                                         : ints_[static_cast<size_t>(ch_.choose(static_cast<int>(ints_.size())))];
        chosen_[op.name] = v;
      }
      return v;
    }
    }
    return kNull;
  }

  std::optional<long> call(const std::string &fn, const std::vector<long> &args, std::set<int> *executed) {
    const auto &def = *p_.find(fn);
    heapfix::FunctionIR ir = heapfix::lower_function(def);
    std::map<std::string, long> env;
    std::vector<std::string> root_params;
    std::vector<long> roots;
    for (size_t i = 0; i < def.params.size(); ++i) {
      env[def.params[i].name] = args[i];
      if (def.params[i].kind == heapfix::VarKind::Ptr) {
        if (args[i] == kUnread)
          root_params.push_back(def.params[i].name);
        else
          roots.push_back(args[i]);
      }
    }
    std::map<int, int> iters, jumps;
    long first_cell = next_;
    int pc = 0;
    int last_uid = 0;
    using Op = heapfix::Instr::Op;
    while (true) {
      const heapfix::Instr &in = ir.code[static_cast<size_t>(pc)];
      if (in.ordinal >= 0) {
        last_uid = in.uid;
        if (executed)
          executed->insert(in.uid);
      }
      switch (in.op) {
      case Op::Assign:
        env[in.target] = val(in.value, env);
        pc = in.next;
        break;
      case Op::Load: {
        Cell &c = deref(val(in.address, env), in, fn, false);
        env[in.target] = content(c);
        pc = in.next;
        break;
      }
      case Op::Store: {
        Cell &c = deref(val(in.address, env), in, fn, false);
        c.content = val(in.value, env);
        c.known = true;
        pc = in.next;
        break;
      }
      case Op::Free: {
        if (val(in.address, env) == kNull) {
          pc = in.next;
          break;
        }
        Cell &c = deref(val(in.address, env), in, fn, true);
        c.freed = true;
        pc = in.next;
        break;
      }
      case Op::Malloc:
        if (ch_.choose(2) == 0) {
          env[in.target] = kNull;
        } else {
          long id = next_++;
          heap_[id] = Cell{};
          env[in.target] = id;
        }
        pc = in.next;
        break;
      case Op::Call: {
        std::vector<long> a;
        for (const auto &op : in.args)
          a.push_back(val(op, env));
        auto r = call(in.callee, a, nullptr);
        if (aborted_)
          return std::nullopt;
        if (!in.target.empty())
          env[in.target] = r ? *r : kNull;
        pc = in.next;
        break;
      }
      case Op::Abort:
        aborted_ = true;
        return std::nullopt;
      case Op::Return: {
        std::optional<long> r;
        if (in.has_value)
          r = val(in.value, env);
        std::vector<long> frontier = roots;
        // an entry parameter never read cannot lead to a cell of this run
        for (const auto &name : root_params)
          if (auto it = chosen_.find(name); it != chosen_.end())
            frontier.push_back(it->second);
        if (r && def.return_kind == heapfix::ReturnKind::Ptr)
          frontier.push_back(*r);
        std::set<long> seen;
        while (!frontier.empty()) {
          long v = frontier.back();
          frontier.pop_back();
          auto it = heap_.find(v);
          if (v <= 0 || it == heap_.end() || it->second.freed || !seen.insert(v).second)
            continue;
          if (it->second.known || !it->second.input)
            frontier.push_back(it->second.content);
        }
        for (const auto &[id, c] : heap_)
          if (id >= first_cell && !c.input && !c.freed && !seen.count(id))
            fault(BugKind::Leak, fn, in.ordinal >= 0 ? in.uid : last_uid);
        return r;
      }
      case Op::Branch: {
        bool v = cond(in.cond, env);
        if (in.loop_head) {
          if (v && iters[pc] >= unroll_)
            throw Cut{};
          if (v)
            ++iters[pc];
          else
            iters.erase(pc);
        }
        pc = v ? in.next : in.next_else;
        break;
      }
      case Op::Jump:
        if (in.ordinal >= 0 && ++jumps[pc] > (unroll_ + 1) * (unroll_ + 1))
          throw Cut{};
        pc = in.next;
        break;
      case Op::Nop:
        pc = in.next;
        break;
      }
    }
  }

  const heapfix::Program &p_;
  Chooser &ch_;
  std::vector<long> ints_;
  int unroll_;
  std::map<long, Cell> heap_;
  std::map<std::string, heapfix::VarKind> unread_;
  std::map<std::string, long> chosen_;
  long next_ = 1;
  bool aborted_ = false;
};

/// Integer inputs: {-1, 0, 1} plus every literal of the program and its
/// neighbours.
inline std::vector<long> int_domain(const heapfix::Program &p) {
  std::set<long> d{-1, 0, 1};
  auto add = [&](const heapfix::Operand &op) {
    if (op.kind == heapfix::Operand::Kind::Int)
      for (long k = -1; k <= 1; ++k)
        d.insert(op.value + k);
  };
  std::function<void(const heapfix::BoolExpr &)> walk = [&](const heapfix::BoolExpr &b) {
    add(b.lhs);
    add(b.rhs);
    for (const auto &a : b.args)
      walk(a);
  };
  for (const auto &fn : p.functions)
    heapfix::for_each_stmt(fn.body, [&](const heapfix::Stmt &s) {
      add(s.value);
      for (const auto &a : s.args)
        add(a);
      walk(s.cond);
    });
  return {d.begin(), d.end()};
}

/// Every bounded execution of `fn`, or as many as `limit` allows.
inline std::vector<Outcome> run_all(const heapfix::Program &p, const std::string &fn, int unroll = 2,
                                    size_t limit = 200000) {
  std::vector<long> ints = int_domain(p);
  std::vector<Outcome> out;
  std::vector<int> prefix;
  while (out.size() < limit) {
    Chooser ch(prefix);
    Machine m(p, ch, ints, unroll);
    out.push_back(m.run(fn));
    std::vector<int> taken = ch.taken();
    const auto &arity = ch.arity();
    taken.resize(arity.size());
    while (!taken.empty() && taken.back() + 1 >= arity[taken.size() - 1])
      taken.pop_back();
    if (taken.empty())
      break;
    ++taken.back();
    prefix = taken;
  }
  return out;
}

inline bool reproduces(const heapfix::Program &p, const heapfix::Bug &b, int unroll = 2) {
  for (const auto &o : run_all(p, b.function, unroll))
    if (o.kind == Outcome::Kind::Err && o.function == b.function && o.bug == b.kind &&
        o.uid == b.culprit_uid)
      return true;
  return false;
}

} // namespace interp
