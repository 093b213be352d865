#include "heapfix/engine.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>

#include "heapfix/ir.hpp"

namespace heapfix {

const char *to_string(Exit e) {
  switch (e) {
  case Exit::Ok: return "ok";
  case Exit::Err: return "err";
  case Exit::Abort: return "abort";
  }
  return "?";
}

const char *to_string(BugKind k) {
  switch (k) {
  case BugKind::Npe: return "npe";
  case BugKind::Leak: return "leak";
  case BugKind::DoubleFree: return "double_free";
  case BugKind::UseAfterFree: return "use_after_free";
  }
  return "?";
}

namespace {

std::string uid_tag(int uid) { return uid >= 0 ? std::to_string(uid) : "p" + std::to_string(-uid); }

struct State {
  int pc = 0;
  std::map<std::string, Term> env;
  PureFormula pure;
  std::map<std::string, Term> heap;
  std::set<std::string> freed;
  std::map<std::string, Term> pre_heap;
  std::set<std::string> inputs;
  std::set<std::string> allocated; // non-nil results of malloc in this frame
  std::vector<int> trace;
  int last_uid = 0;
  int last_ordinal = -1;
  SourcePos last_pos;
  std::map<int, int> loop_iters; // loop-head pc -> iterations of the current entry
  std::map<int, int> jumps;      // goto pc -> visits
  std::map<int, int> sites;      // uid -> executions, for naming
};

enum class Res { Cell, Freed, Nil, Fresh, Unknown };

struct Resolved {
  Res kind = Res::Unknown;
  std::string loc;
};

Resolved resolve(const State &s, const Term &v) {
  if (v.is_nil())
    return {Res::Nil, {}};
  if (!v.is_sym())
    return {};
  AliasClosure ac(s.pure);
  if (ac.same(v, Term::nil()))
    return {Res::Nil, {}};
  for (const auto &[loc, c] : s.heap)
    if (loc == v.name || ac.same(v, Term::sym(loc)))
      return {Res::Cell, loc};
  for (const auto &loc : s.freed)
    if (loc == v.name || ac.same(v, Term::sym(loc)))
      return {Res::Freed, loc};
  if (s.inputs.count(v.name))
    return {Res::Fresh, v.name};
  for (const auto &in : s.inputs)
    if (ac.same(v, Term::sym(in)))
      return {Res::Fresh, in};
  return {};
}

// Assumes the input value `loc` points to a cell of its own.
void materialize(State &s, const std::string &loc) {
  Term content = Term::sym(loc + ".c");
  s.pure.add(Literal::ptr(Term::sym(loc), RelOp::Ne, Term::nil()));
  s.heap[loc] = content;
  s.pre_heap[loc] = content;
  s.inputs.insert(content.name);
}

// Pure satisfiability plus separation: live and freed cells are pairwise
// distinct and non-nil, and no allocation equals an input value.
bool feasible(const State &s) {
  AliasClosure ac(s.pure);
  if (!ac.consistent())
    return false;
  std::set<Term> reps;
  auto fresh = [&](const std::string &loc) {
    Term r = ac.rep(Term::sym(loc));
    return !r.is_nil() && reps.insert(r).second;
  };
  for (const auto &[loc, c] : s.heap)
    if (!fresh(loc))
      return false;
  for (const auto &loc : s.freed)
    if (!fresh(loc))
      return false;
  if (!s.allocated.empty()) {
    std::set<Term> in;
    for (const auto &i : s.inputs)
      in.insert(ac.rep(Term::sym(i)));
    for (const auto &a : s.allocated)
      if (in.count(ac.rep(Term::sym(a))))
        return false;
  }
  return sat(s.pure);
}

class Machine {
public:
  Machine(const Program &program, const FunctionDef &fn, const AnalysisConfig &cfg,
          std::function<const Footprint &(const std::string &)> callee)
      : program_(program), fn_(fn), cfg_(cfg), callee_(std::move(callee)), ir_(lower_function(fn)) {
    out_.function = fn.name;
  }

  Footprint run() {
    State init;
    for (const auto &p : fn_.params) {
      init.env[p.name] = Term::sym(p.name);
      init.inputs.insert(p.name);
    }
    work_.push_back(std::move(init));
    while (!work_.empty() && !stopped_) {
      State s = std::move(work_.back());
      work_.pop_back();
      step(std::move(s));
    }
    return std::move(out_);
  }

private:
  void diag(const std::string &msg) {
    if (std::find(out_.diagnostics.begin(), out_.diagnostics.end(), msg) == out_.diagnostics.end())
      out_.diagnostics.push_back(msg);
  }

  Term eval(const State &s, const Operand &op) const {
    switch (op.kind) {
    case Operand::Kind::Null: return Term::nil();
    case Operand::Kind::Int: return Term::integer(op.value);
    case Operand::Kind::Var: return s.env.at(op.name);
    }
    return Term::nil();
  }

  Sort sort_of(const Operand &op) const {
    if (op.kind == Operand::Kind::Null)
      return Sort::Ptr;
    if (op.kind == Operand::Kind::Int)
      return Sort::Int;
    return fn_.var_kinds.at(op.name) == VarKind::Ptr ? Sort::Ptr : Sort::Int;
  }

  void push(State s) { pending_.push_back(std::move(s)); }

  void step(State s) {
    const Instr &in = ir_.code[static_cast<size_t>(s.pc)];
    if (in.ordinal >= 0) {
      s.trace.push_back(in.ordinal);
      s.last_uid = in.uid;
      s.last_ordinal = in.ordinal;
      s.last_pos = in.pos;
    }
    pending_.clear();
    exec(std::move(s), in);
    // depth-first, first successor explored first
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it)
      work_.push_back(std::move(*it));
    pending_.clear();
  }

  void exec(State s, const Instr &in) {
    switch (in.op) {
    case Instr::Op::Assign:
      s.env[in.target] = eval(s, in.value);
      s.pc = in.next;
      push(std::move(s));
      return;
    case Instr::Op::Load:
    case Instr::Op::Store:
    case Instr::Op::Free:
      access(std::move(s), in);
      return;
    case Instr::Op::Malloc: {
      int k = ++s.sites[in.uid];
      std::string name = in.target + "@" + uid_tag(in.uid) + (k > 1 ? "#" + std::to_string(k) : "");
      Term cell = Term::sym(name);
      State fail = s;
      fail.pure.add(Literal::ptr(cell, RelOp::Eq, Term::nil()));
      fail.env[in.target] = cell;
      fail.pc = in.next;
      s.pure.add(Literal::ptr(cell, RelOp::Ne, Term::nil()));
      s.heap[name] = Term::sym("~" + name);
      s.allocated.insert(name);
      s.env[in.target] = cell;
      s.pc = in.next;
      if (feasible(fail))
        push(std::move(fail));
      if (feasible(s))
        push(std::move(s));
      return;
    }
    case Instr::Op::Call:
      call(std::move(s), in);
      return;
    case Instr::Op::Abort:
      finish(std::move(s), Exit::Abort, std::nullopt, std::nullopt);
      return;
    case Instr::Op::Return:
      ret(std::move(s), in);
      return;
    case Instr::Op::Branch:
      branch(std::move(s), in);
      return;
    case Instr::Op::Jump:
      if (in.ordinal >= 0) {
        int limit = (cfg_.unroll + 1) * (cfg_.unroll + 1);
        if (++s.jumps[s.pc] > limit)
          return;
      }
      s.pc = in.next;
      push(std::move(s));
      return;
    case Instr::Op::Nop:
      s.pc = in.next;
      push(std::move(s));
      return;
    }
  }

  void error(State s, const Instr &in, BugKind kind, std::vector<std::string> objects) {
    ErrInfo e;
    e.kind = kind;
    e.culprit_uid = in.uid;
    e.culprit_ordinal = in.ordinal;
    e.pos = in.pos;
    e.objects = std::move(objects);
    finish(std::move(s), Exit::Err, std::nullopt, std::move(e));
  }

  void access(State s, const Instr &in) {
    const Operand &addr = in.address;
    std::vector<std::string> objects;
    if (addr.is_var())
      objects.push_back(addr.name);
    Resolved r = resolve(s, eval(s, addr));
    switch (r.kind) {
    case Res::Nil:
      if (in.op == Instr::Op::Free) {
        s.pc = in.next;
        push(std::move(s));
      } else {
        error(std::move(s), in, BugKind::Npe, objects);
      }
      return;
    case Res::Freed:
      error(std::move(s), in,
            in.op == Instr::Op::Free ? BugKind::DoubleFree : BugKind::UseAfterFree, objects);
      return;
    case Res::Unknown:
      diag("dropped a path dereferencing an unconstrained value at line " +
           std::to_string(in.pos.line));
      return;
    case Res::Fresh:
      materialize(s, r.loc);
      if (!feasible(s))
        return;
      break;
    case Res::Cell:
      break;
    }
    switch (in.op) {
    case Instr::Op::Load:
      s.env[in.target] = s.heap.at(r.loc);
      break;
    case Instr::Op::Store:
      s.heap[r.loc] = eval(s, in.value);
      break;
    default:
      s.heap.erase(r.loc);
      s.freed.insert(r.loc);
      break;
    }
    s.pc = in.next;
    push(std::move(s));
  }

  // Short-circuit evaluation; every atomic test that can go both ways forks.
  void cond(State s, const BoolExpr &b, std::vector<std::pair<State, bool>> &out) {
    switch (b.kind) {
    case BoolExpr::Kind::True:
    case BoolExpr::Kind::False:
      out.emplace_back(std::move(s), b.kind == BoolExpr::Kind::True);
      return;
    case BoolExpr::Kind::Not: {
      std::vector<std::pair<State, bool>> inner;
      cond(std::move(s), b.args[0], inner);
      for (auto &[st, v] : inner)
        out.emplace_back(std::move(st), !v);
      return;
    }
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or: {
      bool is_and = b.kind == BoolExpr::Kind::And;
      std::vector<std::pair<State, bool>> first;
      cond(std::move(s), b.args[0], first);
      for (auto &[st, v] : first) {
        if (v == is_and)
          cond(std::move(st), b.args[1], out);
        else
          out.emplace_back(std::move(st), v);
      }
      return;
    }
    case BoolExpr::Kind::Rel: {
      Sort sort = sort_of(b.lhs) == Sort::Ptr || sort_of(b.rhs) == Sort::Ptr ? Sort::Ptr : Sort::Int;
      Literal lit{sort, b.op, eval(s, b.lhs), eval(s, b.rhs), 0};
      State yes = s;
      yes.pure.add(lit);
      State no = s;
      no.pure.add(negate(lit));
      bool y = feasible(yes), n = feasible(no);
      if (y && n) {
        out.emplace_back(std::move(yes), true);
        out.emplace_back(std::move(no), false);
      } else if (y || n) {
        // decided already; keep the path condition as it was
        out.emplace_back(std::move(s), y);
      }
      return;
    }
    }
  }

  void branch(State s, const Instr &in) {
    int pc = s.pc;
    bool exhausted = in.loop_head && s.loop_iters[pc] >= cfg_.unroll;
    std::vector<std::pair<State, bool>> outcomes;
    cond(std::move(s), in.cond, outcomes);
    for (auto &[st, v] : outcomes) {
      if (v && exhausted)
        continue;
      if (in.loop_head) {
        if (v)
          ++st.loop_iters[pc];
        else
          st.loop_iters.erase(pc);
      }
      st.pc = v ? in.next : in.next_else;
      push(std::move(st));
    }
  }

  void call(State s, const Instr &in) {
    const FunctionDef &cdef = *program_.find(in.callee);
    const Footprint &fc = callee_(in.callee);
    if (fc.incomplete)
      diag("summary of '" + in.callee + "' is incomplete");
    int k = ++s.sites[in.uid];
    std::string suffix = uid_tag(in.uid) + (k > 1 ? "#" + std::to_string(k) : "");
    for (const Effect &e : fc.effects) {
      if (e.exit == Exit::Err) {
        diag("err effects of '" + in.callee + "' are not propagated to callers");
        continue;
      }
      State t = s;
      std::map<std::string, Term> theta;
      for (size_t i = 0; i < cdef.params.size(); ++i)
        theta[cdef.params[i].name] = eval(t, in.args[i]);

      std::vector<std::string> locs;
      for (const auto &[loc, c] : e.pre.cells)
        locs.push_back(loc);
      std::sort(locs.begin(), locs.end(), [](const std::string &a, const std::string &b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
      });
      std::map<std::string, std::string> cellmap;
      std::set<std::string> used;
      bool ok = true;
      for (const auto &loc : locs) {
        Term target = substitute(Term::sym(loc), theta);
        Resolved r = resolve(t, target);
        if (r.kind == Res::Fresh) {
          materialize(t, r.loc);
          r.kind = Res::Cell;
        }
        if (r.kind != Res::Cell || !used.insert(r.loc).second) {
          if (r.kind == Res::Nil || r.kind == Res::Freed)
            diag("call to '" + in.callee + "' at line " + std::to_string(in.pos.line) +
                 " would fail inside the callee; bug trace spans multiple functions");
          ok = false;
          break;
        }
        cellmap[loc] = r.loc;
        theta[e.pre.cells.at(loc).name] = t.heap.at(r.loc);
      }
      if (!ok)
        continue;

      auto rename = [&](const Term &term) {
        if (term.is_sym() && !theta.count(term.name))
          theta[term.name] = Term::sym(term.name + "/" + suffix);
      };
      for (const auto &sym : symbols(e.post.pure))
        rename(Term::sym(sym));
      for (const auto &[loc, c] : e.post.cells) {
        rename(Term::sym(loc));
        rename(c);
      }
      for (const auto &loc : e.post.freed)
        rename(Term::sym(loc));
      if (e.ret)
        rename(*e.ret);

      t.pure = t.pure && substitute(e.post.pure, theta);
      for (const auto &[loc, c] : e.post.cells) {
        auto it = cellmap.find(loc);
        std::string dst = it != cellmap.end() ? it->second : theta.at(loc).name;
        t.heap[dst] = substitute(c, theta);
      }
      for (const auto &loc : e.post.freed) {
        auto it = cellmap.find(loc);
        if (it != cellmap.end()) {
          t.heap.erase(it->second);
          t.freed.insert(it->second);
        } else {
          t.freed.insert(theta.at(loc).name);
        }
      }
      if (!in.target.empty() && e.exit == Exit::Ok) {
        Term result = Term::sym(in.target + "@" + suffix);
        Term value = e.ret ? substitute(*e.ret, theta) : Term::nil();
        Sort sort = cdef.return_kind == ReturnKind::Int ? Sort::Int : Sort::Ptr;
        t.pure.add(Literal{sort, RelOp::Eq, result, value, 0});
        t.env[in.target] = result;
      }
      if (!feasible(t))
        continue;
      if (e.exit == Exit::Abort) {
        finish(std::move(t), Exit::Abort, std::nullopt, std::nullopt);
        continue;
      }
      t.pc = in.next;
      push(std::move(t));
    }
  }

  std::vector<std::string> leaked(const State &s, const std::optional<Term> &ret) const {
    AliasClosure ac(s.pure);
    std::set<std::string> reached;
    std::vector<Term> frontier;
    if (ret && fn_.return_kind == ReturnKind::Ptr)
      frontier.push_back(*ret);
    for (const auto &p : fn_.params)
      if (p.kind == VarKind::Ptr)
        frontier.push_back(Term::sym(p.name));
    while (!frontier.empty()) {
      Term v = frontier.back();
      frontier.pop_back();
      if (!v.is_sym())
        continue;
      for (const auto &[loc, content] : s.heap)
        if (!reached.count(loc) && (loc == v.name || ac.same(v, Term::sym(loc)))) {
          reached.insert(loc);
          frontier.push_back(content);
        }
    }
    std::vector<std::string> out;
    for (const auto &[loc, content] : s.heap)
      if (!s.pre_heap.count(loc) && !reached.count(loc))
        out.push_back(loc);
    return out;
  }

  void ret(State s, const Instr &in) {
    std::optional<Term> value;
    if (in.has_value)
      value = eval(s, in.value);
    auto lost = leaked(s, value);
    if (lost.empty()) {
      finish(std::move(s), Exit::Ok, value, std::nullopt);
      return;
    }
    AliasClosure ac(s.pure);
    std::set<std::string> objects;
    for (const auto &loc : lost) {
      bool named = false;
      for (const auto &[v, t] : s.env)
        if (fn_.var_kinds.at(v) == VarKind::Ptr && ac.same(t, Term::sym(loc))) {
          objects.insert(v);
          named = true;
        }
      auto at = loc.find('@');
      if (!named && at != std::string::npos && loc.find('/') == std::string::npos)
        objects.insert(loc.substr(0, at));
    }
    ErrInfo e;
    e.kind = BugKind::Leak;
    if (in.ordinal >= 0) {
      e.culprit_uid = in.uid;
      e.culprit_ordinal = in.ordinal;
      e.pos = in.pos;
    } else {
      e.culprit_uid = s.last_uid;
      e.culprit_ordinal = s.last_ordinal;
      e.pos = s.last_pos;
    }
    e.objects.assign(objects.begin(), objects.end());
    finish(std::move(s), Exit::Err, value, std::move(e));
  }

  void finish(State s, Exit exit, std::optional<Term> ret, std::optional<ErrInfo> err) {
    if (static_cast<int>(out_.effects.size()) >= cfg_.path_budget) {
      out_.incomplete = true;
      stopped_ = true;
      diag("path budget of " + std::to_string(cfg_.path_budget) + " effects exhausted");
      return;
    }
    Effect e;
    e.exit = exit;
    e.ret = std::move(ret);
    e.err = std::move(err);
    e.trace = std::move(s.trace);

    std::set<std::string> hidden;
    for (const auto &sym : symbols(s.pure))
      if (!s.inputs.count(sym))
        hidden.insert(sym);
    e.pre.pure = eliminate(s.pure, hidden);
    e.pre.cells = s.pre_heap;

    e.post.pure = s.pure;
    e.post.cells = s.heap;
    e.post.freed = s.freed;
    for (const auto &[v, t] : s.env)
      if (fn_.var_kinds.at(v) == VarKind::Ptr)
        e.post.vars[v] = t;
    e.post.exvars = hidden;
    for (const auto &[loc, c] : s.heap) {
      if (!s.inputs.count(loc))
        e.post.exvars.insert(loc);
      if (c.is_sym() && !s.inputs.count(c.name))
        e.post.exvars.insert(c.name);
    }
    for (const auto &loc : s.freed)
      if (!s.inputs.count(loc))
        e.post.exvars.insert(loc);
    out_.effects.push_back(std::move(e));
  }

  const Program &program_;
  const FunctionDef &fn_;
  AnalysisConfig cfg_;
  std::function<const Footprint &(const std::string &)> callee_;
  FunctionIR ir_;
  Footprint out_;
  std::vector<State> work_;
  std::vector<State> pending_;
  bool stopped_ = false;
};

uint64_t fnv1a(const std::string &s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PureFormula join(const std::vector<const PureFormula *> &paths) {
  if (paths.size() == 1)
    return normalize(*paths[0]);
  std::set<Literal> candidates;
  for (const auto *p : paths)
    for (const auto &l : normalize(*p).literals)
      candidates.insert(l);
  PureFormula kept;
  for (const auto &l : candidates) {
    bool all = true;
    for (const auto *p : paths)
      all = all && implies(*p, l);
    if (all)
      kept.add(l);
  }
  return normalize(kept);
}

} // namespace

Footprint summarize(const Program &p, const std::string &fn, const Summaries &callees,
                    const AnalysisConfig &cfg) {
  const FunctionDef *def = p.find(fn);
  if (!def)
    throw ProgramError("no function '" + fn + "'", {});
  Summaries local;
  std::function<const Footprint &(const std::string &)> lookup =
      [&](const std::string &name) -> const Footprint & {
    auto it = callees.find(name);
    if (it != callees.end())
      return it->second;
    auto jt = local.find(name);
    if (jt != local.end())
      return jt->second;
    Footprint f = Machine(p, *p.find(name), cfg, lookup).run();
    return local.emplace(name, std::move(f)).first->second;
  };
  return Machine(p, *def, cfg, lookup).run();
}

Footprint summarize(const Program &p, const std::string &fn, const AnalysisConfig &cfg) {
  return summarize(p, fn, Summaries{}, cfg);
}

Summaries summarize_all(const Program &p, const AnalysisConfig &cfg) {
  Summaries out;
  for (const auto &name : p.bottom_up_order())
    out[name] = summarize(p, name, out, cfg);
  return out;
}

std::string bug_id(const std::string &function, BugKind kind, int culprit_uid,
                   const PureFormula &path) {
  std::string key = function + "|" + to_string(kind) + "|" + std::to_string(culprit_uid) + "|" +
                    canonical(path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return buf;
}

std::vector<Bug> bugs_of(const Footprint &fp) {
  std::vector<Bug> out;
  std::map<std::pair<int, int>, size_t> group; // (kind, culprit uid) -> index
  for (size_t i = 0; i < fp.effects.size(); ++i) {
    const Effect &e = fp.effects[i];
    if (e.exit != Exit::Err || !e.err)
      continue;
    auto key = std::make_pair(static_cast<int>(e.err->kind), e.err->culprit_uid);
    auto it = group.find(key);
    if (it == group.end()) {
      Bug b;
      b.kind = e.err->kind;
      b.function = fp.function;
      b.culprit_uid = e.err->culprit_uid;
      b.culprit_ordinal = e.err->culprit_ordinal;
      b.culprit_pos = e.err->pos;
      it = group.emplace(key, out.size()).first;
      out.push_back(std::move(b));
    }
    Bug &b = out[it->second];
    b.effects.push_back(i);
    for (const auto &o : e.err->objects)
      if (std::find(b.objects.begin(), b.objects.end(), o) == b.objects.end())
        b.objects.push_back(o);
  }
  for (auto &b : out) {
    std::vector<const PureFormula *> paths;
    for (size_t i : b.effects)
      paths.push_back(&fp.effects[i].post.pure);
    b.path = join(paths);
    b.id = bug_id(b.function, b.kind, b.culprit_uid, b.path);
    b.footprint = fp;
  }
  return out;
}

std::vector<Bug> detect_bugs(const Program &p, const AnalysisConfig &cfg, Summaries *summaries) {
  Summaries all = summarize_all(p, cfg);
  std::vector<Bug> out;
  for (const auto &fn : p.functions)
    for (auto &b : bugs_of(all.at(fn.name)))
      out.push_back(std::move(b));
  if (summaries)
    *summaries = std::move(all);
  return out;
}

ValidationVerdict validate(const Program &patched, const Bug &target, const std::vector<Bug> &baseline,
                           const AnalysisConfig &cfg) {
  ValidationVerdict v;
  std::vector<Bug> now;
  Summaries sums;
  try {
    now = detect_bugs(patched, cfg, &sums);
  } catch (const std::exception &e) {
    v.diagnostic = e.what();
    return v;
  }
  auto it = sums.find(target.function);
  if (it == sums.end() || it->second.incomplete) {
    v.diagnostic = "analysis of '" + target.function + "' incomplete";
    return v;
  }
  auto overlaps = [](const Bug &a, const Bug &b) {
    return a.function == b.function && a.kind == b.kind && a.culprit_uid == b.culprit_uid &&
           sat(a.path && b.path);
  };
  v.target_fixed = true;
  for (const auto &b : now)
    if (overlaps(b, target))
      v.target_fixed = false;
  for (const auto &b : now) {
    bool known = false;
    for (const auto &old : baseline)
      known = known || old.id == b.id || overlaps(old, b);
    if (!known)
      v.new_bugs.push_back(b.id);
  }
  v.status = v.target_fixed && v.new_bugs.empty() ? ValidationVerdict::Status::Plausible
                                                  : ValidationVerdict::Status::NotPlausible;
  return v;
}

} // namespace heapfix
