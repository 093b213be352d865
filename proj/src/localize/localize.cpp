#include "heapfix/localize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "heapfix/ir.hpp"

namespace heapfix {

namespace {

// Variables in order of first appearance: parameters, then statements.
std::vector<std::string> declaration_order(const FunctionDef &fn) {
  std::vector<std::string> out;
  auto add = [&](const std::string &v) {
    if (!v.empty() && fn.var_kinds.count(v) && std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  };
  for (const auto &p : fn.params)
    add(p.name);
  for_each_stmt(fn.body, [&](const Stmt &s) {
    add(s.target);
    if (s.address.is_var())
      add(s.address.name);
    if (s.value.is_var())
      add(s.value.name);
    for (const auto &a : s.args)
      if (a.is_var())
        add(a.name);
  });
  return out;
}

void add_constant(std::vector<Operand> &cs, const Operand &op) {
  if (op.kind != Operand::Kind::Var && std::find(cs.begin(), cs.end(), op) == cs.end())
    cs.push_back(op);
}

template <typename T> void append_unique(std::vector<T> &dst, const std::vector<T> &src) {
  for (const auto &x : src)
    if (std::find(dst.begin(), dst.end(), x) == dst.end())
      dst.push_back(x);
}

} // namespace

double ochiai(int ef, int ep, int nf) {
  double denom = std::sqrt(static_cast<double>(ef + nf) * static_cast<double>(ef + ep));
  return denom == 0.0 ? 0.0 : ef / denom;
}

std::vector<FixLocation> localize(const Bug &b, int top_n) {
  const auto &effects = b.footprint.effects;
  std::set<size_t> failing(b.effects.begin(), b.effects.end());
  std::map<int, int> ef, ep;
  for (size_t i = 0; i < effects.size(); ++i) {
    std::set<int> seen(effects[i].trace.begin(), effects[i].trace.end());
    for (int o : seen)
      ++(failing.count(i) ? ef : ep)[o];
  }
  int total_failing = static_cast<int>(failing.size());
  std::vector<FixLocation> scored;
  std::set<int> ordinals;
  for (const auto &[o, n] : ef)
    ordinals.insert(o);
  for (int o : ordinals) {
    int f = ef.count(o) ? ef[o] : 0;
    int pass = ep.count(o) ? ep[o] : 0;
    double s = ochiai(f, pass, total_failing - f);
    if (s > 0.0)
      scored.push_back({{b.function, o, Anchor::After}, s});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const FixLocation &x, const FixLocation &y) {
    if (x.score != y.score)
      return x.score > y.score;
    return x.location.ordinal < y.location.ordinal;
  });
  if (static_cast<int>(scored.size()) > top_n)
    scored.resize(static_cast<size_t>(std::max(top_n, 0)));
  bool has_culprit = std::any_of(scored.begin(), scored.end(),
                                 [&](const FixLocation &f) { return f.location.ordinal == b.culprit_ordinal; });
  if (!has_culprit) {
    int f = ef.count(b.culprit_ordinal) ? ef[b.culprit_ordinal] : 0;
    int pass = ep.count(b.culprit_ordinal) ? ep[b.culprit_ordinal] : 0;
    scored.push_back({{b.function, b.culprit_ordinal, Anchor::After}, ochiai(f, pass, total_failing - f)});
  }
  return scored;
}

std::vector<std::string> taint(const FunctionDef &fn, const std::vector<std::string> &seeds) {
  auto is_ptr = [&](const std::string &v) {
    auto it = fn.var_kinds.find(v);
    return it != fn.var_kinds.end() && it->second == VarKind::Ptr;
  };
  std::map<std::string, std::set<std::string>> edges;
  auto link = [&](const std::string &a, const std::string &b) {
    if (is_ptr(a) && is_ptr(b)) {
      edges[a].insert(b);
      edges[b].insert(a);
    }
  };
  for_each_stmt(fn.body, [&](const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Assign:
      if (s.value.is_var())
        link(s.target, s.value.name);
      break;
    case StmtKind::Load:
      if (s.address.is_var())
        link(s.target, s.address.name);
      break;
    case StmtKind::Store:
      if (s.address.is_var() && s.value.is_var())
        link(s.address.name, s.value.name);
      break;
    case StmtKind::Call: {
      std::vector<std::string> ends;
      if (!s.target.empty())
        ends.push_back(s.target);
      for (const auto &a : s.args)
        if (a.is_var())
          ends.push_back(a.name);
      for (size_t i = 0; i < ends.size(); ++i)
        for (size_t j = i + 1; j < ends.size(); ++j)
          link(ends[i], ends[j]);
      break;
    }
    default:
      break;
    }
  });
  std::set<std::string> reached;
  std::vector<std::string> work;
  for (const auto &s : seeds)
    if (is_ptr(s) && reached.insert(s).second)
      work.push_back(s);
  while (!work.empty()) {
    std::string v = work.back();
    work.pop_back();
    for (const auto &w : edges[v])
      if (reached.insert(w).second)
        work.push_back(w);
  }
  std::vector<std::string> out;
  for (const auto &v : declaration_order(fn))
    if (reached.count(v))
      out.push_back(v);
  return out;
}

IngredientSet collect_ingredients(const Program &p, const Bug &b, const Location &loc) {
  const FunctionDef &fn = *p.find(loc.function);
  std::set<std::string> live = assigned_at(fn, loc.ordinal, loc.anchor);
  IngredientSet ing;
  for (const auto &v : taint(fn, b.objects))
    if (live.count(v))
      ing.ptr_vars.push_back(v);
  for (const auto &v : declaration_order(fn))
    if (fn.var_kinds.at(v) == VarKind::Int && live.count(v))
      ing.nonptr_vars.push_back(v);
  for (const auto &c : {Operand::null(), Operand::integer(0), Operand::integer(-1)})
    add_constant(ing.constants, c);
  std::function<void(const BoolExpr &)> walk = [&](const BoolExpr &e) {
    add_constant(ing.constants, e.lhs);
    add_constant(ing.constants, e.rhs);
    for (const auto &a : e.args)
      walk(a);
  };
  for_each_stmt(fn.body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Assign || s.kind == StmtKind::Store || s.kind == StmtKind::Return)
      add_constant(ing.constants, s.value);
    for (const auto &a : s.args)
      add_constant(ing.constants, a);
    if (s.kind == StmtKind::If || s.kind == StmtKind::While)
      walk(s.cond);
  });
  for (const auto &[label, ordinal] : fn.labels)
    ing.labels.push_back(label);
  return ing;
}

IngredientSet merge(const IngredientSet &a, const IngredientSet &b) {
  IngredientSet out = a;
  append_unique(out.ptr_vars, b.ptr_vars);
  append_unique(out.nonptr_vars, b.nonptr_vars);
  append_unique(out.constants, b.constants);
  append_unique(out.labels, b.labels);
  return out;
}

} // namespace heapfix
