#pragma once

// Exhaustive-valuation oracle for pure formulas. Pointers range over
// {nil, c1..c4}, integers over [-6, 6]: with at most four variables and
// constants in [-2, 2] every satisfiable conjunction has a model there
// (order-preserving compression of any model).

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "heapfix/solver.hpp"

namespace brute {

using heapfix::Literal;
using heapfix::PureFormula;
using heapfix::RelOp;
using heapfix::Sort;
using heapfix::Term;

struct Valuation {
  std::map<std::string, long> ptr; // 0 = nil
  std::map<std::string, long> num;
};

inline bool compare(long a, RelOp op, long b) {
  switch (op) {
  case RelOp::Lt: return a < b;
  case RelOp::Le: return a <= b;
  case RelOp::Eq: return a == b;
  case RelOp::Ne: return a != b;
  case RelOp::Gt: return a > b;
  case RelOp::Ge: return a >= b;
  }
  return false;
}

inline bool holds(const Literal &l, const Valuation &v) {
  auto value = [&](const Term &t) -> long {
    if (t.is_nil())
      return 0;
    if (t.is_int())
      return t.value;
    return l.sort == Sort::Ptr ? v.ptr.at(t.name) : v.num.at(t.name);
  };
  return compare(value(l.lhs), l.op, value(l.rhs) + l.offset);
}

inline bool holds(const PureFormula &f, const Valuation &v) {
  for (const auto &l : f.literals)
    if (!holds(l, v))
      return false;
  return true;
}

inline void sorts_of(const PureFormula &f, std::set<std::string> &ptrs, std::set<std::string> &nums) {
  for (const auto &l : f.literals)
    for (const Term &t : {l.lhs, l.rhs})
      if (t.is_sym())
        (l.sort == Sort::Ptr ? ptrs : nums).insert(t.name);
}

// Calls visit on every valuation of the symbols of the given formulas;
// stops when visit returns true.
inline bool enumerate(const std::vector<const PureFormula *> &fs,
                      const std::function<bool(const Valuation &)> &visit) {
  std::set<std::string> ps, ns;
  for (auto *f : fs)
    sorts_of(*f, ps, ns);
  std::vector<std::string> pv(ps.begin(), ps.end()), nv(ns.begin(), ns.end());
  Valuation v;
  std::function<bool(size_t)> go = [&](size_t i) -> bool {
    if (i < pv.size()) {
      for (long c = 0; c <= 4; ++c) {
        v.ptr[pv[i]] = c;
        if (go(i + 1))
          return true;
      }
      return false;
    }
    size_t j = i - pv.size();
    if (j < nv.size()) {
      for (long c = -6; c <= 6; ++c) {
        v.num[nv[j]] = c;
        if (go(i + 1))
          return true;
      }
      return false;
    }
    return visit(v);
  };
  return go(0);
}

inline bool sat(const PureFormula &f) {
  return brute::enumerate({&f}, [&](const Valuation &v) { return brute::holds(f, v); });
}

inline bool implies(const PureFormula &f, const PureFormula &g) {
  return !enumerate({&f, &g}, [&](const Valuation &v) { return holds(f, v) && !holds(g, v); });
}

inline bool equivalent(const PureFormula &f, const PureFormula &g) {
  return brute::implies(f, g) && brute::implies(g, f);
}

// Random conjunction over at most four symbols (p, q ptr; a, b int by
// default) with at most five literals and constants in [-2, 2].
struct Generator {
  std::mt19937_64 rng;
  explicit Generator(uint64_t seed) : rng(seed) {}

  long pick(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

  Literal literal() {
    static const char *ptrs[] = {"p", "q"};
    static const char *nums[] = {"a", "b"};
    if (pick(0, 1) == 0) {
      auto term = [&]() {
        long k = pick(0, 2);
        return k == 2 ? Term::nil() : Term::sym(ptrs[k]);
      };
      return Literal::ptr(term(), pick(0, 1) ? RelOp::Eq : RelOp::Ne, term());
    }
    auto term = [&]() {
      long k = pick(0, 2);
      return k == 2 ? Term::integer(pick(-2, 2)) : Term::sym(nums[k]);
    };
    return Literal::num(term(), static_cast<RelOp>(pick(0, 5)), term());
  }

  PureFormula formula(int max_lits = 5) {
    PureFormula f;
    long n = pick(0, max_lits);
    for (long i = 0; i < n; ++i)
      f.add(literal());
    return f;
  }
};

} // namespace brute
