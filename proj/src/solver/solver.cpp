#include "heapfix/solver.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>

namespace heapfix {

Literal negate(const Literal &lit) {
  Literal out = lit;
  out.op = negate(lit.op);
  return out;
}

PureFormula PureFormula::operator&&(const PureFormula &other) const {
  PureFormula out = *this;
  out.literals.insert(out.literals.end(), other.literals.begin(), other.literals.end());
  out.weakened = weakened || other.weakened;
  return out;
}

PureFormula false_formula() {
  return PureFormula{Literal::num(Term::integer(0), RelOp::Lt, Term::integer(0))};
}

std::string to_string(const Term &t) {
  switch (t.kind) {
  case Term::Kind::Nil: return "nil";
  case Term::Kind::Sym: return t.name;
  case Term::Kind::Int: return std::to_string(t.value);
  }
  return "?";
}

std::string to_string(const Literal &lit) {
  const char *op = lit.op == RelOp::Eq ? "=" : to_string(lit.op);
  std::string s = to_string(lit.lhs) + " " + op + " " + to_string(lit.rhs);
  if (lit.offset > 0)
    s += " + " + std::to_string(lit.offset);
  else if (lit.offset < 0)
    s += " - " + std::to_string(-lit.offset);
  return s;
}

std::string to_string(const PureFormula &f) {
  if (f.literals.empty())
    return "true";
  std::string s;
  for (size_t i = 0; i < f.literals.size(); ++i) {
    if (i)
      s += " & ";
    s += to_string(f.literals[i]);
  }
  return s;
}

std::set<std::string> symbols(const Literal &lit) {
  std::set<std::string> out;
  if (lit.lhs.is_sym())
    out.insert(lit.lhs.name);
  if (lit.rhs.is_sym())
    out.insert(lit.rhs.name);
  return out;
}

std::set<std::string> symbols(const PureFormula &f) {
  std::set<std::string> out;
  for (const auto &l : f.literals)
    for (const auto &s : symbols(l))
      out.insert(s);
  return out;
}

Term substitute(const Term &t, const std::map<std::string, Term> &sigma) {
  if (!t.is_sym())
    return t;
  auto it = sigma.find(t.name);
  return it == sigma.end() ? t : it->second;
}

PureFormula substitute(const PureFormula &f, const std::map<std::string, Term> &sigma) {
  PureFormula out;
  out.weakened = f.weakened;
  for (const auto &l : f.literals) {
    Literal m = l;
    m.lhs = substitute(l.lhs, sigma);
    m.rhs = substitute(l.rhs, sigma);
    out.add(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// pointers

std::string AliasClosure::key(const Term &t) { return t.is_nil() ? std::string("\x01nil") : t.name; }

Term AliasClosure::term_of(const std::string &k) {
  return k == "\x01nil" ? Term::nil() : Term::sym(k);
}

std::string AliasClosure::find(const std::string &k) const {
  auto it = parent_.find(k);
  if (it == parent_.end())
    return k;
  if (it->second == k)
    return k;
  std::string root = find(it->second);
  parent_[k] = root;
  return root;
}

AliasClosure::AliasClosure(const PureFormula &f) {
  for (const auto &l : f.literals) {
    if (l.sort != Sort::Ptr)
      continue;
    if (l.op == RelOp::Eq)
      add_equal(l.lhs, l.rhs);
    else
      add_distinct(l.lhs, l.rhs);
  }
}

void AliasClosure::add_equal(const Term &a, const Term &b) {
  std::string ka = key(a), kb = key(b);
  parent_.emplace(ka, ka);
  parent_.emplace(kb, kb);
  std::string ra = find(ka), rb = find(kb);
  if (ra == rb)
    return;
  // keep nil (sorted first) or the least name as root
  if (rb < ra)
    std::swap(ra, rb);
  parent_[rb] = ra;
}

void AliasClosure::add_distinct(const Term &a, const Term &b) {
  std::string ka = key(a), kb = key(b);
  parent_.emplace(ka, ka);
  parent_.emplace(kb, kb);
  distinct_.emplace_back(ka, kb);
}

Term AliasClosure::rep(const Term &t) const { return term_of(find(key(t))); }

bool AliasClosure::consistent() const {
  for (const auto &[a, b] : distinct_)
    if (find(a) == find(b))
      return false;
  return true;
}

std::vector<std::pair<Term, Term>> AliasClosure::equalities() const {
  std::vector<std::pair<Term, Term>> out;
  for (const auto &[k, p] : parent_) {
    std::string r = find(k);
    if (r != k)
      out.emplace_back(term_of(k), term_of(r));
  }
  return out;
}

std::set<std::pair<Term, Term>> AliasClosure::distinct_reps() const {
  std::set<std::pair<Term, Term>> out;
  for (const auto &[a, b] : distinct_) {
    std::string ra = find(a), rb = find(b);
    if (rb < ra)
      std::swap(ra, rb);
    out.emplace(term_of(ra), term_of(rb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// integers: difference-bound matrices with case splits on disequalities

namespace {

constexpr long kInf = std::numeric_limits<long>::max() / 4;

long plus(long a, long b) {
  if (a >= kInf || b >= kInf)
    return kInf;
  return a + b;
}

struct Diff {
  int a, b;
  long k; // x_a - x_b <= k, or != k for disequalities
};

struct Dbm {
  int n = 0;
  std::vector<long> d;

  explicit Dbm(int size) : n(size), d(static_cast<size_t>(size * size), kInf) {
    for (int i = 0; i < n; ++i)
      at(i, i) = 0;
  }
  long &at(int i, int j) { return d[static_cast<size_t>(i * n + j)]; }
  long get(int i, int j) const { return d[static_cast<size_t>(i * n + j)]; }

  bool close() {
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        long ik = get(i, k);
        if (ik >= kInf)
          continue;
        for (int j = 0; j < n; ++j) {
          long v = plus(ik, get(k, j));
          if (v < get(i, j))
            at(i, j) = v;
        }
      }
    for (int i = 0; i < n; ++i)
      if (get(i, i) < 0)
        return false;
    return true;
  }

  // Adds x_a - x_b <= k to a closed matrix, keeping it closed.
  bool add(int a, int b, long k) {
    if (k >= get(a, b))
      return true;
    if (plus(get(b, a), k) < 0)
      return false;
    std::vector<long> from_a(static_cast<size_t>(n)), to_b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      to_b[static_cast<size_t>(i)] = get(i, a);
      from_a[static_cast<size_t>(i)] = get(b, i);
    }
    for (int i = 0; i < n; ++i) {
      long ia = to_b[static_cast<size_t>(i)];
      if (ia >= kInf)
        continue;
      for (int j = 0; j < n; ++j) {
        long v = plus(plus(ia, k), from_a[static_cast<size_t>(j)]);
        if (v < get(i, j))
          at(i, j) = v;
      }
    }
    return true;
  }
};

class IntSystem {
public:
  // Node 0 is the constant zero; symbols are numbered in name order.
  explicit IntSystem(const PureFormula &f) {
    std::set<std::string> names;
    for (const auto &l : f.literals)
      if (l.sort == Sort::Int)
        for (const auto &s : symbols(l))
          names.insert(s);
    names_.push_back("");
    for (const auto &s : names) {
      index_[s] = static_cast<int>(names_.size());
      names_.push_back(s);
    }
    for (const auto &l : f.literals)
      if (l.sort == Sort::Int)
        add(l);
  }

  bool trivially_false() const { return false_; }
  int size() const { return static_cast<int>(names_.size()); }
  const std::string &name(int i) const { return names_[static_cast<size_t>(i)]; }
  int index(const std::string &s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
  }
  const std::vector<Diff> &edges() const { return edges_; }
  const std::vector<Diff> &diseqs() const { return diseqs_; }
  const std::set<long> &constants() const { return constants_; }

  // (node, constant) view of a term
  std::pair<int, long> view(const Term &t) const {
    if (t.is_int())
      return {0, t.value};
    return {index(t.name), 0};
  }

  void add(const Literal &l) {
    auto [a, ca] = view(l.lhs);
    auto [b, cb] = view(l.rhs);
    cb += l.offset;
    if (l.lhs.is_int())
      constants_.insert(l.lhs.value);
    if (l.rhs.is_int())
      constants_.insert(l.rhs.value + l.offset);
    long k = cb - ca; // x_a - x_b  op  k
    if (a == b) {
      bool holds = false;
      switch (l.op) {
      case RelOp::Lt: holds = 0 < k; break;
      case RelOp::Le: holds = 0 <= k; break;
      case RelOp::Eq: holds = 0 == k; break;
      case RelOp::Ne: holds = 0 != k; break;
      case RelOp::Gt: holds = 0 > k; break;
      case RelOp::Ge: holds = 0 >= k; break;
      }
      if (!holds)
        false_ = true;
      return;
    }
    switch (l.op) {
    case RelOp::Le: edges_.push_back({a, b, k}); break;
    case RelOp::Lt: edges_.push_back({a, b, k - 1}); break;
    case RelOp::Ge: edges_.push_back({b, a, -k}); break;
    case RelOp::Gt: edges_.push_back({b, a, -k - 1}); break;
    case RelOp::Eq:
      edges_.push_back({a, b, k});
      edges_.push_back({b, a, -k});
      break;
    case RelOp::Ne: diseqs_.push_back({a, b, k}); break;
    }
  }

  std::optional<Dbm> base() const {
    if (false_)
      return std::nullopt;
    Dbm m(size());
    for (const auto &e : edges_)
      if (e.k < m.get(e.a, e.b))
        m.at(e.a, e.b) = e.k;
    if (!m.close())
      return std::nullopt;
    return m;
  }

  // Visits closed matrices of every satisfiable case split; stops early
  // when the visitor returns true. Returns whether it stopped early.
  bool leaves(const std::function<bool(const Dbm &)> &visit,
              const std::vector<Diff> &extra_edges = {}) const {
    auto m = base();
    if (!m)
      return false;
    for (const auto &e : extra_edges)
      if (!m->add(e.a, e.b, e.k))
        return false;
    return split(*m, 0, visit);
  }

private:
  bool split(const Dbm &m, size_t from, const std::function<bool(const Dbm &)> &visit) const {
    for (size_t i = from; i < diseqs_.size(); ++i) {
      const Diff &q = diseqs_[i];
      long hi = m.get(q.a, q.b);
      long lo = -m.get(q.b, q.a);
      if (q.k > hi || q.k < lo)
        continue;
      if (lo == hi)
        return false;
      Dbm below = m;
      if (below.add(q.a, q.b, q.k - 1) && split(below, i + 1, visit))
        return true;
      Dbm above = m;
      if (above.add(q.b, q.a, -q.k - 1) && split(above, i + 1, visit))
        return true;
      return false;
    }
    return visit(m);
  }

  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<Diff> edges_;
  std::vector<Diff> diseqs_;
  std::set<long> constants_;
  bool false_ = false;
};

bool int_sat(const IntSystem &sys, const std::vector<Diff> &extra = {}) {
  return sys.leaves([](const Dbm &) { return true; }, extra);
}

bool ptr_sat(const PureFormula &f) { return AliasClosure(f).consistent(); }

Term node_term(const IntSystem &sys, int i) {
  return i == 0 ? Term::integer(0) : Term::sym(sys.name(i));
}

// x_a - x_b <= k as a literal
Literal bound_literal(const IntSystem &sys, int a, int b, long k) {
  if (b == 0)
    return Literal::num(node_term(sys, a), RelOp::Le, Term::integer(k));
  if (a == 0)
    return Literal::num(node_term(sys, b), RelOp::Ge, Term::integer(-k));
  return Literal::num(node_term(sys, a), RelOp::Le, node_term(sys, b), k);
}

Literal eq_literal(const IntSystem &sys, int a, int b, long k) {
  if (b == 0)
    return Literal::num(node_term(sys, a), RelOp::Eq, Term::integer(k));
  if (a == 0)
    return Literal::num(node_term(sys, b), RelOp::Eq, Term::integer(-k));
  return Literal::num(node_term(sys, a), RelOp::Eq, node_term(sys, b), k);
}

Literal ne_literal(const IntSystem &sys, int a, int b, long k) {
  Literal l = eq_literal(sys, a, b, k);
  l.op = RelOp::Ne;
  return l;
}

} // namespace

bool sat(const PureFormula &f) {
  if (!ptr_sat(f))
    return false;
  return int_sat(IntSystem(f));
}

bool implies(const PureFormula &f, const Literal &lit) {
  PureFormula g = f;
  g.add(negate(lit));
  return !sat(g);
}

bool implies(const PureFormula &f, const PureFormula &g) {
  if (!sat(f))
    return true;
  for (const auto &l : g.literals)
    if (!implies(f, l))
      return false;
  return true;
}

bool equivalent(const PureFormula &f, const PureFormula &g) { return implies(f, g) && implies(g, f); }

PureFormula normalize(const PureFormula &f) {
  if (!sat(f))
    return false_formula();
  PureFormula out;
  out.weakened = f.weakened;

  AliasClosure ac(f);
  auto eqs = ac.equalities();
  std::sort(eqs.begin(), eqs.end());
  for (const auto &[m, r] : eqs)
    out.add(Literal::ptr(m, RelOp::Eq, r));
  for (const auto &[a, b] : ac.distinct_reps())
    out.add(a.is_nil() ? Literal::ptr(b, RelOp::Ne, a) : Literal::ptr(a, RelOp::Ne, b));

  IntSystem sys(f);
  const int n = sys.size();
  if (n <= 1)
    return out;
  std::vector<long> sup(static_cast<size_t>(n * n), -kInf);
  sys.leaves([&](const Dbm &m) {
    for (size_t i = 0; i < sup.size(); ++i)
      sup[i] = std::max(sup[i], m.d[i]);
    return false;
  });
  auto hi = [&](int a, int b) { return sup[static_cast<size_t>(a * n + b)]; };

  std::vector<Literal> bounds, diseqs;
  auto candidate_diseq = [&](int a, int b, long k) {
    long up = hi(a, b), low = -hi(b, a);
    if (!(low < k && k < up))
      return;
    if (!int_sat(sys, {{a, b, k}, {b, a, -k}}))
      diseqs.push_back(ne_literal(sys, a, b, k));
  };

  // values that a disequality could exclude: literal constants and fixed
  // differences, shifted by fixed offsets
  std::set<long> fixed_vals = sys.constants();
  for (int i = 1; i < n; ++i)
    if (hi(i, 0) < kInf && hi(0, i) < kInf && hi(i, 0) == -hi(0, i))
      fixed_vals.insert(hi(i, 0));

  for (int i = 1; i < n; ++i) {
    long up = hi(i, 0), low = -hi(0, i);
    if (up < kInf && low == up) {
      bounds.push_back(eq_literal(sys, i, 0, up));
      continue;
    }
    if (hi(0, i) < kInf)
      bounds.push_back(bound_literal(sys, 0, i, hi(0, i)));
    if (up < kInf)
      bounds.push_back(bound_literal(sys, i, 0, up));
    if (up < kInf && hi(0, i) < kInf && up - low <= 64) {
      for (long c = low + 1; c < up; ++c)
        candidate_diseq(i, 0, c);
    } else {
      for (long c : fixed_vals)
        candidate_diseq(i, 0, c);
    }
  }
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      long up = hi(i, j), down = hi(j, i);
      bool i_fixed = hi(i, 0) < kInf && hi(i, 0) == -hi(0, i);
      bool j_fixed = hi(j, 0) < kInf && hi(j, 0) == -hi(0, j);
      if (up < kInf && down < kInf && up == -down) {
        if (!(i_fixed && j_fixed))
          bounds.push_back(eq_literal(sys, i, j, up));
        continue;
      }
      if (up < kInf && up < plus(hi(i, 0), hi(0, j)))
        bounds.push_back(bound_literal(sys, i, j, up));
      if (down < kInf && down < plus(hi(j, 0), hi(0, i)))
        bounds.push_back(bound_literal(sys, j, i, down));
      if (i_fixed || j_fixed)
        continue;
      std::set<long> offsets{0};
      for (int m = 1; m < n; ++m)
        if (m != i && m != j && hi(m, j) < kInf && hi(m, j) == -hi(j, m))
          offsets.insert(hi(m, j));
      for (long k : offsets)
        candidate_diseq(i, j, k);
    }
  for (auto &l : bounds)
    out.add(std::move(l));
  for (auto &l : diseqs)
    out.add(std::move(l));
  return out;
}

std::string canonical(const PureFormula &f) { return to_string(normalize(f)); }

namespace {

// Rebuilds `lt + lc  op  rt + rc` as a literal; nullopt when it is
// constant-true, and a false literal when constant-false.
std::optional<Literal> int_literal(Term lt, long lc, RelOp op, Term rt, long rc) {
  if (lt.is_int()) {
    lc += lt.value;
    lt = Term::integer(0);
  }
  if (rt.is_int()) {
    rc += rt.value;
    rt = Term::integer(0);
  }
  if (!lt.is_sym() && rt.is_sym()) {
    std::swap(lt, rt);
    std::swap(lc, rc);
    op = flip(op);
  }
  if (!lt.is_sym()) {
    IntSystem sys(PureFormula{Literal::num(Term::integer(lc), op, Term::integer(rc))});
    if (sys.trivially_false())
      return false_formula().literals[0];
    return std::nullopt;
  }
  if (!rt.is_sym())
    return Literal::num(lt, op, Term::integer(rc - lc));
  if (lt == rt) {
    IntSystem sys(PureFormula{Literal::num(Term::integer(lc), op, Term::integer(rc))});
    if (sys.trivially_false())
      return false_formula().literals[0];
    return std::nullopt;
  }
  return Literal::num(lt, op, rt, rc - lc);
}

struct Affine {
  Term t;
  long c = 0;
};

} // namespace

PureFormula eliminate(const PureFormula &f, const std::set<std::string> &xs) {
  if (!sat(f))
    return false_formula();
  PureFormula out;
  out.weakened = f.weakened;

  // pointers: substitute through the alias class, else drop (exact over an
  // unbounded pointer universe)
  AliasClosure ac(f);
  std::map<std::string, std::vector<Term>> classes;
  for (const auto &l : f.literals) {
    if (l.sort != Sort::Ptr)
      continue;
    for (const Term &t : {l.lhs, l.rhs}) {
      Term r = ac.rep(t);
      auto &members = classes[to_string(r) + (r.is_nil() ? "\x01" : "")];
      if (std::find(members.begin(), members.end(), t) == members.end())
        members.push_back(t);
    }
  }
  std::map<std::string, Term> psigma;
  for (auto &[k, members] : classes) {
    std::optional<Term> keep;
    for (const Term &t : members) {
      if (t.is_sym() && xs.count(t.name))
        continue;
      if (!keep || t < *keep)
        keep = t;
    }
    for (const Term &t : members)
      if (t.is_sym() && xs.count(t.name) && keep)
        psigma[t.name] = *keep;
  }
  std::set<Literal> seen;
  for (const auto &l : f.literals) {
    if (l.sort != Sort::Ptr)
      continue;
    Literal m = l;
    m.lhs = substitute(l.lhs, psigma);
    m.rhs = substitute(l.rhs, psigma);
    if (m.lhs == m.rhs)
      continue;
    bool hidden = false;
    for (const auto &s : symbols(m))
      hidden = hidden || xs.count(s);
    if (hidden)
      continue;
    if (m.lhs.is_nil() || (m.rhs.is_sym() && m.rhs < m.lhs))
      std::swap(m.lhs, m.rhs);
    if (seen.insert(m).second)
      out.add(m);
  }

  // integers: substitute equalities, project the remaining bounds
  PureFormula ints;
  for (const auto &l : f.literals)
    if (l.sort == Sort::Int)
      ints.add(l);
  IntSystem sys(ints);
  auto m = sys.base();
  if (!m)
    return false_formula();
  std::map<std::string, Affine> isigma;
  for (int i = 1; i < sys.size(); ++i) {
    if (!xs.count(sys.name(i)))
      continue;
    if (m->get(i, 0) < kInf && m->get(i, 0) == -m->get(0, i)) {
      isigma[sys.name(i)] = {Term::integer(0), m->get(i, 0)};
      continue;
    }
    for (int j = 1; j < sys.size(); ++j) {
      if (j == i || xs.count(sys.name(j)))
        continue;
      if (m->get(i, j) < kInf && m->get(i, j) == -m->get(j, i)) {
        isigma[sys.name(i)] = {Term::sym(sys.name(j)), m->get(i, j)};
        break;
      }
    }
  }
  auto affine = [&](const Term &t) -> Affine {
    if (t.is_sym()) {
      auto it = isigma.find(t.name);
      if (it != isigma.end())
        return it->second;
    }
    return {t, 0};
  };
  PureFormula kept;
  bool projected = false;
  for (const auto &l : ints.literals) {
    Affine a = affine(l.lhs), b = affine(l.rhs);
    auto lit = int_literal(a.t, a.c, l.op, b.t, b.c + l.offset);
    if (!lit)
      continue;
    bool hidden = false;
    for (const auto &s : symbols(*lit))
      hidden = hidden || xs.count(s);
    if (hidden) {
      projected = true;
      if (lit->op == RelOp::Ne)
        out.weakened = true;
      continue;
    }
    kept.add(*lit);
  }
  if (projected) {
    IntSystem rest(kept);
    auto rm = rest.base();
    for (int i = 0; i < sys.size(); ++i)
      for (int j = 0; j < sys.size(); ++j) {
        if (i == j || m->get(i, j) >= kInf)
          continue;
        if ((i && xs.count(sys.name(i))) || (j && xs.count(sys.name(j))))
          continue;
        int ri = i == 0 ? 0 : rest.index(sys.name(i));
        int rj = j == 0 ? 0 : rest.index(sys.name(j));
        long have = (rm && ri >= 0 && rj >= 0) ? rm->get(ri, rj) : kInf;
        if (m->get(i, j) < have)
          kept.add(bound_literal(sys, i, j, m->get(i, j)));
      }
  }
  for (auto &l : kept.literals)
    out.add(std::move(l));
  return out;
}

} // namespace heapfix
