#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heapfix/ast.hpp"

namespace heapfix {

/// Pointer terms are nil or symbols; integer terms are symbols or constants.
struct Term {
  enum class Kind { Nil, Sym, Int };
  Kind kind = Kind::Nil;
  std::string name;
  long value = 0;

  static Term nil() { return {}; }
  static Term sym(std::string n) { return {Kind::Sym, std::move(n), 0}; }
  static Term integer(long v) { return {Kind::Int, {}, v}; }

  bool is_nil() const { return kind == Kind::Nil; }
  bool is_sym() const { return kind == Kind::Sym; }
  bool is_int() const { return kind == Kind::Int; }
  auto operator<=>(const Term &) const = default;
};

enum class Sort { Ptr, Int };

/// `lhs op rhs + offset`. Pointer literals use only == / != and offset 0.
struct Literal {
  Sort sort = Sort::Ptr;
  RelOp op = RelOp::Eq;
  Term lhs;
  Term rhs;
  long offset = 0;

  static Literal ptr(Term l, RelOp op, Term r) { return {Sort::Ptr, op, std::move(l), std::move(r), 0}; }
  static Literal num(Term l, RelOp op, Term r, long off = 0) {
    return {Sort::Int, op, std::move(l), std::move(r), off};
  }
  auto operator<=>(const Literal &) const = default;
};

Literal negate(const Literal &lit);

struct PureFormula {
  std::vector<Literal> literals;
  bool weakened = false;

  PureFormula() = default;
  PureFormula(std::initializer_list<Literal> lits) : literals(lits) {}

  void add(Literal lit) {
    if (std::find(literals.begin(), literals.end(), lit) == literals.end())
      literals.push_back(std::move(lit));
  }
  bool empty() const { return literals.empty(); }
  PureFormula operator&&(const PureFormula &other) const;
};

std::string to_string(const Term &t);
std::string to_string(const Literal &lit);
std::string to_string(const PureFormula &f);

std::set<std::string> symbols(const PureFormula &f);
std::set<std::string> symbols(const Literal &lit);
PureFormula substitute(const PureFormula &f, const std::map<std::string, Term> &sigma);
Term substitute(const Term &t, const std::map<std::string, Term> &sigma);

/// Union-find over pointer terms induced by the equalities of a formula,
/// plus its disequality edges.
class AliasClosure {
public:
  AliasClosure() = default;
  explicit AliasClosure(const PureFormula &f);

  void add_equal(const Term &a, const Term &b);
  void add_distinct(const Term &a, const Term &b);
  /// nil when the class holds nil, else the least symbol in the class.
  Term rep(const Term &t) const;
  bool same(const Term &a, const Term &b) const { return rep(a) == rep(b); }
  bool consistent() const;
  std::vector<std::pair<Term, Term>> equalities() const;   // (member, rep)
  std::set<std::pair<Term, Term>> distinct_reps() const;  // ordered rep pairs

private:
  std::string find(const std::string &k) const;
  static std::string key(const Term &t);
  static Term term_of(const std::string &k);
  mutable std::map<std::string, std::string> parent_;
  std::vector<std::pair<std::string, std::string>> distinct_;
};

bool sat(const PureFormula &f);
bool implies(const PureFormula &f, const Literal &lit);
bool implies(const PureFormula &f, const PureFormula &g);
bool equivalent(const PureFormula &f, const PureFormula &g);

/// Existentially quantifies `xs` away. Pointer variables and integer bounds
/// are eliminated exactly; dropped integer disequalities set `weakened`.
PureFormula eliminate(const PureFormula &f, const std::set<std::string> &xs);

/// An equivalent formula in canonical form: equivalent inputs over the same
/// symbols print identically. Unsatisfiable inputs normalize to `false`.
PureFormula normalize(const PureFormula &f);
std::string canonical(const PureFormula &f);

PureFormula false_formula();

} // namespace heapfix
