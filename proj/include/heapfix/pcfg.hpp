#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "heapfix/localize.hpp"
#include "heapfix/patch.hpp"

namespace heapfix {

struct Rule {
  enum class Kind {
    // Patch
    Insert, InsertIf, Guard,
    // HandlerSeq
    SeqOne, SeqCons,
    // HandlerCmd
    ReturnPtr, ReturnInt, ReturnConst, ReturnVoid, Free, Goto, MallocAssign, Abort,
    // Cond
    True, False, PtrEq, PtrNe, PtrEqNull, PtrNeNull, IntRel, Not, And, Or,
    // atoms
    Atom,
  };

  std::string id;
  std::string lhs;
  Kind kind = Kind::Atom;
  std::vector<std::string> children; // nonterminals, left to right
  Location loc;                      // Patch rules
  RelOp op = RelOp::Eq;              // IntRel
  Operand atom;                      // Atom rules: variable or constant
  std::string label;                 // Label atoms
  double w_pi = 1.0;
  double w_e = 1.0;
  int min_height = 0;
};

struct Derivation {
  Patch patch;
  std::vector<std::string> rules;
  int height = 0;
};

struct RuleProbability {
  std::string rule;
  double p_pi = 0;
  double p_e = 0;
};

class GrammarError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Weighted patch grammar for one function. Every rule carries a token
/// weight per dimension; probabilities are weights normalized within the
/// rule's nonterminal.
class WeightedGrammar {
public:
  static constexpr const char *kStart = "Patch";

  WeightedGrammar() = default;
  WeightedGrammar(std::vector<Rule> rules, int height);

  int height() const { return height_; }
  const std::vector<Rule> &rules() const { return rules_; }
  const Rule &rule(const std::string &id) const;
  std::vector<std::string> nonterminals() const;
  std::vector<const Rule *> rules_of(const std::string &nt) const;
  int min_height(const std::string &nt) const;

  double p_pi(const Rule &r) const;
  double p_e(const Rule &r) const;
  std::map<std::string, std::vector<RuleProbability>> probabilities() const;

  Derivation sample(std::mt19937_64 &rng) const;
  Derivation sample(uint64_t seed) const;
  /// Rebuilds the patch of a recorded leftmost derivation.
  Derivation replay(const std::vector<std::string> &rules) const;
  /// Adds the tokens to every occurrence of every rule in the derivation.
  void reward(const Derivation &d, int tokens_pi, int tokens_e);

private:
  std::vector<Rule> rules_;
  std::map<std::string, size_t> index_;
  std::map<std::string, std::vector<size_t>> by_lhs_;
  std::map<std::string, int> nt_height_;
  int height_ = 6;
};

/// Rules for INSERT / INSERT-if / GUARD at each location, handlers, guards
/// and atoms from the ingredients. Rules whose atom pool is empty are left
/// out. Throws GrammarError when no patch is derivable.
WeightedGrammar build_grammar(const FunctionDef &fn, const IngredientSet &ing,
                              const std::vector<Location> &locs, int height = 6);

/// Uniform draw in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64 &rng);

} // namespace heapfix
