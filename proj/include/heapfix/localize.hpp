#pragma once

#include <string>
#include <vector>

#include "heapfix/engine.hpp"

namespace heapfix {

struct FixLocation {
  Location location;
  double score = 0.0;
};

/// Ochiai over effect traces: failing runs are the bug's err effects,
/// passing runs all other effects of the function. Zero scores are dropped,
/// ties go to the earlier statement, and the culprit is always present.
std::vector<FixLocation> localize(const Bug &b, int top_n = 2);

double ochiai(int ef, int ep, int nf);

struct IngredientSet {
  std::vector<std::string> ptr_vars;
  std::vector<std::string> nonptr_vars;
  std::vector<Operand> constants;
  std::vector<std::string> labels;
};

/// Pointer variables connected to the culprit object through assignments,
/// loads, stores and call arguments, restricted to those definitely assigned
/// at `loc`; int variables assigned at `loc`; NULL, 0, -1 and the literals of
/// the function; its labels.
IngredientSet collect_ingredients(const Program &p, const Bug &b, const Location &loc);

/// Pointer variables connected to `seeds` in the def-use graph of `fn`.
std::vector<std::string> taint(const FunctionDef &fn, const std::vector<std::string> &seeds);

IngredientSet merge(const IngredientSet &a, const IngredientSet &b);

} // namespace heapfix
