#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "heapfix/engine.hpp"

namespace heapfix {

/// Abstract state: path, exit, return value, allocated and deallocated
/// locations, and the alias closure of the path.
struct MetaState {
  PureFormula path;
  Exit exit = Exit::Ok;
  std::optional<Term> ret;
  std::set<std::string> H;
  std::set<std::string> D;
  AliasClosure A;
};

struct MetaEffect {
  Exit exit = Exit::Ok;
  std::optional<Term> ret;
  MetaState pre;
  MetaState post;
};

using MetaFootprint = std::vector<MetaEffect>;

/// Names of allocation and call-result symbols drop the program variable
/// (`param@0` becomes `@0`), so footprints of patches that differ only in a
/// fresh variable name line up.
std::string canonical_symbol(const std::string &name);
PureFormula canonical_symbols(const PureFormula &f);

MetaFootprint abs(const Footprint &fp);
MetaState abs_state(const SymState &s, Exit exit, const std::optional<Term> &ret);

bool states_indistinguishable(const MetaState &a, const MetaState &b);
bool effects_indistinguishable(const MetaEffect &a, const MetaEffect &b);
/// Checked in both directions.
bool footprints_indistinguishable(const MetaFootprint &a, const MetaFootprint &b);

struct StateDiff {
  PureFormula path;
  std::vector<std::string> Hdiff;
  std::vector<std::string> Ddiff;
  std::vector<std::pair<std::string, std::string>> A;
};

struct EffectDiff {
  std::optional<Exit> exit_b; // nullopt: the patched path matches no original path
  Exit exit_p = Exit::Ok;
  StateDiff pre;
  StateDiff post;
  std::string ret;
  bool ret_changed = false;

  bool identity() const;
  std::string canonical() const; // compact JSON with sorted keys
};

/// One entry per patched effect, paired with the original effect of
/// strongest path among those its path implies.
std::vector<EffectDiff> footprint_diff(const MetaFootprint &patched, const MetaFootprint &original);

/// Sorted, deduplicated canonical entries: the class key.
std::vector<std::string> diff_summary(const std::vector<EffectDiff> &diff);

bool on_bug_path(const PureFormula &path, const Bug &b);

bool is_plausible_class(const std::vector<EffectDiff> &diff, const Bug &b, const MetaFootprint &patched);

struct Reward {
  int pi = 0;
  int e = 0;
  bool operator==(const Reward &) const = default;
};

Reward compute_reward(const std::vector<EffectDiff> &diff, const Bug &b);

std::string to_json_text(const MetaEffect &e);

} // namespace heapfix
