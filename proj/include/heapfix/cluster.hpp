#pragma once

#include <map>
#include <string>
#include <vector>

#include "heapfix/meta.hpp"
#include "heapfix/patch.hpp"

namespace heapfix {

struct Member {
  Patch patch;
  std::string text;
  int size = 0;
  MetaFootprint footprint; // patched function, abstracted
};

/// Patches whose footprint differences against the buggy function are
/// byte-identical.
struct EquivClass {
  std::vector<std::string> summary;
  std::string key;
  std::vector<Member> members;
  size_t representative = 0; // smallest AST, then smallest text
  bool plausible = false;
  Reward reward;

  const Member &rep() const { return members[representative]; }
};

struct RefineResult {
  size_t cls = 0;
  bool is_new = false;
  bool duplicate = false;
};

class ClassStore {
public:
  RefineResult refine(const Patch &patch, const MetaFootprint &patched, const MetaFootprint &original,
                      const Bug &b);
  const std::vector<EquivClass> &classes() const { return classes_; }
  bool seen(const std::string &text) const { return by_text_.count(text) != 0; }

private:
  std::vector<EquivClass> classes_;
  std::map<std::string, size_t> by_key_;
  std::map<std::string, size_t> by_text_;
};

/// Indices of `classes` by ascending representative size, stable.
std::vector<size_t> rank(const std::vector<const EquivClass *> &classes);

} // namespace heapfix
