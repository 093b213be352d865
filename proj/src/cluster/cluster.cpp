#include "heapfix/cluster.hpp"

#include <algorithm>
#include <numeric>

namespace heapfix {

RefineResult ClassStore::refine(const Patch &patch, const MetaFootprint &patched, const MetaFootprint &original,
                                const Bug &b) {
  Member m;
  m.patch = patch;
  m.text = patch_text(patch);
  m.size = patch_size(patch);
  auto dup = by_text_.find(m.text);
  if (dup != by_text_.end())
    return {dup->second, false, true};

  auto diff = footprint_diff(patched, original);
  auto summary = diff_summary(diff);
  std::string key;
  for (const auto &s : summary)
    key += s + "\n";
  m.footprint = patched;

  RefineResult r;
  auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    EquivClass c;
    c.summary = std::move(summary);
    c.key = key;
    c.plausible = is_plausible_class(diff, b, patched);
    c.reward = compute_reward(diff, b);
    it = by_key_.emplace(key, classes_.size()).first;
    classes_.push_back(std::move(c));
    r.is_new = true;
  }
  r.cls = it->second;
  EquivClass &c = classes_[r.cls];
  c.members.push_back(std::move(m));
  const Member &added = c.members.back();
  const Member &cur = c.rep();
  if (c.members.size() == 1 || added.size < cur.size || (added.size == cur.size && added.text < cur.text))
    c.representative = c.members.size() - 1;
  by_text_.emplace(added.text, r.cls);
  return r;
}

std::vector<size_t> rank(const std::vector<const EquivClass *> &classes) {
  std::vector<size_t> order(classes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return classes[a]->rep().size < classes[b]->rep().size; });
  return order;
}

} // namespace heapfix
