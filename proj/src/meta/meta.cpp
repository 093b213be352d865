#include "heapfix/meta.hpp"

#include <algorithm>

#include "json.hpp"

namespace heapfix {

namespace {

using nlohmann::json;

Term rename(const Term &t) { return t.is_sym() ? Term::sym(canonical_symbol(t.name)) : t; }

std::set<std::string> reps(const std::set<std::string> &locs, const AliasClosure &a) {
  std::set<std::string> out;
  for (const auto &l : locs)
    out.insert(to_string(a.rep(Term::sym(l))));
  return out;
}

std::string ret_text(const std::optional<Term> &ret, const AliasClosure &a) {
  if (!ret)
    return "-";
  if (ret->is_int())
    return std::to_string(ret->value);
  return to_string(a.rep(*ret));
}

std::vector<std::string> sym_diff(const std::set<std::string> &x, const std::set<std::string> &y) {
  std::vector<std::string> out;
  std::set_symmetric_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

StateDiff state_diff(const MetaState &p, const MetaState *b) {
  static const MetaState empty;
  if (!b)
    b = &empty;
  AliasClosure merged(p.path && b->path);
  StateDiff d;
  d.path = normalize(p.path);
  d.Hdiff = sym_diff(reps(p.H, merged), reps(b->H, merged));
  d.Ddiff = sym_diff(reps(p.D, merged), reps(b->D, merged));
  for (const auto &[m, r] : merged.equalities())
    d.A.emplace_back(to_string(m), to_string(r));
  return d;
}

json state_json(const StateDiff &d) {
  json a = json::array();
  for (const auto &[m, r] : d.A)
    a.push_back({m, r});
  return {{"path", to_string(d.path)}, {"Hdiff", d.Hdiff}, {"Ddiff", d.Ddiff}, {"A", a}};
}

json meta_state_json(const MetaState &s) {
  return {{"path", canonical(s.path)},
          {"H", std::vector<std::string>(s.H.begin(), s.H.end())},
          {"D", std::vector<std::string>(s.D.begin(), s.D.end())}};
}

} // namespace

std::string canonical_symbol(const std::string &name) {
  if (!name.empty() && name[0] == '~')
    return "~" + canonical_symbol(name.substr(1));
  auto at = name.find('@');
  return at == std::string::npos ? name : name.substr(at);
}

PureFormula canonical_symbols(const PureFormula &f) {
  std::map<std::string, Term> sigma;
  for (const auto &s : symbols(f))
    sigma[s] = Term::sym(canonical_symbol(s));
  PureFormula out = substitute(f, sigma);
  out.weakened = f.weakened;
  return out;
}

MetaState abs_state(const SymState &s, Exit exit, const std::optional<Term> &ret) {
  MetaState m;
  m.path = canonical_symbols(s.pure);
  m.exit = exit;
  if (ret)
    m.ret = rename(*ret);
  for (const auto &[loc, c] : s.cells)
    m.H.insert(canonical_symbol(loc));
  for (const auto &loc : s.freed)
    m.D.insert(canonical_symbol(loc));
  m.A = AliasClosure(m.path);
  return m;
}

MetaFootprint abs(const Footprint &fp) {
  MetaFootprint out;
  for (const auto &e : fp.effects) {
    MetaEffect m;
    m.exit = e.exit;
    if (e.ret)
      m.ret = rename(*e.ret);
    m.pre = abs_state(e.pre, e.exit, std::nullopt);
    m.post = abs_state(e.post, e.exit, e.ret);
    out.push_back(std::move(m));
  }
  return out;
}

bool states_indistinguishable(const MetaState &a, const MetaState &b) {
  if (!equivalent(a.path, b.path))
    return false;
  AliasClosure merged(a.path && b.path);
  return reps(a.H, merged) == reps(b.H, merged) && reps(a.D, merged) == reps(b.D, merged) &&
         ret_text(a.ret, merged) == ret_text(b.ret, merged);
}

bool effects_indistinguishable(const MetaEffect &a, const MetaEffect &b) {
  return a.exit == b.exit && states_indistinguishable(a.pre, b.pre) &&
         states_indistinguishable(a.post, b.post);
}

bool footprints_indistinguishable(const MetaFootprint &a, const MetaFootprint &b) {
  auto covered = [](const MetaFootprint &x, const MetaFootprint &y) {
    for (const auto &e : x)
      if (std::none_of(y.begin(), y.end(), [&](const MetaEffect &f) { return effects_indistinguishable(e, f); }))
        return false;
    return true;
  };
  return covered(a, b) && covered(b, a);
}

bool EffectDiff::identity() const {
  return exit_b && *exit_b == exit_p && pre.Hdiff.empty() && pre.Ddiff.empty() && post.Hdiff.empty() &&
         post.Ddiff.empty() && !ret_changed;
}

std::string EffectDiff::canonical() const {
  json j = {{"exit_b", exit_b ? to_string(*exit_b) : "none"},
            {"exit_p", to_string(exit_p)},
            {"pre", state_json(pre)},
            {"post", state_json(post)},
            {"ret", ret},
            {"ret_changed", ret_changed}};
  return j.dump();
}

std::string to_json_text(const MetaEffect &e) {
  AliasClosure a(e.post.path);
  json j = {{"exit", to_string(e.exit)},
            {"ret", ret_text(e.ret, a)},
            {"pre", meta_state_json(e.pre)},
            {"post", meta_state_json(e.post)}};
  return j.dump();
}

std::vector<EffectDiff> footprint_diff(const MetaFootprint &patched, const MetaFootprint &original) {
  std::vector<std::string> order;
  for (const auto &e : original)
    order.push_back(to_json_text(e));
  std::vector<EffectDiff> out;
  for (const auto &ep : patched) {
    std::vector<size_t> cands;
    for (size_t j = 0; j < original.size(); ++j)
      if (implies(ep.post.path, original[j].post.path))
        cands.push_back(j);
    const MetaEffect *eb = nullptr;
    if (!cands.empty()) {
      // strongest path first, then an indistinguishable original, then text order
      auto key = [&](size_t j) {
        int strength = 0;
        for (size_t k : cands)
          strength += implies(original[j].post.path, original[k].post.path) ? 1 : 0;
        return std::make_tuple(-strength, effects_indistinguishable(ep, original[j]) ? 0 : 1, order[j]);
      };
      size_t best = *std::min_element(cands.begin(), cands.end(),
                                      [&](size_t x, size_t y) { return key(x) < key(y); });
      eb = &original[best];
    }
    EffectDiff d;
    if (eb)
      d.exit_b = eb->exit;
    d.exit_p = ep.exit;
    d.pre = state_diff(ep.pre, eb ? &eb->pre : nullptr);
    d.post = state_diff(ep.post, eb ? &eb->post : nullptr);
    AliasClosure merged(ep.post.path && (eb ? eb->post.path : PureFormula{}));
    d.ret = ret_text(ep.ret, merged);
    d.ret_changed = !eb || ret_text(eb->ret, merged) != d.ret;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::string> diff_summary(const std::vector<EffectDiff> &diff) {
  std::set<std::string> s;
  for (const auto &d : diff)
    s.insert(d.canonical());
  return {s.begin(), s.end()};
}

bool on_bug_path(const PureFormula &path, const Bug &b) { return implies(path, canonical_symbols(b.path)); }

bool is_plausible_class(const std::vector<EffectDiff> &diff, const Bug &b, const MetaFootprint &patched) {
  bool reaches = false;
  for (size_t i = 0; i < patched.size() && i < diff.size(); ++i) {
    if (on_bug_path(patched[i].post.path, b)) {
      reaches = true;
      if (patched[i].exit != Exit::Ok)
        return false;
    } else if (!diff[i].identity()) {
      return false;
    }
  }
  return reaches;
}

Reward compute_reward(const std::vector<EffectDiff> &diff, const Bug &b) {
  bool any_buggy = false, all_buggy_changed = true, any_buggy_changed = false, other_changed = false;
  bool all_buggy_ok = true, new_failure = false, buggy_touched = false;
  for (const auto &d : diff) {
    bool changed = !d.identity();
    bool exit_changed = !d.exit_b || *d.exit_b != d.exit_p;
    if (d.exit_p != Exit::Ok && exit_changed)
      new_failure = true;
    if (on_bug_path(d.post.path, b)) {
      any_buggy = true;
      all_buggy_changed = all_buggy_changed && changed;
      any_buggy_changed = any_buggy_changed || changed;
      all_buggy_ok = all_buggy_ok && d.exit_p == Exit::Ok;
      buggy_touched = buggy_touched || exit_changed || !d.pre.Hdiff.empty() || !d.pre.Ddiff.empty() ||
                      !d.post.Hdiff.empty() || !d.post.Ddiff.empty();
    } else if (changed) {
      other_changed = true;
    }
  }
  Reward r;
  if (any_buggy_changed)
    r.pi = all_buggy_changed && !other_changed ? 3 : 1;
  if (any_buggy && all_buggy_ok && !new_failure)
    r.e = 3;
  else if (buggy_touched)
    r.e = 1;
  return r;
}

} // namespace heapfix
