#include "heapfix/repair.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace heapfix {

namespace {

using nlohmann::ordered_json;

ordered_json probabilities_json(const WeightedGrammar &g) {
  ordered_json out = ordered_json::object();
  for (const auto &[nt, ps] : g.probabilities()) {
    ordered_json rules = ordered_json::object();
    for (const auto &p : ps)
      rules[p.rule] = {p.p_pi, p.p_e};
    out[nt] = std::move(rules);
  }
  return out;
}

ordered_json counters_json(const SessionStats &s) {
  return {{"Ps", s.Ps}, {"C", s.C}, {"rejected", s.rejected}, {"duplicates", s.duplicates}};
}

const char *outcome_name(Offer::Outcome o) {
  switch (o) {
  case Offer::Outcome::Clustered: return "clustered";
  case Offer::Outcome::Duplicate: return "duplicate";
  case Offer::Outcome::Rejected: return "rejected";
  }
  return "?";
}

} // namespace

bool BugReport::fixed() const {
  return std::any_of(classes.begin(), classes.end(), [](const ClassReport &c) { return c.validated; });
}

bool RepairReport::all_fixed() const {
  return std::all_of(bugs.begin(), bugs.end(), [](const BugReport &b) { return b.fixed(); });
}

RepairSession::RepairSession(const Program &p, Bug bug, const std::vector<Bug> &baseline,
                             const Summaries &summaries, RepairConfig cfg)
    : program_(p), bug_(std::move(bug)), baseline_(baseline), summaries_(summaries), cfg_(std::move(cfg)),
      rng_(cfg_.seed), start_(std::chrono::steady_clock::now()) {
  original_ = abs(bug_.footprint);
  if (bug_.footprint.incomplete) {
    error_ = "footprint of '" + bug_.function + "' is incomplete";
    return;
  }
  locations_ = localize(bug_, cfg_.top_locs);
  if (locations_.empty()) {
    error_ = "no fix locations";
    return;
  }
  std::vector<Location> locs;
  for (const auto &fl : locations_) {
    ingredients_ = merge(ingredients_, collect_ingredients(program_, bug_, fl.location));
    locs.push_back(fl.location);
  }
  try {
    grammar_ = build_grammar(*program_.find(bug_.function), ingredients_, locs, cfg_.height);
  } catch (const GrammarError &e) {
    error_ = e.what();
  }
}

Offer RepairSession::offer(const Patch &patch) {
  Offer o;
  o.text = patch_text(patch);
  if (store_.seen(o.text) || rejected_.count(o.text)) {
    ++stats_.duplicates;
    o.outcome = Offer::Outcome::Duplicate;
    if (store_.seen(o.text)) {
      RefineResult r = store_.refine(patch, {}, original_, bug_);
      o.cls = r.cls;
    } else {
      o.error = rejected_.at(o.text);
    }
    return o;
  }
  ++stats_.Ps;
  MetaFootprint patched;
  try {
    PatchedProgram pp = apply_patch(program_, patch);
    Footprint fp = summarize(pp.program, bug_.function, summaries_, cfg_.analysis);
    if (fp.incomplete)
      throw std::runtime_error("patched footprint incomplete");
    patched = abs(fp);
  } catch (const std::exception &e) {
    ++stats_.rejected;
    o.error = e.what();
    rejected_[o.text] = o.error;
    return o;
  }
  RefineResult r = store_.refine(patch, patched, original_, bug_);
  stats_.C = static_cast<int>(store_.classes().size());
  o.outcome = Offer::Outcome::Clustered;
  o.cls = r.cls;
  o.new_class = r.is_new;
  o.reward = store_.classes()[r.cls].reward;
  return o;
}

bool RepairSession::step() {
  if (!ready() || stats_.iterations >= cfg_.max_iters)
    return false;
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  if (elapsed >= cfg_.budget_s)
    return false;
  ordered_json probs;
  if (cfg_.emit_stats)
    probs = probabilities_json(grammar_);
  Derivation d = grammar_.sample(rng_);
  int iter = stats_.iterations++;
  Offer o = offer(d.patch);
  Reward applied;
  if (o.outcome == Offer::Outcome::Clustered && !cfg_.uniform) {
    grammar_.reward(d, o.reward.pi, o.reward.e);
    applied = o.reward;
  }
  if (cfg_.emit_stats) {
    ordered_json line = {{"iter", iter},
                         {"bug_id", bug_.id},
                         {"rules_fired", d.rules},
                         {"patch", o.text},
                         {"outcome", outcome_name(o.outcome)},
                         {"class_key", o.outcome == Offer::Outcome::Rejected ? ordered_json(nullptr)
                                                                             : ordered_json(o.cls)},
                         {"new_class", o.new_class},
                         {"tokens_pi", applied.pi},
                         {"tokens_e", applied.e},
                         {"counters", counters_json(stats_)},
                         {"probabilities", std::move(probs)}};
    stats_lines_.push_back(line.dump());
  }
  return true;
}

void RepairSession::run() {
  while (step()) {
  }
}

BugReport RepairSession::finish() {
  BugReport out;
  out.bug = bug_;
  out.error = error_;
  out.locations = locations_;
  out.ingredients = ingredients_;
  std::vector<ClassReport> reports;
  const auto &classes = store_.classes();
  for (const auto &c : classes) {
    ClassReport r;
    r.summary = c.summary;
    r.plausible = c.plausible;
    r.reward = c.reward;
    r.representative = c.rep().text;
    r.representative_size = c.rep().size;
    for (const auto &m : c.members)
      r.members.push_back(m.text);
    if (c.plausible) {
      stats_.Plp += static_cast<int>(c.members.size());
      ++stats_.Plp_r;
      std::vector<const Member *> order{&c.rep()};
      if (cfg_.member_fallback) {
        std::vector<const Member *> rest;
        for (const auto &m : c.members)
          if (&m != &c.rep())
            rest.push_back(&m);
        std::stable_sort(rest.begin(), rest.end(), [](const Member *a, const Member *b) {
          return a->size != b->size ? a->size < b->size : a->text < b->text;
        });
        order.insert(order.end(), rest.begin(), rest.end());
      }
      for (const Member *m : order) {
        ++stats_.validations;
        ValidationVerdict v = validate(apply_patch(program_, m->patch).program, bug_, baseline_, cfg_.analysis);
        if (v.plausible()) {
          r.validated = true;
          r.validated_by = m->text;
          break;
        }
      }
    }
    reports.push_back(std::move(r));
  }
  std::vector<const EquivClass *> good;
  std::vector<size_t> good_idx;
  for (size_t i = 0; i < reports.size(); ++i)
    if (reports[i].validated) {
      good.push_back(&classes[i]);
      good_idx.push_back(i);
    }
  for (size_t k : rank(good))
    out.classes.push_back(reports[good_idx[k]]);
  for (auto &r : reports)
    if (!r.validated)
      out.classes.push_back(std::move(r));
  stats_.C = static_cast<int>(classes.size());
  out.stats = stats_;
  out.stats_lines = stats_lines_;
  return out;
}

RepairReport repair(const Program &p, const RepairConfig &cfg) {
  RepairReport report;
  report.config = cfg;
  Summaries sums;
  std::vector<Bug> baseline = detect_bugs(p, cfg.analysis, &sums);
  for (const auto &[fn, fp] : sums)
    for (const auto &d : fp.diagnostics)
      report.diagnostics.push_back(fn + ": " + d);
  report.bugs.resize(baseline.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < baseline.size(); i = next++) {
      RepairSession s(p, baseline[i], baseline, sums, cfg);
      s.run();
      report.bugs[i] = s.finish();
    }
  };
  int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(baseline.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }
  return report;
}

} // namespace heapfix
