#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heapfix/cluster.hpp"
#include "heapfix/pcfg.hpp"

namespace heapfix {

struct RepairConfig {
  uint64_t seed = 1;
  double budget_s = 60.0;
  int max_iters = 2000; // sample calls
  int height = 6;
  int top_locs = 2;
  bool uniform = false;
  bool member_fallback = false;
  bool emit_stats = false;
  int jobs = 1;
  AnalysisConfig analysis;
};

struct SessionStats {
  int iterations = 0; // sample calls
  int Ps = 0;         // syntactically distinct patches sampled
  int rejected = 0;   // distinct patches that failed to apply or analyze
  int duplicates = 0; // samples repeating an earlier patch
  int C = 0;          // classes
  int Plp = 0;        // members of locally plausible classes
  int Plp_r = 0;      // representatives sent to validation
  int validations = 0;
};

/// What happened to one offered patch.
struct Offer {
  enum class Outcome { Clustered, Duplicate, Rejected } outcome = Outcome::Rejected;
  size_t cls = 0;
  bool new_class = false;
  Reward reward;
  std::string text;
  std::string error;
};

struct ClassReport {
  std::vector<std::string> summary;
  bool plausible = false;
  bool validated = false;
  Reward reward;
  std::string representative;
  int representative_size = 0;
  std::string validated_by; // member text that passed validation
  std::vector<std::string> members;
};

struct BugReport {
  Bug bug;
  std::string error;
  SessionStats stats;
  std::vector<FixLocation> locations;
  IngredientSet ingredients;
  std::vector<ClassReport> classes; // validated first, ranked; then the rest by discovery
  std::vector<std::string> stats_lines;

  bool fixed() const;
};

struct RepairReport {
  RepairConfig config;
  std::string file;
  std::vector<BugReport> bugs;
  std::vector<std::string> diagnostics;

  bool all_fixed() const;
};

/// One bug's synthesize-cluster-reward loop.
class RepairSession {
public:
  RepairSession(const Program &p, Bug bug, const std::vector<Bug> &baseline, const Summaries &summaries,
                RepairConfig cfg);

  bool ready() const { return error_.empty(); }
  const std::string &error() const { return error_; }

  /// Samples, clusters and rewards once. False once the budget is spent.
  bool step();
  void run();
  /// Clusters a given patch; no grammar update.
  Offer offer(const Patch &patch);
  /// Validates plausible classes and builds the report.
  BugReport finish();

  const WeightedGrammar &grammar() const { return grammar_; }
  const ClassStore &store() const { return store_; }
  const SessionStats &stats() const { return stats_; }
  const MetaFootprint &original() const { return original_; }
  const Bug &bug() const { return bug_; }
  const std::vector<FixLocation> &locations() const { return locations_; }

private:
  const Program &program_;
  Bug bug_;
  const std::vector<Bug> &baseline_;
  const Summaries &summaries_;
  RepairConfig cfg_;
  std::string error_;
  std::vector<FixLocation> locations_;
  IngredientSet ingredients_;
  WeightedGrammar grammar_;
  ClassStore store_;
  MetaFootprint original_;
  SessionStats stats_;
  std::mt19937_64 rng_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> stats_lines_;
  std::map<std::string, std::string> rejected_; // patch text -> reason
};

RepairReport repair(const Program &p, const RepairConfig &cfg);

} // namespace heapfix
