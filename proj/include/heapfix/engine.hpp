#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "heapfix/ast.hpp"
#include "heapfix/solver.hpp"

namespace heapfix {

struct AnalysisConfig {
  int unroll = 2;
  int path_budget = 256;
};

enum class Exit { Ok, Err, Abort };
enum class BugKind { Npe, Leak, DoubleFree, UseAfterFree };

const char *to_string(Exit e);
const char *to_string(BugKind k);

/// Symbolic heap with its pure part. `cells` are the points-to atoms Y |-> X,
/// `freed` the dealloc atoms, `vars` the variable atoms v |-> X.
struct SymState {
  PureFormula pure;
  std::map<std::string, Term> cells;
  std::set<std::string> freed;
  std::map<std::string, Term> vars;
  std::set<std::string> exvars;
};

struct ErrInfo {
  BugKind kind = BugKind::Npe;
  int culprit_uid = 0;
  int culprit_ordinal = 0;
  SourcePos pos;
  std::vector<std::string> objects; // program variables naming the culprit object
};

struct Effect {
  SymState pre;
  Exit exit = Exit::Ok;
  SymState post;
  std::optional<Term> ret;
  std::vector<int> trace; // statement ordinals in visiting order
  std::optional<ErrInfo> err;
};

struct Footprint {
  std::string function;
  std::vector<Effect> effects;
  bool incomplete = false;
  std::vector<std::string> diagnostics;
};

using Summaries = std::map<std::string, Footprint>;

/// Per-path summary of one function. Callee summaries are taken from
/// `callees` when present and computed otherwise.
Footprint summarize(const Program &p, const std::string &fn, const Summaries &callees,
                    const AnalysisConfig &cfg = {});
Footprint summarize(const Program &p, const std::string &fn, const AnalysisConfig &cfg = {});
Summaries summarize_all(const Program &p, const AnalysisConfig &cfg = {});

struct Bug {
  std::string id;
  BugKind kind = BugKind::Npe;
  std::string function;
  int culprit_uid = 0;
  int culprit_ordinal = 0;
  SourcePos culprit_pos;
  PureFormula path;
  std::vector<std::string> objects;
  std::vector<size_t> effects; // indices of the manifesting err effects
  Footprint footprint;
};

/// Bugs of one function footprint: err effects grouped by kind and culprit;
/// the bug path is the strongest conjunction implied by every member path.
std::vector<Bug> bugs_of(const Footprint &fp);
std::vector<Bug> detect_bugs(const Program &p, const AnalysisConfig &cfg = {},
                             Summaries *summaries = nullptr);

std::string bug_id(const std::string &function, BugKind kind, int culprit_uid,
                   const PureFormula &path);

struct ValidationVerdict {
  enum class Status { Plausible, NotPlausible, Unknown };
  Status status = Status::Unknown;
  bool target_fixed = false;
  std::vector<std::string> new_bugs;
  std::string diagnostic;
  bool plausible() const { return status == Status::Plausible; }
};

ValidationVerdict validate(const Program &patched, const Bug &target, const std::vector<Bug> &baseline,
                           const AnalysisConfig &cfg = {});

} // namespace heapfix
