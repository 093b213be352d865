#pragma once

#include <string>

#include "heapfix/repair.hpp"
#include "json.hpp"

namespace heapfix {

using Json = nlohmann::ordered_json;

inline constexpr const char *kReportVersion = "1";

Json state_json(const SymState &s);
/// Full symbolic effect (the D form).
Json effect_json(const Effect &e);
/// Meta-abstracted effect (the D' form).
Json meta_effect_json(const MetaEffect &e);
Json bug_json(const Bug &b);

/// Bugs plus every function footprint in both forms.
Json analysis_json(const Program &p, const Summaries &sums, const std::vector<Bug> &bugs);

/// `timestamp` empty leaves the field out.
Json report_json(const RepairReport &r, const std::string &timestamp);

std::string utc_timestamp();

} // namespace heapfix
