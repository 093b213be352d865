#include "heapfix/report.hpp"

#include <ctime>

#include "heapfix/parser.hpp"

namespace heapfix {

namespace {

Json operand_json(const Operand &op) { return print_operand(op); }

Json ingredients_json(const IngredientSet &ing) {
  Json constants = Json::array();
  for (const auto &c : ing.constants)
    constants.push_back(operand_json(c));
  return {{"ptr_vars", ing.ptr_vars},
          {"nonptr_vars", ing.nonptr_vars},
          {"constants", constants},
          {"labels", ing.labels}};
}

Json location_json(const Location &l) {
  return {{"function", l.function}, {"ordinal", l.ordinal}, {"anchor", l.anchor == Anchor::After ? "after" : "before"}};
}

Json stats_json(const SessionStats &s) {
  return {{"Ps", s.Ps},
          {"C", s.C},
          {"Plp", s.Plp},
          {"Plp_r", s.Plp_r},
          {"validations", s.validations},
          {"iterations", s.iterations},
          {"rejected", s.rejected},
          {"duplicates", s.duplicates}};
}

Json class_json(const ClassReport &c) {
  Json summary = Json::array();
  for (const auto &s : c.summary)
    summary.push_back(Json::parse(s));
  Json out = {{"summary", summary},
              {"plausible", c.plausible},
              {"validated", c.validated},
              {"reward", {{"pi", c.reward.pi}, {"e", c.reward.e}}},
              {"representative", {{"text", c.representative}, {"ast_size", c.representative_size}}}};
  if (!c.validated_by.empty())
    out["validated_by"] = c.validated_by;
  out["members"] = c.members;
  return out;
}

Json config_json(const RepairConfig &c) {
  return {{"seed", c.seed},
          {"budget_s", c.budget_s},
          {"max_iters", c.max_iters},
          {"height", c.height},
          {"unroll", c.analysis.unroll},
          {"path_budget", c.analysis.path_budget},
          {"top_locs", c.top_locs},
          {"uniform", c.uniform},
          {"member_fallback", c.member_fallback}};
}

} // namespace

Json state_json(const SymState &s) {
  Json cells = Json::object();
  for (const auto &[k, v] : s.cells)
    cells[k] = to_string(v);
  Json vars = Json::object();
  for (const auto &[k, v] : s.vars)
    vars[k] = to_string(v);
  return {{"pure", to_string(s.pure)},
          {"cells", cells},
          {"freed", s.freed},
          {"vars", vars},
          {"exvars", s.exvars}};
}

Json effect_json(const Effect &e) {
  Json out = {{"exit", to_string(e.exit)},
              {"pre", state_json(e.pre)},
              {"post", state_json(e.post)},
              {"ret", e.ret ? Json(to_string(*e.ret)) : Json(nullptr)},
              {"trace", e.trace}};
  if (e.err)
    out["err"] = {{"kind", to_string(e.err->kind)},
                  {"culprit", {{"line", e.err->pos.line}, {"col", e.err->pos.col}, {"ordinal", e.err->culprit_ordinal}}},
                  {"objects", e.err->objects}};
  return out;
}

Json meta_effect_json(const MetaEffect &e) { return Json::parse(to_json_text(e)); }

Json bug_json(const Bug &b) {
  return {{"id", b.id},
          {"kind", to_string(b.kind)},
          {"function", b.function},
          {"culprit", {{"line", b.culprit_pos.line}, {"col", b.culprit_pos.col}, {"ordinal", b.culprit_ordinal}}},
          {"path", to_string(b.path)},
          {"objects", b.objects}};
}

Json analysis_json(const Program &p, const Summaries &sums, const std::vector<Bug> &bugs) {
  Json out = {{"version", kReportVersion}};
  Json bs = Json::array();
  for (const auto &b : bugs)
    bs.push_back(bug_json(b));
  out["bugs"] = bs;
  Json fns = Json::array();
  for (const auto &fn : p.functions) {
    auto it = sums.find(fn.name);
    if (it == sums.end())
      continue;
    const Footprint &fp = it->second;
    Json d = Json::array(), dm = Json::array();
    for (const auto &e : fp.effects)
      d.push_back(effect_json(e));
    for (const auto &e : abs(fp))
      dm.push_back(meta_effect_json(e));
    fns.push_back({{"function", fn.name},
                   {"incomplete", fp.incomplete},
                   {"diagnostics", fp.diagnostics},
                   {"effects", d},
                   {"meta_effects", dm}});
  }
  out["footprints"] = fns;
  return out;
}

Json report_json(const RepairReport &r, const std::string &timestamp) {
  Json out = {{"version", kReportVersion}};
  if (!timestamp.empty())
    out["timestamp"] = timestamp;
  out["file"] = r.file;
  out["config"] = config_json(r.config);
  Json bugs = Json::array();
  for (const auto &br : r.bugs) {
    Json b = bug_json(br.bug);
    if (!br.error.empty())
      b["error"] = br.error;
    b["fixed"] = br.fixed();
    Json locs = Json::array();
    for (const auto &l : br.locations) {
      Json j = location_json(l.location);
      j["score"] = l.score;
      locs.push_back(j);
    }
    b["locations"] = locs;
    b["ingredients"] = ingredients_json(br.ingredients);
    b["stats"] = stats_json(br.stats);
    Json classes = Json::array();
    for (const auto &c : br.classes)
      classes.push_back(class_json(c));
    b["classes"] = classes;
    bugs.push_back(b);
  }
  out["bugs"] = bugs;
  out["diagnostics"] = r.diagnostics;
  return out;
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace heapfix
