#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "heapfix/parser.hpp"
#include "heapfix/report.hpp"

using namespace heapfix;

namespace {

std::string slurp(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string &text, const std::string &path) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text << "\n";
}

// Applies the best validated patch of every fixed bug, remapping ordinals
// of later patches in an already patched function.
Program apply_best(const Program &p, const RepairReport &r) {
  Program out = p;
  std::map<std::string, std::map<int, int>> moved;
  for (const auto &b : r.bugs) {
    if (!b.fixed())
      continue;
    Patch patch = parse_patch(b.classes.front().validated_by);
    auto &m = moved[patch.loc.function];
    if (auto it = m.find(patch.loc.ordinal); it != m.end())
      patch.loc.ordinal = it->second;
    else if (!m.empty())
      continue;
    PatchedProgram pp = apply_patch(out, patch);
    if (m.empty()) {
      m = pp.location_map;
    } else {
      for (auto &[from, to] : m)
        if (auto it = pp.location_map.find(to); it != pp.location_map.end())
          to = it->second;
    }
    out = std::move(pp.program);
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Static-analysis driven repair of heap bugs in .mc programs"};
  app.require_subcommand(1);

  std::string file, out_path, stats_path;
  AnalysisConfig analysis;
  RepairConfig cfg;
  bool apply = false;

  auto *analyze = app.add_subcommand("analyze", "Print bugs and function footprints as JSON");
  analyze->add_option("file", file, "Program file")->required();
  analyze->add_option("--unroll", analysis.unroll, "Loop unrolling bound")->check(CLI::NonNegativeNumber);
  analyze->add_option("--path-budget", analysis.path_budget, "Paths per function")->check(CLI::PositiveNumber);
  analyze->add_option("--out", out_path, "Output path (default stdout)");

  auto *rep = app.add_subcommand("repair", "Search for validated patches of every detected bug");
  rep->add_option("file", file, "Program file")->required();
  rep->add_option("--seed", cfg.seed, "Sampler seed");
  rep->add_option("--budget-s", cfg.budget_s, "Wall-clock seconds per bug")->check(CLI::PositiveNumber);
  rep->add_option("--max-iters", cfg.max_iters, "Samples per bug")->check(CLI::PositiveNumber);
  rep->add_option("--height", cfg.height, "Derivation height bound")->check(CLI::PositiveNumber);
  rep->add_option("--unroll", analysis.unroll, "Loop unrolling bound")->check(CLI::NonNegativeNumber);
  rep->add_option("--path-budget", analysis.path_budget, "Paths per function")->check(CLI::PositiveNumber);
  rep->add_option("--top-locs", cfg.top_locs, "Fix locations per bug")->check(CLI::PositiveNumber);
  rep->add_flag("--uniform", cfg.uniform, "Keep the grammar uniform");
  rep->add_flag("--member-fallback", cfg.member_fallback, "Validate other members when the representative fails");
  rep->add_option("--out", out_path, "Report path (default stdout)");
  rep->add_option("--emit-stats", stats_path, "Per-iteration JSON lines");
  rep->add_flag("--apply-best", apply, "Write FILE.fixed.mc with the best patches applied");
  rep->add_option("--jobs", cfg.jobs, "Bugs repaired in parallel")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    Program p = parse_program(slurp(file));
    if (analyze->parsed()) {
      Summaries sums;
      auto bugs = detect_bugs(p, analysis, &sums);
      emit(analysis_json(p, sums, bugs).dump(2), out_path);
      return 0;
    }
    cfg.analysis = analysis;
    cfg.emit_stats = !stats_path.empty();
    RepairReport r = repair(p, cfg);
    r.file = file;
    if (cfg.emit_stats) {
      std::ofstream stats(stats_path);
      if (!stats)
        throw std::runtime_error("cannot write " + stats_path);
      for (const auto &b : r.bugs)
        for (const auto &line : b.stats_lines)
          stats << line << "\n";
    }
    if (apply) {
      std::string target = file;
      if (target.size() > 3 && target.substr(target.size() - 3) == ".mc")
        target.resize(target.size() - 3);
      std::ofstream fixed(target + ".fixed.mc");
      if (!fixed)
        throw std::runtime_error("cannot write " + target + ".fixed.mc");
      fixed << print_program(apply_best(p, r));
    }
    emit(report_json(r, utc_timestamp()).dump(2), out_path);
    for (const auto &b : r.bugs)
      if (!b.error.empty())
        std::cerr << "bug " << b.bug.id << ": " << b.error << "\n";
    return r.all_fixed() ? 0 : 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
