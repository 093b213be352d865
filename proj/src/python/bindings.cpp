#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heapfix/parser.hpp"
#include "heapfix/report.hpp"

namespace py = pybind11;
using namespace heapfix;

namespace {

std::string analyze(const std::string &source, int unroll, int path_budget) {
  AnalysisConfig cfg{unroll, path_budget};
  Program p = parse_program(source);
  Summaries sums;
  auto bugs = detect_bugs(p, cfg, &sums);
  return analysis_json(p, sums, bugs).dump();
}

std::string run_repair(const std::string &source, uint64_t seed, int max_iters, double budget_s, int height,
                       int top_locs, bool uniform, bool member_fallback, int unroll, int jobs) {
  RepairConfig cfg;
  cfg.seed = seed;
  cfg.max_iters = max_iters;
  cfg.budget_s = budget_s;
  cfg.height = height;
  cfg.top_locs = top_locs;
  cfg.uniform = uniform;
  cfg.member_fallback = member_fallback;
  cfg.analysis.unroll = unroll;
  cfg.jobs = jobs;
  Program p = parse_program(source);
  RepairReport r;
  {
    py::gil_scoped_release release;
    r = repair(p, cfg);
  }
  return report_json(r, "").dump();
}

std::string patch_program(const std::string &source, const std::string &patch) {
  return print_program(apply_patch(parse_program(source), parse_patch(patch)).program);
}

} // namespace

PYBIND11_MODULE(_heapfix, m) {
  py::register_exception<ProgramError>(m, "ProgramError", PyExc_ValueError);
  py::register_exception<PatchError>(m, "PatchError", PyExc_ValueError);

  m.def("format_program", [](const std::string &s) { return print_program(parse_program(s)); },
        py::arg("source"));
  m.def("analyze", &analyze, py::arg("source"), py::arg("unroll") = 2, py::arg("path_budget") = 256);
  m.def("repair", &run_repair, py::arg("source"), py::arg("seed") = 1, py::arg("max_iters") = 2000,
        py::arg("budget_s") = 60.0, py::arg("height") = 6, py::arg("top_locs") = 2, py::arg("uniform") = false,
        py::arg("member_fallback") = false, py::arg("unroll") = 2, py::arg("jobs") = 1);
  m.def("apply_patch", &patch_program, py::arg("source"), py::arg("patch"));
}
