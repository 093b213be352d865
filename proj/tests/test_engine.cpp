#include "doctest.h"

#include "heapfix/engine.hpp"
#include "heapfix/patch.hpp"
#include "interp.hpp"
#include "support.hpp"

using namespace heapfix;
using testsupport::fixture;
using testsupport::guard_at;
using testsupport::insert_after;

namespace {

const Bug &only_bug(const std::vector<Bug> &bugs) {
  REQUIRE(bugs.size() == 1);
  return bugs[0];
}

Program patched(const Program &p, const Patch &patch) { return apply_patch(p, patch).program; }

} // namespace

TEST_CASE("running example footprint") {
  Program p = fixture("running_example");
  Footprint fp = summarize_all(p).at("VERIFY_PARAM_new");
  REQUIRE(fp.effects.size() == 2);
  CHECK_FALSE(fp.incomplete);
  const Effect *err = nullptr, *ok = nullptr;
  for (const auto &e : fp.effects)
    (e.exit == Exit::Err ? err : ok) = &e;
  REQUIRE(err);
  REQUIRE(ok);
  CHECK(err->err->kind == BugKind::Npe);
  CHECK(canonical(err->post.pure) == "param@0 = nil");
  CHECK(err->post.cells.empty());
  CHECK(canonical(ok->post.pure) == "param@0 != nil");
  CHECK(ok->post.cells.size() == 1);
  REQUIRE(ok->ret);
  CHECK(*ok->ret == Term::sym("param@0"));
  CHECK(ok->pre.cells.empty());
  CHECK(ok->pre.pure.empty());
}

TEST_CASE("trivial function has one identity effect") {
  Program p = parse_program("fn f(){ return NULL; }");
  Footprint fp = summarize(p, "f");
  REQUIRE(fp.effects.size() == 1);
  const Effect &e = fp.effects[0];
  CHECK(e.exit == Exit::Ok);
  CHECK(e.pre.cells.empty());
  CHECK(e.post.cells.empty());
  CHECK(e.post.freed.empty());
  CHECK(e.ret == Term::nil());
}

TEST_CASE("malloc then free gives two ok effects") {
  Program p = parse_program("fn f(){ p := malloc(); free(p); return NULL; }");
  Footprint fp = summarize(p, "f");
  REQUIRE(fp.effects.size() == 2);
  int with_free = 0;
  for (const auto &e : fp.effects) {
    CHECK(e.exit == Exit::Ok);
    CHECK(e.post.cells.empty());
    with_free += e.post.freed.count("p@0") ? 1 : 0;
  }
  CHECK(with_free == 1);
  // the oracle sees exactly the same two outcomes
  auto runs = interp::run_all(p, "f");
  CHECK(runs.size() == 2);
  for (const auto &o : runs)
    CHECK(o.kind == interp::Outcome::Kind::Ok);
}

TEST_CASE("leak on the allocation-success path") {
  Program p = parse_program("fn f(){ p := malloc(); return NULL; }");
  auto bugs = detect_bugs(p);
  const Bug &b = only_bug(bugs);
  CHECK(b.kind == BugKind::Leak);
  CHECK(b.culprit_uid == 1);
  CHECK(canonical(b.path) == "p@0 != nil");
  CHECK(b.objects == std::vector<std::string>{"p"});
  CHECK(interp::reproduces(p, b));
}

TEST_CASE("double free of a parameter") {
  Program p = parse_program("fn f(p: ptr){ free(p); free(p); }");
  auto bugs = detect_bugs(p);
  const Bug &b = only_bug(bugs);
  CHECK(b.kind == BugKind::DoubleFree);
  CHECK(b.culprit_uid == 1);
  CHECK(canonical(b.path) == "p != nil");
  CHECK(interp::reproduces(p, b));
}

TEST_CASE("freeing NULL does nothing") {
  Program p = parse_program("fn f(p: ptr){ if (p == NULL) { free(p); } }");
  CHECK(detect_bugs(p).empty());
  Footprint fp = summarize(p, "f");
  CHECK(fp.effects.size() == 2);
}

TEST_CASE("running example bug and validation of the known patches") {
  Program p = fixture("running_example");
  auto baseline = detect_bugs(p);
  const Bug &b = only_bug(baseline);
  CHECK(b.function == "VERIFY_PARAM_new");
  CHECK(b.kind == BugKind::Npe);
  CHECK(b.culprit_ordinal == 1);
  CHECK(canonical(b.path) == "param@0 = nil");

  for (const char *code : {"if (!param) { return NULL; }", "if (!param) { return param; }",
                           "if (param == NULL) { return param; }"}) {
    auto v = validate(patched(p, insert_after("VERIFY_PARAM_new", 0, code)), b, baseline);
    CHECK_MESSAGE(v.plausible(), code);
  }

  auto v3a = validate(patched(p, insert_after("VERIFY_PARAM_new", 0, "if (false) { return NULL; }")), b,
                      baseline);
  CHECK(v3a.status == ValidationVerdict::Status::NotPlausible);
  CHECK_FALSE(v3a.target_fixed);

  auto v3b = validate(patched(p, insert_after("VERIFY_PARAM_new", 0, "if (param != NULL) { return NULL; }")),
                      b, baseline);
  CHECK_FALSE(v3b.plausible());
  CHECK_FALSE(v3b.target_fixed);
  CHECK(v3b.new_bugs.size() == 1);

  auto v3c = validate(patched(p, insert_after("VERIFY_PARAM_new", 0, "param := app_malloc();")), b, baseline);
  CHECK_FALSE(v3c.plausible());
  CHECK(v3c.target_fixed);
  CHECK(v3c.new_bugs.size() == 1);
}

TEST_CASE("freeing twice on the leaking path introduces a double free") {
  Program p = fixture("leak_return_null");
  auto baseline = detect_bugs(p);
  const Bug &b = only_bug(baseline);
  REQUIRE(b.kind == BugKind::Leak);
  const FunctionDef &fn = *p.find(b.function);
  int alloc = 0;
  for_each_stmt(fn.body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Malloc)
      alloc = s.ordinal;
  });
  auto once = validate(patched(p, insert_after(b.function, alloc, "if (p != NULL) { free(p); }")), b, baseline);
  CHECK(once.plausible());
  auto twice = validate(
      patched(p, insert_after(b.function, alloc, "if (p != NULL) { free(p); free(p); }")), b, baseline);
  CHECK_FALSE(twice.plausible());
  REQUIRE(twice.new_bugs.size() == 1);
}

TEST_CASE("skip patches change nothing") {
  for (const auto &name : testsupport::corpus_names()) {
    Program p = fixture(name);
    auto baseline = detect_bugs(p);
    for (const auto &b : baseline) {
      auto v = validate(patched(p, insert_after(b.function, b.culprit_ordinal, "skip;")), b, baseline);
      CHECK_MESSAGE(!v.target_fixed, name);
      CHECK_MESSAGE(v.new_bugs.empty(), name);
      CHECK(v.status == ValidationVerdict::Status::NotPlausible);
    }
  }
}

TEST_CASE("guard true disables the statement") {
  Program p = parse_program("fn f(p: ptr){ free(p); return p; }");
  Program g = patched(p, guard_at("f", 0, "true"));
  auto runs = interp::run_all(g, "f");
  CHECK(runs.size() >= 2);
  int free_uid = -1;
  for_each_stmt(g.functions[0].body, [&](const Stmt &s) {
    if (s.kind == StmtKind::Free)
      free_uid = s.uid;
  });
  for (const auto &o : runs)
    CHECK(o.executed.count(free_uid) == 0);
  CHECK(detect_bugs(g).empty());
}

TEST_CASE("every corpus bug has a concrete witness") {
  for (const auto &name : testsupport::corpus_names()) {
    Program p = fixture(name);
    for (const auto &b : detect_bugs(p))
      CHECK_MESSAGE(interp::reproduces(p, b), name << " " << std::string(to_string(b.kind)) << " at " << b.culprit_uid);
  }
}

TEST_CASE("a fresh allocation never equals an input value") {
  Program p = parse_program("fn f(q: ptr) {\n  s := malloc();\n  if (s == q) {\n    free(q);\n  }\n  free(s);\n}\n");
  CHECK(detect_bugs(p).empty());
  for (const auto &o : interp::run_all(p, "f"))
    CHECK(o.kind != interp::Outcome::Kind::Err);
  Footprint fp = summarize(p, "f");
  for (const auto &e : fp.effects)
    CHECK(e.exit == Exit::Ok);
}

TEST_CASE("corpus footprints: disjoint paths and separation") {
  for (const auto &name : testsupport::corpus_names()) {
    Program p = fixture(name);
    for (const auto &[fn, fp] : summarize_all(p)) {
      CHECK_FALSE(fp.incomplete);
      for (size_t i = 0; i < fp.effects.size(); ++i) {
        const Effect &a = fp.effects[i];
        CHECK(sat(a.post.pure));
        AliasClosure ac(a.post.pure);
        std::set<Term> reps;
        for (const auto &[loc, c] : a.post.cells)
          CHECK(reps.insert(ac.rep(Term::sym(loc))).second);
        for (const auto &loc : a.post.freed) {
          CHECK(a.post.cells.count(loc) == 0);
          CHECK(reps.insert(ac.rep(Term::sym(loc))).second);
        }
        for (size_t j = i + 1; j < fp.effects.size(); ++j) {
          const Effect &b = fp.effects[j];
          CHECK_MESSAGE((!sat(a.post.pure && b.post.pure) || a.trace != b.trace), name << " " << fn);
        }
      }
    }
  }
}

TEST_CASE("loop bound and path budget") {
  Program p = parse_program("fn f(a: int){ i := 0; while (i < a) { x := malloc(); free(x); i := a; } return NULL; }");
  Footprint fp = summarize(p, "f");
  CHECK_FALSE(fp.incomplete);
  AnalysisConfig tight;
  tight.path_budget = 2;
  Footprint cut = summarize(p, "f", tight);
  CHECK(cut.incomplete);
  CHECK(cut.effects.size() == 2);
  CHECK_FALSE(cut.diagnostics.empty());
}

TEST_CASE("callee failures do not surface in the caller") {
  Program p = parse_program("fn g(q: ptr){ if (q == NULL) { skip; } [q] := NULL; }\n"
                            "fn f(){ g(NULL); return NULL; }");
  Summaries s;
  auto bugs = detect_bugs(p, {}, &s);
  REQUIRE(bugs.size() == 1);
  CHECK(bugs[0].function == "g");
  CHECK(s.at("f").effects.empty());
  CHECK_FALSE(s.at("f").diagnostics.empty());
}

TEST_CASE("bug ids are stable") {
  Program a = fixture("double_free");
  Program b = parse_program(print_program(a));
  auto x = detect_bugs(a), y = detect_bugs(b);
  REQUIRE(x.size() == y.size());
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(x[i].id == y[i].id);
}
