#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "heapfix/localize.hpp"
#include "heapfix/patch.hpp"
#include "support.hpp"

using namespace heapfix;
using testsupport::fixture;

namespace {

Bug first_bug(const Program &p) {
  auto bugs = detect_bugs(p);
  REQUIRE_FALSE(bugs.empty());
  return bugs[0];
}

// Reference taint: iterate every def-use statement until nothing changes.
std::set<std::string> taint_fixpoint(const FunctionDef &fn, std::set<std::string> reached) {
  auto ptr = [&](const std::string &v) { return fn.var_kinds.count(v) && fn.var_kinds.at(v) == VarKind::Ptr; };
  std::set<std::string> out;
  for (const auto &v : reached)
    if (ptr(v))
      out.insert(v);
  bool grew = true;
  while (grew) {
    grew = false;
    for_each_stmt(fn.body, [&](const Stmt &s) {
      std::vector<std::string> group;
      if (s.kind == StmtKind::Assign || s.kind == StmtKind::Load || s.kind == StmtKind::Call)
        group.push_back(s.target);
      if (s.kind == StmtKind::Load || s.kind == StmtKind::Store)
        group.push_back(s.address.is_var() ? s.address.name : "");
      if (s.kind == StmtKind::Assign || s.kind == StmtKind::Store)
        group.push_back(s.value.is_var() ? s.value.name : "");
      if (s.kind == StmtKind::Call)
        for (const auto &a : s.args)
          group.push_back(a.is_var() ? a.name : "");
      std::vector<std::string> ptrs;
      for (const auto &g : group)
        if (ptr(g))
          ptrs.push_back(g);
      bool hit = std::any_of(ptrs.begin(), ptrs.end(), [&](const std::string &v) { return out.count(v); });
      if (hit && ptrs.size() >= 2)
        for (const auto &v : ptrs)
          grew = out.insert(v).second || grew;
    });
  }
  return out;
}

} // namespace

TEST_CASE("running example localizes to the allocation") {
  Program p = fixture("running_example");
  Bug b = first_bug(p);
  auto locs = localize(b, 1);
  REQUIRE(locs.size() >= 1);
  CHECK(locs[0].location == Location{"VERIFY_PARAM_new", 0, Anchor::After});
  CHECK(locs[0].score == doctest::Approx(1.0 / std::sqrt(2.0)));
  // statements after the culprit only occur on passing paths
  for (const auto &l : localize(b, 10))
    CHECK(l.location.ordinal <= 1);
}

TEST_CASE("single failing path scores every statement 1") {
  Program p = parse_program("fn f(p: ptr){ q := p; free(q); free(q); }");
  Bug b = first_bug(p);
  auto locs = localize(b, 10);
  REQUIRE(locs.size() == 3);
  for (const auto &l : locs)
    CHECK(l.score == doctest::Approx(1.0));
}

TEST_CASE("ochiai arithmetic") {
  CHECK(ochiai(0, 3, 1) == 0.0);
  CHECK(ochiai(1, 0, 0) == 1.0);
  CHECK(ochiai(1, 1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(ochiai(2, 1, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("culprit always included and order independent") {
  std::mt19937 rng(7);
  for (const auto &name : testsupport::corpus_names()) {
    Program p = fixture(name);
    for (const auto &b : detect_bugs(p)) {
      for (int n : {0, 1, 2, 5}) {
        auto locs = localize(b, n);
        CHECK(std::any_of(locs.begin(), locs.end(),
                          [&](const FixLocation &l) { return l.location.ordinal == b.culprit_ordinal; }));
      }
      Bug shuffled = b;
      std::vector<size_t> perm(b.footprint.effects.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<size_t> inverse(perm.size());
      for (size_t i = 0; i < perm.size(); ++i) {
        shuffled.footprint.effects[i] = b.footprint.effects[perm[i]];
        inverse[perm[i]] = i;
      }
      for (auto &i : shuffled.effects)
        i = inverse[i];
      auto x = localize(b, 2), y = localize(shuffled, 2);
      REQUIRE(x.size() == y.size());
      for (size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i].location == y[i].location);
        CHECK(x[i].score == y[i].score);
      }
    }
  }
}

TEST_CASE("ingredients of the running example") {
  Program p = fixture("running_example");
  Bug b = first_bug(p);
  IngredientSet ing = collect_ingredients(p, b, {"VERIFY_PARAM_new", 0, Anchor::After});
  CHECK(ing.ptr_vars == std::vector<std::string>{"param"});
  CHECK(ing.nonptr_vars.empty());
  REQUIRE(ing.constants.size() >= 3);
  CHECK(ing.constants[0] == Operand::null());
  CHECK(ing.constants[1] == Operand::integer(0));
  CHECK(ing.constants[2] == Operand::integer(-1));
}

TEST_CASE("taint follows copies and skips unrelated variables") {
  Program p = parse_program("fn f(p: ptr, r: ptr){ q := p; free(q); free(p); s := r; return s; }");
  const FunctionDef &fn = p.functions[0];
  CHECK(taint(fn, {"p"}) == std::vector<std::string>{"p", "q"});
  Bug b = first_bug(p);
  IngredientSet ing = collect_ingredients(p, b, {"f", b.culprit_ordinal, Anchor::After});
  CHECK(std::find(ing.ptr_vars.begin(), ing.ptr_vars.end(), "r") == ing.ptr_vars.end());
  CHECK(std::find(ing.ptr_vars.begin(), ing.ptr_vars.end(), "s") == ing.ptr_vars.end());
}

TEST_CASE("taint agrees with a fixpoint oracle and ingredients are in scope") {
  for (const auto &name : testsupport::corpus_names()) {
    Program p = fixture(name);
    for (const auto &b : detect_bugs(p)) {
      const FunctionDef &fn = *p.find(b.function);
      auto t = taint(fn, b.objects);
      CHECK(std::set<std::string>(t.begin(), t.end()) ==
            taint_fixpoint(fn, std::set<std::string>(b.objects.begin(), b.objects.end())));
      for (const auto &fl : localize(b, 2)) {
        IngredientSet ing = collect_ingredients(p, b, fl.location);
        for (const auto &v : ing.ptr_vars)
          CHECK_NOTHROW(apply_patch(p, testsupport::insert_after(b.function, fl.location.ordinal,
                                                                 "if (" + v + " == NULL) { skip; }")));
        for (const auto &v : ing.nonptr_vars)
          CHECK_NOTHROW(apply_patch(p, testsupport::insert_after(b.function, fl.location.ordinal,
                                                                 "if (" + v + " == 0) { skip; }")));
      }
    }
  }
}
