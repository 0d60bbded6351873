#include "doctest.h"

#include <random>
#include <sstream>
#include <vector>

#include "semistatic/exact_lp.hpp"
#include "semistatic/linalg.hpp"

using namespace semistatic;

namespace {

// Independent optimum finder for box-bounded LPs: enumerate every candidate
// point cut out by n of the hyperplanes (rows at equality plus active bounds),
// keep the feasible ones, and take the best objective.  Valid because a
// nonempty polytope inside a box attains its optimum at a vertex.
struct BruteForce {
  bool feasible = false;
  Rational objective;
};

BruteForce brute_force_box_lp(const LinearProgram& lp) {
  const int n = lp.variable_count();
  struct Plane {
    RVector normal;
    Rational rhs;
  };
  std::vector<Plane> planes;
  for (int i = 0; i < lp.constraint_count(); ++i) {
    RVector normal = RVector::Zero(n);
    for (const LinearTerm& t : lp.row_terms(i)) normal(t.variable) += t.coefficient;
    planes.push_back({normal, lp.rhs(i)});
  }
  for (int j = 0; j < n; ++j) {
    RVector normal = RVector::Zero(n);
    normal(j) = 1;
    planes.push_back({normal, *lp.lower_bound(j)});
  }

  BruteForce result;
  const int total = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  auto consider = [&](const std::vector<int>& subset) {
    RMatrix a(n, n);
    RVector b(n);
    for (int r = 0; r < n; ++r) {
      a.row(r) = planes[subset[r]].normal.transpose();
      b(r) = planes[subset[r]].rhs;
    }
    auto x = solve_linear_system(a, b);
    if (!x) return;
    for (int j = 0; j < n; ++j) {
      if ((*x)(j) < *lp.lower_bound(j)) return;
    }
    RVector act = lp.row_activity(*x);
    for (int i = 0; i < lp.constraint_count(); ++i) {
      if (lp.relation(i) == Relation::LessEqual && act(i) > lp.rhs(i)) return;
      if (lp.relation(i) == Relation::GreaterEqual && act(i) < lp.rhs(i)) return;
      if (lp.relation(i) == Relation::Equal && act(i) != lp.rhs(i)) return;
    }
    const Rational value = lp.objective_value(*x);
    if (!result.feasible) {
      result.feasible = true;
      result.objective = value;
    } else if (lp.sense() == Sense::Maximize ? value > result.objective
                                             : value < result.objective) {
      result.objective = value;
    }
  };
  // All n-subsets of planes, lexicographic.
  std::vector<int> subset;
  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(subset.size()) == n) {
      consider(subset);
      return;
    }
    for (int i = start; i < total; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);
  return result;
}

}  // namespace

TEST_CASE("one variable, one row: maximize x subject to x <= 3") {
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  lp.add_constraint({{x, Rational(1)}}, Relation::LessEqual, Rational(3));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == Rational(3));
  CHECK(sol.primal(x) == Rational(3));
  CHECK(verify_certificate(lp, sol));
}

TEST_CASE("infeasible pair produces a verifiable farkas certificate") {
  LinearProgram lp;
  int x = lp.add_variable("x");
  lp.add_constraint({{x, Rational(1)}}, Relation::GreaterEqual, Rational(2));
  lp.add_constraint({{x, Rational(1)}}, Relation::LessEqual, Rational(1));
  lp.set_objective(Sense::Minimize, {{x, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  CHECK(verify_certificate(lp, sol));
  CHECK(sol.farkas(0) >= 0);
  CHECK(sol.farkas(1) <= 0);
}

TEST_CASE("unbounded problem returns a feasible point and an improving ray") {
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Unbounded);
  CHECK(verify_certificate(lp, sol));
  CHECK(sol.ray(x) > 0);
}

TEST_CASE("free variables and equalities") {
  LinearProgram lp;
  int x = lp.add_variable("x");
  int y = lp.add_variable("y");
  lp.add_constraint({{x, Rational(1)}, {y, Rational(1)}}, Relation::GreaterEqual, Rational(2));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(-1)}}, Relation::Equal, Rational(0));
  lp.set_objective(Sense::Minimize, {{x, Rational(1)}, {y, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == Rational(2));
  CHECK(sol.primal(x) == Rational(1));
  CHECK(sol.primal(y) == Rational(1));
}

TEST_CASE("lower bound without rows prices through the bound term") {
  LinearProgram lp;
  lp.add_variable("x", Rational(3, 2));
  lp.set_objective(Sense::Minimize, {{0, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == Rational(3, 2));
}

TEST_CASE("upper bounds materialize as rows with visible duals") {
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0), Rational(5));
  lp.set_objective(Sense::Maximize, {{x, Rational(2)}});
  CHECK(lp.constraint_count() == 1);
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == Rational(10));
  CHECK(sol.dual(0) == Rational(2));
}

TEST_CASE("tampered certificates are rejected") {
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  int y = lp.add_variable("y", Rational(0));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(2)}}, Relation::LessEqual, Rational(4));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(-1)}}, Relation::GreaterEqual, Rational(-1));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}, {y, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(verify_certificate(lp, sol));

  LPSolution bad = sol;
  bad.objective += Rational(1, 1000000);
  CHECK_FALSE(verify_certificate(lp, bad));

  bad = sol;
  bad.primal(0) -= Rational(1, 7);
  CHECK_FALSE(verify_certificate(lp, bad));

  bad = sol;
  bad.dual(0) += Rational(1, 3);
  CHECK_FALSE(verify_certificate(lp, bad));
}

TEST_CASE("degenerate ties terminate under the anti-cycling rule") {
  // Classic degeneracy: many redundant rows through the origin.
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  int y = lp.add_variable("y", Rational(0));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(-1)}}, Relation::LessEqual, Rational(0));
  lp.add_constraint({{x, Rational(2)}, {y, Rational(-1)}}, Relation::LessEqual, Rational(0));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(-2)}}, Relation::LessEqual, Rational(0));
  lp.add_constraint({{y, Rational(1)}}, Relation::LessEqual, Rational(3));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}});
  LPSolution sol = solve(lp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == Rational(3, 2));  // 2x <= y <= 3 binds
}

TEST_CASE("solve is deterministic") {
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  int y = lp.add_variable("y", Rational(0));
  lp.add_constraint({{x, Rational(1)}, {y, Rational(1)}}, Relation::LessEqual, Rational(7));
  lp.add_constraint({{x, Rational(3)}, {y, Rational(-1)}}, Relation::GreaterEqual, Rational(1));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}, {y, Rational(2)}});
  LPSolution a = solve(lp);
  LPSolution b = solve(lp);
  CHECK(a.objective == b.objective);
  CHECK(a.primal == b.primal);
  CHECK(a.dual == b.dual);
}

TEST_CASE("random box LPs agree with brute-force vertex enumeration") {
  std::mt19937_64 rng(20260816);
  auto draw = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  int infeasible_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = draw(1, 3);
    const int m = draw(1, 4);
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), Rational(0), Rational(5));
    // The box rows added by add_variable land before these, which is fine.
    for (int i = 0; i < m; ++i) {
      std::vector<LinearTerm> terms;
      for (int j = 0; j < n; ++j) {
        int c = draw(-3, 3);
        if (c != 0) terms.push_back({j, Rational(c)});
      }
      if (terms.empty()) terms.push_back({0, Rational(1)});
      Relation rel = static_cast<Relation>(draw(0, 2));
      lp.add_constraint(std::move(terms), rel, Rational(draw(-6, 6)));
    }
    std::vector<LinearTerm> obj;
    for (int j = 0; j < n; ++j) obj.push_back({j, Rational(draw(-5, 5))});
    lp.set_objective(draw(0, 1) ? Sense::Maximize : Sense::Minimize, std::move(obj));

    LPSolution sol = solve(lp);
    BruteForce expect = brute_force_box_lp(lp);
    if (expect.feasible) {
      REQUIRE(sol.status == SolveStatus::Optimal);
      CHECK(sol.objective == expect.objective);
    } else {
      REQUIRE(sol.status == SolveStatus::Infeasible);
      ++infeasible_seen;
    }
  }
  CHECK(infeasible_seen > 0);
}

TEST_CASE("solve counts equal certified counts") {
  reset_solve_stats();
  LinearProgram lp;
  int x = lp.add_variable("x", Rational(0));
  lp.add_constraint({{x, Rational(1)}}, Relation::LessEqual, Rational(1));
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}});
  solve(lp);
  solve(lp);
  SolveStats stats = solve_stats();
  CHECK(stats.solves == 2);
  CHECK(stats.certified == 2);
}

TEST_CASE("write_lp emits a readable dump") {
  LinearProgram lp;
  int x = lp.add_variable("price", Rational(1, 2));
  lp.add_constraint({{x, Rational(2)}}, Relation::LessEqual, Rational(3), "cap");
  lp.set_objective(Sense::Maximize, {{x, Rational(1)}});
  std::ostringstream out;
  write_lp(lp, out);
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("cap: 2 price <= 3") != std::string::npos);
  CHECK(text.find("price >= 1/2") != std::string::npos);
}
