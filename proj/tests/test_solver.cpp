#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <limits>

#include "sdwan/solver.h"

using namespace sdwan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  state = mix(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

// Demand-weighted log fairness with big-M shortfall, the shape the fast
// loop hands to the kernel.
ConvexProblem fairness_problem(std::vector<double> demand, double capacity,
                               double big_m) {
  const std::size_t n = demand.size();
  ConvexProblem p;
  p.n = n;
  p.lower.assign(n, 0.01);
  p.upper.assign(n, capacity);
  p.budget = BudgetConstraint{std::vector<double>(n, 1.0), capacity};
  p.objective = [demand = std::move(demand), big_m](std::span<const double> z,
                                                    double* grad) {
    double value = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      value += -demand[i] * std::log(z[i]) + big_m * std::max(0.0, demand[i] - z[i]);
      if (grad) {
        grad[i] = -demand[i] / z[i];
        if (z[i] < demand[i]) grad[i] -= big_m;
      }
    }
    return value;
  };
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// LP
// ---------------------------------------------------------------------------

TEST_CASE("textbook LP lands on the Bland vertex") {
  LpProblem p;
  p.objective = {-1.0, -1.0};
  p.lower = {0.0, 0.0};
  p.upper = {kInf, kInf};
  p.rows = {{{1.0, 1.0}, Sense::Le, 1.0}};
  const LpResult r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("conflicting rows are infeasible") {
  LpProblem p;
  p.objective = {1.0};
  p.lower = {0.0};
  p.upper = {kInf};
  p.rows = {{{1.0}, Sense::Ge, 3.0}, {{1.0}, Sense::Le, 2.0}};
  CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("missing upper bound is unbounded") {
  LpProblem p;
  p.objective = {-1.0};
  p.lower = {0.0};
  p.upper = {kInf};
  CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows, shifted and free variables") {
  // min x + y  s.t.  x + y = 4, x - y >= 1, x in [-10, 10], y free
  LpProblem p;
  p.objective = {1.0, 1.0};
  p.lower = {-10.0, -kInf};
  p.upper = {10.0, kInf};
  p.rows = {{{1.0, 1.0}, Sense::Eq, 4.0}, {{1.0, -1.0}, Sense::Ge, 1.0}};
  const LpResult r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.x[0] + r.x[1] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.x[0] - r.x[1] >= 1.0 - 1e-7);
}

TEST_CASE("degenerate ties do not cycle") {
  // Classic Beale-style degeneracy; Bland must terminate.
  LpProblem p;
  p.objective = {-0.75, 150.0, -0.02, 6.0};
  p.lower.assign(4, 0.0);
  p.upper.assign(4, kInf);
  p.rows = {{{0.25, -60.0, -0.04, 9.0}, Sense::Le, 0.0},
            {{0.5, -90.0, -0.02, 3.0}, Sense::Le, 0.0},
            {{0.0, 0.0, 1.0, 0.0}, Sense::Le, 1.0}};
  const LpResult r = solve_lp(p);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-0.05).epsilon(1e-7));
}

TEST_CASE("feasibility of every returned LP solution") {
  std::uint64_t rng = 31337;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 3);
    LpProblem p;
    p.objective.resize(n);
    for (auto& c : p.objective) c = uniform01(rng) * 4.0 - 2.0;
    p.lower.assign(n, 0.0);
    p.upper.assign(n, 5.0);
    const int m = 1 + static_cast<int>(uniform01(rng) * 3);
    for (int i = 0; i < m; ++i) {
      LpRow row;
      row.coeffs.resize(n);
      for (auto& a : row.coeffs) a = uniform01(rng) * 2.0;
      row.sense = Sense::Le;
      row.rhs = 1.0 + uniform01(rng) * 6.0;
      p.rows.push_back(std::move(row));
    }
    const LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::Optimal);
    double recomputed = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(r.x[j] >= -1e-7);
      CHECK(r.x[j] <= 5.0 + 1e-7);
      recomputed += p.objective[j] * r.x[j];
    }
    CHECK(recomputed == doctest::Approx(r.objective).epsilon(1e-9));
    for (const auto& row : p.rows) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += row.coeffs[j] * r.x[j];
      CHECK(lhs <= row.rhs + 1e-7);
    }
  }
}

TEST_CASE("LP determinism is bitwise") {
  LpProblem p;
  p.objective = {-1.0, -2.0, 0.5};
  p.lower = {0.0, 0.0, 0.0};
  p.upper = {kInf, 3.0, kInf};
  p.rows = {{{1.0, 1.0, 1.0}, Sense::Le, 7.0}, {{2.0, 1.0, 0.0}, Sense::Ge, 1.0}};
  const LpResult a = solve_lp(p);
  const LpResult b = solve_lp(p);
  REQUIRE(a.x.size() == b.x.size());
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
}

// ---------------------------------------------------------------------------
// Projected gradient
// ---------------------------------------------------------------------------

TEST_CASE("clipped quadratic stops at the box") {
  ConvexProblem p;
  p.n = 1;
  p.lower = {0.0};
  p.upper = {1.0};
  p.objective = [](std::span<const double> x, double* grad) {
    if (grad) grad[0] = 2.0 * (x[0] - 2.0);
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  const ConvexResult r = minimize_convex(p, {0.5});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("equal log weights split the budget evenly") {
  // min -8 ln z1 - 8 ln z2  s.t.  z1 + z2 <= 12
  ConvexProblem p;
  p.n = 2;
  p.lower = {0.01, 0.01};
  p.upper = {kInf, kInf};
  p.budget = BudgetConstraint{{1.0, 1.0}, 12.0};
  p.objective = [](std::span<const double> z, double* grad) {
    if (grad) {
      grad[0] = -8.0 / z[0];
      grad[1] = -8.0 / z[1];
    }
    return -8.0 * std::log(z[0]) - 8.0 * std::log(z[1]);
  };
  const ConvexResult r = minimize_convex(p, {1.0, 2.0});
  CHECK(r.x[0] == doctest::Approx(6.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(6.0).epsilon(1e-4));

  const GridResult g = grid_oracle(p, 0.05);
  REQUIRE(!g.empty);
  CHECK(std::abs(g.x[0] - 6.0) <= 0.05 + 1e-9);
  CHECK(std::abs(g.x[1] - 6.0) <= 0.05 + 1e-9);
  CHECK(r.objective <= g.objective + 1e-9);
}

TEST_CASE("log weights allocate proportionally") {
  // min -9 ln z1 - 3 ln z2  s.t.  z1 + z2 <= 8  ->  (6, 2)
  ConvexProblem p;
  p.n = 2;
  p.lower = {0.01, 0.01};
  p.upper = {kInf, kInf};
  p.budget = BudgetConstraint{{1.0, 1.0}, 8.0};
  p.objective = [](std::span<const double> z, double* grad) {
    if (grad) {
      grad[0] = -9.0 / z[0];
      grad[1] = -3.0 / z[1];
    }
    return -9.0 * std::log(z[0]) - 3.0 * std::log(z[1]);
  };
  const ConvexResult r = minimize_convex(p, {4.0, 4.0});
  CHECK(r.x[0] == doctest::Approx(6.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-4));

  const GridResult g = grid_oracle(p, 0.05);
  REQUIRE(!g.empty);
  CHECK(r.objective <= g.objective + 1e-9);
}

TEST_CASE("non-finite start is rejected") {
  ConvexProblem p;
  p.n = 1;
  p.lower = {0.0};
  p.upper = {1.0};
  p.objective = [](std::span<const double> x, double* grad) {
    if (grad) grad[0] = -1.0 / x[0];
    return -std::log(x[0]);
  };
  CHECK_THROWS_AS(minimize_convex(p, {0.0}), std::invalid_argument);
}

TEST_CASE("projection respects box and budget") {
  ConvexProblem p;
  p.n = 3;
  p.lower = {0.0, 0.0, 0.0};
  p.upper = {4.0, 4.0, 4.0};
  p.budget = BudgetConstraint{{1.0, 1.0, 1.0}, 6.0};
  const std::vector<double> point{5.0, 5.0, 5.0};
  const auto x = project_feasible(p, point);
  CHECK(x[0] + x[1] + x[2] == doctest::Approx(6.0).epsilon(1e-9));
  // Symmetric input, symmetric output.
  CHECK(x[0] == doctest::Approx(x[1]));
  CHECK(x[1] == doctest::Approx(x[2]));
}

TEST_CASE("gradient matches central differences on random fairness instances") {
  std::uint64_t rng = 555;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 2);
    std::vector<double> demand(n);
    for (auto& d : demand) d = 1.0 + 9.0 * uniform01(rng);
    const double capacity = 4.0 + 10.0 * uniform01(rng);
    const ConvexProblem p = fairness_problem(demand, capacity, 100.0);

    std::vector<double> x(n), grad(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.2 + uniform01(rng) * 3.0;
    // Step away from the shortfall kink before differencing.
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(x[i] - demand[i]) < 1e-3) x[i] += 2e-3;

    p.objective(x, grad.data());
    const double h = 1e-5;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> lo = x, hi = x;
      lo[i] -= h;
      hi[i] += h;
      const double fd =
          (p.objective(hi, nullptr) - p.objective(lo, nullptr)) / (2.0 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("minimize_convex tracks the grid oracle on random instances") {
  std::uint64_t rng = 777;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + (trial % 2);
    std::vector<double> demand(n);
    for (auto& d : demand) d = 0.5 + 7.5 * uniform01(rng);
    const double capacity =
        n == 2 ? 2.0 + 10.0 * uniform01(rng) : 2.0 + 5.0 * uniform01(rng);
    const ConvexProblem p = fairness_problem(demand, capacity, 1000.0);

    std::vector<double> start(n, capacity / (2.0 * n));
    const ConvexResult r = minimize_convex(p, start);
    const double resolution = 0.05;
    const GridResult g = grid_oracle(p, resolution);
    REQUIRE(!g.empty);
    CHECK(r.objective <= g.objective + 2.0 * resolution);
  }
}

TEST_CASE("grid oracle basics") {
  SUBCASE("monotone single variable rides the budget") {
    ConvexProblem p;
    p.n = 1;
    p.lower = {0.01};
    p.upper = {kInf};
    p.budget = BudgetConstraint{{1.0}, 5.0};
    p.objective = [](std::span<const double> z, double*) { return -std::log(z[0]); };
    const GridResult g = grid_oracle(p, 0.05);
    REQUIRE(!g.empty);
    CHECK(g.x[0] == doctest::Approx(5.0).epsilon(1e-6));
  }

  SUBCASE("empty feasible set is explicit") {
    ConvexProblem p;
    p.n = 1;
    p.lower = {2.0};
    p.upper = {1.0};
    p.objective = [](std::span<const double>, double*) { return 0.0; };
    const GridResult g = grid_oracle(p, 0.1);
    CHECK(g.empty);
  }

  SUBCASE("dimension guard") {
    ConvexProblem p;
    p.n = 4;
    p.lower.assign(4, 0.0);
    p.upper.assign(4, 1.0);
    p.objective = [](std::span<const double>, double*) { return 0.0; };
    CHECK_THROWS_AS(grid_oracle(p, 0.1), std::invalid_argument);
  }
}

TEST_CASE("convex determinism is bitwise") {
  const ConvexProblem p = fairness_problem({8.0, 8.0}, 12.0, 1e4);
  const ConvexResult a = minimize_convex(p, {3.0, 3.0});
  const ConvexResult b = minimize_convex(p, {3.0, 3.0});
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(a.iterations == b.iterations);
}
