#pragma once

// Self-contained numerical kernels: a dense two-phase simplex LP solver with
// Bland's anti-cycling rule, and a projected-gradient minimizer for smooth
// convex objectives over a box intersected with one budget row. Both are
// deterministic: identical inputs produce bitwise-identical outputs.
// grid_oracle is a brute-force argmin used by tests as the independent
// verification path.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sdwan {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class Sense { Le, Eq, Ge };

struct LpRow {
  std::vector<double> coeffs;  // dense, one per variable
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct LpProblem {
  std::vector<double> objective;  // minimize c'x
  std::vector<LpRow> rows;
  std::vector<double> lower;  // -inf allowed (variable is split)
  std::vector<double> upper;  // +inf allowed

  std::size_t num_vars() const { return objective.size(); }
};

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense two-phase simplex, Bland's rule for both entering and leaving
// choices. Infeasible/unbounded come back as statuses; exceeding the
// iteration cap (1e5) throws std::runtime_error.
LpResult solve_lp(const LpProblem& problem);

// Objective callback: returns the value at x; when grad is non-null it must
// be filled with the n-dimensional gradient.
using ConvexObjective = std::function<double(std::span<const double> x, double* grad)>;

struct BudgetConstraint {
  std::vector<double> coeffs;  // non-negative
  double rhs = 0.0;            // coeffs' x <= rhs
};

struct ConvexProblem {
  std::size_t n = 0;
  ConvexObjective objective;
  std::vector<double> lower;
  std::vector<double> upper;  // +inf allowed
  std::optional<BudgetConstraint> budget;
};

struct ConvexResult {
  std::vector<double> x;
  double objective = 0.0;
  bool converged = false;  // false: iteration cap hit, best iterate returned
  int iterations = 0;
};

// Euclidean projection onto box-and-budget via bisection on the budget's
// dual variable. Exposed for tests.
std::vector<double> project_feasible(const ConvexProblem& problem,
                                     std::span<const double> point);

// Projected gradient with Armijo backtracking (factor 0.5, initial step 1).
// `start` must be strictly feasible; a non-finite objective there throws
// std::invalid_argument. Stops when the unit-step projected-gradient
// residual drops below tol or after max_iters iterations (the best visited
// iterate is returned either way).
ConvexResult minimize_convex(const ConvexProblem& problem, std::vector<double> start,
                             double tol = 1e-6, int max_iters = 10000);

struct GridResult {
  bool empty = true;  // no feasible grid point
  std::vector<double> x;
  double objective = 0.0;
};

// Exhaustive evaluation of the feasible grid at the given resolution.
// Test-side oracle; refuses problems with more than 3 variables.
GridResult grid_oracle(const ConvexProblem& problem, double resolution);

}  // namespace sdwan
