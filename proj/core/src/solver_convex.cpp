#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sdwan/solver.h"

namespace sdwan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxConvexIterations = 10000;
constexpr double kArmijoC1 = 1e-4;
constexpr double kArmijoFactor = 0.5;
constexpr double kMinStep = 1e-14;

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double budget_value(const BudgetConstraint& b, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += b.coeffs[i] * x[i];
  return s;
}

}  // namespace

std::vector<double> project_feasible(const ConvexProblem& problem,
                                     std::span<const double> point) {
  const std::size_t n = problem.n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = clamp(point[i], problem.lower[i], problem.upper[i]);
  if (!problem.budget) return x;

  const auto& b = *problem.budget;
  if (b.coeffs.size() != n)
    throw std::invalid_argument("project_feasible: budget width mismatch");
  if (budget_value(b, x) <= b.rhs) return x;

  // The budget is violated at the box projection. The KKT conditions give
  // x_i(lambda) = clamp(v_i - lambda*a_i); the budget value is continuous
  // and non-increasing in lambda, so bisect.
  double floor_value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.coeffs[i] > 0.0 && !std::isfinite(problem.lower[i])) {
      floor_value = -kInf;
      break;
    }
    floor_value += b.coeffs[i] * problem.lower[i];
  }
  if (floor_value > b.rhs + 1e-9)
    throw std::invalid_argument("project_feasible: box and budget are incompatible");

  auto eval = [&](double lambda) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] = clamp(point[i] - lambda * b.coeffs[i], problem.lower[i],
                   problem.upper[i]);
    return budget_value(b, x);
  };

  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (eval(hi) > b.rhs && guard++ < 200) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) > b.rhs)
      lo = mid;
    else
      hi = mid;
  }
  eval(hi);  // final point on the feasible side
  return x;
}

ConvexResult minimize_convex(const ConvexProblem& problem, std::vector<double> start,
                             double tol, int max_iters) {
  const std::size_t n = problem.n;
  if (start.size() != n || problem.lower.size() != n || problem.upper.size() != n)
    throw std::invalid_argument("minimize_convex: dimension mismatch");

  std::vector<double> x = project_feasible(problem, start);
  std::vector<double> grad(n, 0.0);
  double value = problem.objective(x, grad.data());
  if (!std::isfinite(value))
    throw std::invalid_argument("minimize_convex: non-finite objective at start");

  ConvexResult best{x, value, false, 0};

  if (max_iters <= 0) max_iters = kMaxConvexIterations;

  std::vector<double> trial(n), shifted(n);
  for (int it = 1; it <= max_iters; ++it) {
    best.iterations = it;

    // Unit-step projected-gradient residual as the KKT measure.
    for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] - grad[i];
    const std::vector<double> pg = project_feasible(problem, shifted);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(x[i] - pg[i]));
    if (residual <= tol) {
      best.x = x;
      best.objective = value;
      best.converged = true;
      return best;
    }

    double step = 1.0;
    bool accepted = false;
    while (step >= kMinStep) {
      for (std::size_t i = 0; i < n; ++i) shifted[i] = x[i] - step * grad[i];
      trial = project_feasible(problem, shifted);
      double move2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = trial[i] - x[i];
        move2 += d * d;
      }
      if (move2 == 0.0) break;  // projection pinned us; no descent direction
      const double trial_value = problem.objective(trial, nullptr);
      if (std::isfinite(trial_value) &&
          trial_value <= value - (kArmijoC1 / step) * move2) {
        x = trial;
        value = trial_value;
        accepted = true;
        break;
      }
      step *= kArmijoFactor;
    }
    if (!accepted) break;  // stalled (kink or optimum tighter than tol)

    problem.objective(x, grad.data());
    if (value < best.objective) {
      best.x = x;
      best.objective = value;
    }
  }

  if (value < best.objective) {
    best.x = x;
    best.objective = value;
  }
  best.converged = false;
  return best;
}

GridResult grid_oracle(const ConvexProblem& problem, double resolution) {
  if (problem.n > 3)
    throw std::invalid_argument("grid_oracle: more than 3 variables");
  if (resolution <= 0.0) throw std::invalid_argument("grid_oracle: bad resolution");

  const std::size_t n = problem.n;
  std::vector<std::vector<double>> axes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = problem.lower[i];
    if (!std::isfinite(lo))
      throw std::invalid_argument("grid_oracle: unbounded-below variable");
    double hi = problem.upper[i];
    if (problem.budget && problem.budget->coeffs[i] > 0.0) {
      // Tightest value x_i can take with every other variable at its floor.
      double others = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others += problem.budget->coeffs[j] * problem.lower[j];
      hi = std::min(hi, lo + (problem.budget->rhs - others -
                              problem.budget->coeffs[i] * lo) /
                             problem.budget->coeffs[i]);
    }
    if (!std::isfinite(hi))
      throw std::invalid_argument("grid_oracle: unbounded variable");
    if (lo <= hi + 1e-12) {
      for (double v = lo; v < hi - 1e-12; v += resolution) axes[i].push_back(v);
      axes[i].push_back(hi);  // boundary point always present
    }
    if (axes[i].empty()) return {};
  }

  GridResult result;
  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
    bool feasible = true;
    if (problem.budget)
      feasible = budget_value(*problem.budget, x) <= problem.budget->rhs + 1e-9;
    if (feasible) {
      const double v = problem.objective(x, nullptr);
      if (result.empty || v < result.objective) {
        result.empty = false;
        result.x = x;
        result.objective = v;
      }
    }
    // Odometer increment, last axis fastest.
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return result;
    }
    if (n == 0) return result;
  }
}

}  // namespace sdwan
