#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sdwan/solver.h"

// Dense two-phase simplex over an explicit tableau. General bounds are
// reduced to u >= 0 form first: finite lower bounds are shifted out, free
// variables are split into positive/negative parts, finite upper bounds
// become extra <= rows. Bland's rule (lowest eligible index enters, lowest
// basis index breaks ratio ties) keeps the walk cycle-free and makes the
// pivot sequence (and therefore the output bits) a pure function of the
// input.

namespace sdwan {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kPhase1Eps = 1e-7;
constexpr int kMaxIterations = 100000;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tableau {
  int rows = 0;
  int cols = 0;  // structural + slack/artificial columns, excluding rhs
  std::vector<std::vector<double>> a;  // rows x (cols + 1), last col = rhs
  std::vector<int> basis;              // column index basic in each row
};

void pivot(Tableau& t, std::vector<double>& cost, double& cost_rhs,
           std::vector<double>& cost2, double& cost2_rhs, int prow, int pcol) {
  const double p = t.a[prow][pcol];
  for (int j = 0; j <= t.cols; ++j) t.a[prow][j] /= p;
  for (int i = 0; i < t.rows; ++i) {
    if (i == prow) continue;
    const double f = t.a[i][pcol];
    if (f == 0.0) continue;
    for (int j = 0; j <= t.cols; ++j) t.a[i][j] -= f * t.a[prow][j];
    t.a[i][pcol] = 0.0;
  }
  auto eliminate = [&](std::vector<double>& c, double& crhs) {
    const double f = c[pcol];
    if (f == 0.0) return;
    for (int j = 0; j < t.cols; ++j) c[j] -= f * t.a[prow][j];
    crhs -= f * t.a[prow][t.cols];
    c[pcol] = 0.0;
  };
  eliminate(cost, cost_rhs);
  eliminate(cost2, cost2_rhs);
  t.basis[prow] = pcol;
}

// Returns Optimal or Unbounded; throws on iteration cap.
LpStatus run_simplex(Tableau& t, std::vector<double>& cost, double& cost_rhs,
                     std::vector<double>& cost2, double& cost2_rhs,
                     const std::vector<bool>& allowed, int& iterations) {
  while (true) {
    if (++iterations > kMaxIterations)
      throw std::runtime_error("solve_lp: iteration cap exceeded");

    int pcol = -1;
    for (int j = 0; j < t.cols; ++j) {
      if (allowed[j] && cost[j] < -kPivotEps) {
        pcol = j;
        break;  // Bland: lowest index
      }
    }
    if (pcol < 0) return LpStatus::Optimal;

    int prow = -1;
    double best_ratio = kInf;
    for (int i = 0; i < t.rows; ++i) {
      const double aij = t.a[i][pcol];
      if (aij > kPivotEps) {
        const double ratio = t.a[i][t.cols] / aij;
        if (ratio < best_ratio - kPivotEps ||
            (ratio < best_ratio + kPivotEps &&
             (prow < 0 || t.basis[i] < t.basis[prow]))) {
          best_ratio = ratio;
          prow = i;
        }
      }
    }
    if (prow < 0) return LpStatus::Unbounded;

    pivot(t, cost, cost_rhs, cost2, cost2_rhs, prow, pcol);
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
  const std::size_t n = problem.num_vars();
  if (problem.lower.size() != n || problem.upper.size() != n)
    throw std::invalid_argument("solve_lp: bounds size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (problem.lower[j] > problem.upper[j])
      throw std::invalid_argument("solve_lp: lower bound above upper bound");
    if (!std::isfinite(problem.objective[j]))
      throw std::invalid_argument("solve_lp: non-finite objective coefficient");
  }
  for (const auto& row : problem.rows) {
    if (row.coeffs.size() != n)
      throw std::invalid_argument("solve_lp: row width mismatch");
    for (double c : row.coeffs)
      if (!std::isfinite(c))
        throw std::invalid_argument("solve_lp: non-finite row coefficient");
  }

  // Column layout after bound reduction. Shifted variables occupy one
  // column; free variables two (x = u+ - u-).
  struct ColMap {
    int col_pos;
    int col_neg;   // -1 unless split
    double shift;  // x = shift + u
  };
  std::vector<ColMap> vmap(n);
  int ncols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(problem.lower[j])) {
      vmap[j] = {ncols++, -1, problem.lower[j]};
    } else {
      vmap[j] = {ncols, ncols + 1, 0.0};
      ncols += 2;
    }
  }

  // Expanded rows: originals plus one row per finite upper bound.
  struct XRow {
    std::vector<double> coeffs;
    Sense sense;
    double rhs;
  };
  std::vector<XRow> xrows;
  xrows.reserve(problem.rows.size() + n);
  for (const auto& row : problem.rows) {
    XRow xr{std::vector<double>(ncols, 0.0), row.sense, row.rhs};
    for (std::size_t j = 0; j < n; ++j) {
      const double c = row.coeffs[j];
      if (c == 0.0) continue;
      xr.coeffs[vmap[j].col_pos] += c;
      if (vmap[j].col_neg >= 0) xr.coeffs[vmap[j].col_neg] -= c;
      xr.rhs -= c * vmap[j].shift;
    }
    xrows.push_back(std::move(xr));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(problem.upper[j])) continue;
    XRow xr{std::vector<double>(ncols, 0.0), Sense::Le,
            problem.upper[j] - vmap[j].shift};
    xr.coeffs[vmap[j].col_pos] = 1.0;
    if (vmap[j].col_neg >= 0) xr.coeffs[vmap[j].col_neg] = -1.0;
    xrows.push_back(std::move(xr));
  }

  // Normalize to non-negative rhs, then attach slack/artificial columns.
  const int m = static_cast<int>(xrows.size());
  int total_cols = ncols;
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  for (int i = 0; i < m; ++i) {
    if (xrows[i].rhs < 0.0) {
      for (double& c : xrows[i].coeffs) c = -c;
      xrows[i].rhs = -xrows[i].rhs;
      if (xrows[i].sense == Sense::Le)
        xrows[i].sense = Sense::Ge;
      else if (xrows[i].sense == Sense::Ge)
        xrows[i].sense = Sense::Le;
    }
  }
  for (int i = 0; i < m; ++i) {
    if (xrows[i].sense != Sense::Eq) slack_col[i] = total_cols++;
  }
  int first_artificial = total_cols;
  for (int i = 0; i < m; ++i) {
    // <= rows with non-negative rhs start basic on their slack; others need
    // an artificial.
    if (xrows[i].sense != Sense::Le) art_col[i] = total_cols++;
  }

  Tableau t;
  t.rows = m;
  t.cols = total_cols;
  t.a.assign(m, std::vector<double>(total_cols + 1, 0.0));
  t.basis.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < ncols; ++j) t.a[i][j] = xrows[i].coeffs[j];
    t.a[i][total_cols] = xrows[i].rhs;
    if (slack_col[i] >= 0)
      t.a[i][slack_col[i]] = xrows[i].sense == Sense::Ge ? -1.0 : 1.0;
    if (art_col[i] >= 0) {
      t.a[i][art_col[i]] = 1.0;
      t.basis[i] = art_col[i];
    } else {
      t.basis[i] = slack_col[i];
    }
  }

  // Phase-2 cost row on expanded columns, kept in sync during phase 1.
  std::vector<double> cost2(total_cols, 0.0);
  double cost2_rhs = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double c = problem.objective[j];
    cost2[vmap[j].col_pos] += c;
    if (vmap[j].col_neg >= 0) cost2[vmap[j].col_neg] -= c;
    cost2_rhs -= c * vmap[j].shift;  // objective offset from shifts
  }

  std::vector<bool> allowed(total_cols, true);
  int iterations = 0;

  const bool need_phase1 = first_artificial < total_cols;
  if (need_phase1) {
    std::vector<double> cost1(total_cols, 0.0);
    double cost1_rhs = 0.0;
    for (int j = first_artificial; j < total_cols; ++j) cost1[j] = 1.0;
    // Reduce cost1 against the artificial basis.
    for (int i = 0; i < m; ++i) {
      if (art_col[i] < 0) continue;
      for (int j = 0; j < total_cols; ++j) cost1[j] -= t.a[i][j];
      cost1_rhs -= t.a[i][total_cols];
      cost1[art_col[i]] = 0.0;
    }
    const LpStatus s1 = run_simplex(t, cost1, cost1_rhs, cost2, cost2_rhs,
                                    allowed, iterations);
    (void)s1;  // phase 1 is bounded below by 0; Unbounded cannot occur
    if (-cost1_rhs > kPhase1Eps) return {LpStatus::Infeasible, {}, 0.0};

    // Drive any degenerate artificial out of the basis, or drop its row.
    for (int i = 0; i < m; ++i) {
      if (t.basis[i] < first_artificial) continue;
      int pcol = -1;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::abs(t.a[i][j]) > kPivotEps) {
          pcol = j;
          break;
        }
      }
      if (pcol >= 0) {
        std::vector<double> dummy(total_cols, 0.0);
        double dummy_rhs = 0.0;
        pivot(t, cost2, cost2_rhs, dummy, dummy_rhs, i, pcol);
      }
      // else: redundant row; leaving the artificial basic at zero is safe
      // since the column is disallowed below.
    }
    for (int j = first_artificial; j < total_cols; ++j) allowed[j] = false;
  }

  std::vector<double> dummy(total_cols, 0.0);
  double dummy_rhs = 0.0;
  const LpStatus s2 =
      run_simplex(t, cost2, cost2_rhs, dummy, dummy_rhs, allowed, iterations);
  if (s2 == LpStatus::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

  std::vector<double> u(total_cols, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] >= 0) u[t.basis[i]] = t.a[i][total_cols];

  LpResult result;
  result.status = LpStatus::Optimal;
  result.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = vmap[j].shift + u[vmap[j].col_pos];
    if (vmap[j].col_neg >= 0) v -= u[vmap[j].col_neg];
    result.x[j] = v;
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) obj += problem.objective[j] * result.x[j];
  result.objective = obj;
  return result;
}

}  // namespace sdwan
