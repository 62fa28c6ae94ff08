#include "sdwan/qos.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdwan {

namespace {

constexpr double kMbpsToBitsPerMs = 1000.0;

// Delay-slack penalty for one class, kept convex-friendly for the
// projected-gradient kernel. The true predictor prop + S/(1000*(z-d))
// saturates at 10*D_k: below the allocation where the prediction reaches
// that ceiling (including the whole shortfall region z <= d) the penalty
// plateaus at 9*D_k instead of blowing up, so the big-M shortfall term owns
// that regime undisturbed. Above it the penalty is the exact (f - D)+ and
// strictly convex.
struct SlackPenalty {
  double demand;
  double sla_ms;
  double prop_ms;
  double packet_bits;

  // Headroom where the prediction equals the 10*D ceiling.
  double ceiling_headroom() const {
    const double denom = 10.0 * sla_ms - prop_ms;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return packet_bits / (kMbpsToBitsPerMs * denom);
  }

  double value(double z) const {
    const double ceiling = 10.0 * sla_ms;
    double f = ceiling;
    const double headroom = z - demand;
    if (headroom > ceiling_headroom())
      f = prop_ms + packet_bits / (kMbpsToBitsPerMs * headroom);
    return std::max(0.0, std::min(f, ceiling) - sla_ms);
  }

  double slope(double z) const {
    const double headroom = z - demand;
    if (headroom <= ceiling_headroom()) return 0.0;  // plateau
    const double f = prop_ms + packet_bits / (kMbpsToBitsPerMs * headroom);
    if (f <= sla_ms) return 0.0;  // SLA already met
    return -packet_bits / (kMbpsToBitsPerMs * headroom * headroom);
  }
};

// Per-class restriction of the objective: phi(z) = -d ln z + M (d-z)+ +
// (alpha/D) pen(z). Piecewise smooth with breakpoints at z = d (shortfall
// hinge), z = d + knee (penalty leaves its plateau) and z = d + h_D (the
// prediction meets the SLA). Given the budget multiplier lambda, the 1-D
// minimizer of phi(z) + lambda z over [floor, cap] is one of a handful of
// closed-form roots and breakpoints.
struct ClassCurve {
  double demand = 0.0;
  double big_m = 0.0;
  double alpha_over_d = 0.0;  // alpha / D_k
  double drain_ms_mbit = 0.0; // S / 1000: ms of queueing per Mbps of headroom
  double knee = 0.0;          // headroom where the prediction hits 10 D_k
  double h_sla = 0.0;         // headroom where the prediction meets D_k
  double floor = kRateFloorMbps;
  double cap = 0.0;
  SlackPenalty penalty;

  double phi(double z) const {
    return -demand * std::log(z) + big_m * std::max(0.0, demand - z) +
           alpha_over_d * penalty.value(z);
  }

  // d(phi)/dz on the strictly-decreasing-penalty piece (knee < h < h_sla).
  double slope_mid(double z, double lambda) const {
    const double h = z - demand;
    return -demand / z - alpha_over_d * drain_ms_mbit / (h * h) + lambda;
  }

  double minimize(double lambda) const {
    std::vector<double> cands{floor, cap};
    const double top_short = std::min(demand, cap);
    if (top_short > floor) {
      cands.push_back(top_short);  // the z = d kink (or cap)
      if (lambda > big_m + 1e-12)
        cands.push_back(std::clamp(demand / (lambda - big_m), floor, top_short));
    }
    if (demand < cap) {
      const double a_hi = std::min(demand + knee, cap);
      const double a_lo = std::min(demand + 1e-12, a_hi);
      if (lambda > 1e-12) cands.push_back(std::clamp(demand / lambda, a_lo, a_hi));
      cands.push_back(a_hi);
      if (std::isfinite(knee) && demand + knee < cap) {
        const double b_hi = std::min(demand + h_sla, cap);
        double lo = demand + knee;
        if (slope_mid(lo + 1e-12, lambda) < 0.0 && slope_mid(b_hi, lambda) > 0.0) {
          double hi = b_hi;
          for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slope_mid(mid, lambda) < 0.0 ? lo : hi) = mid;
          }
          cands.push_back(hi);
        }
        cands.push_back(b_hi);
        if (demand + h_sla < cap && lambda > 1e-12)
          cands.push_back(std::clamp(demand / lambda, demand + h_sla, cap));
      }
    }

    double best_z = floor;
    double best_v = std::numeric_limits<double>::infinity();
    for (double z : cands) {
      z = std::clamp(z, floor, cap);
      const double v = phi(z) + lambda * z;
      if (v < best_v - 1e-15 || (v < best_v + 1e-15 && z < best_z)) {
        best_v = v;
        best_z = z;
      }
    }
    return best_z;
  }
};

// Separable KKT solve: coordinates minimize phi_i(z) + lambda z, lambda
// bisected so the allocations fit the capacity budget.
std::vector<double> allocate_by_dual(const std::vector<ClassCurve>& curves,
                                     double capacity) {
  const std::size_t n = curves.size();
  std::vector<double> z(n);
  auto total_at = [&](double lambda) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = curves[i].minimize(lambda);
      sum += z[i];
    }
    return sum;
  };

  if (total_at(0.0) <= capacity) return z;

  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (total_at(hi) > capacity && guard++ < 200) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (total_at(mid) > capacity ? lo : hi) = mid;
  }
  const double used = total_at(hi);

  // A coordinate jump across its non-convex knee can leave a sliver of
  // budget unassigned; hand it to the largest shortfall class.
  double leftover = capacity - used;
  if (leftover > 1e-12) {
    std::size_t pick = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = curves[i].demand - z[i];
      if (gap > worst) {
        worst = gap;
        pick = i;
      }
    }
    z[pick] = std::min(curves[pick].cap, z[pick] + leftover);
  }
  return z;
}

}  // namespace

double qos_big_m(const QosParams& params, Tier tier, int strict_rank) {
  double rank_weight = 0.0;
  if (tier == Tier::Strict) {
    const int rank = std::clamp(strict_rank, 0, 3);
    rank_weight = (4.0 - rank) / 4.0;
  }
  return params.big_m_base * (1.0 + rank_weight);
}

QosSolution solve_qos_link(const QosInstance& instance, const DelayModelSpec& model) {
  std::vector<const QosClassInput*> classes;
  for (const auto& c : instance.classes)
    if (c.demand_mbps > 0.0) classes.push_back(&c);
  if (classes.empty())
    throw std::invalid_argument("solve_qos_link: no class with positive demand");

  const std::size_t n = classes.size();
  const double capacity = instance.link.capacity_mbps;
  if (capacity < static_cast<double>(n) * kRateFloorMbps)
    throw std::invalid_argument("solve_qos_link: capacity below aggregate rate floor");

  std::vector<double> demand(n), big_m(n);
  std::vector<SlackPenalty> penalty(n);
  double total_demand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    demand[i] = classes[i]->demand_mbps;
    total_demand += demand[i];
    big_m[i] = qos_big_m(instance.params, classes[i]->tier, classes[i]->strict_rank);
    penalty[i] = SlackPenalty{demand[i], classes[i]->sla_ms,
                              instance.link.prop_delay_ms, model.mean_packet_bits};
  }

  const double alpha = instance.params.alpha;
  ConvexProblem problem;
  problem.n = n;
  problem.lower.assign(n, kRateFloorMbps);
  problem.upper.assign(n, capacity);
  problem.budget = BudgetConstraint{std::vector<double>(n, 1.0), capacity};
  problem.objective = [&, n](std::span<const double> z, double* grad) {
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double zi = z[i];
      value += -demand[i] * std::log(zi);
      value += big_m[i] * std::max(0.0, demand[i] - zi);
      value += (alpha / penalty[i].sla_ms) * penalty[i].value(zi);
      if (grad) {
        double g = -demand[i] / zi;
        if (zi < demand[i]) g -= big_m[i];
        g += (alpha / penalty[i].sla_ms) * penalty[i].slope(zi);
        grad[i] = g;
      }
    }
    return value;
  };

  // Proportional share of capacity, floored: strictly feasible by
  // construction (floors fit, the projection trims any overshoot).
  std::vector<double> start(n);
  const double scale = capacity / std::max(capacity, total_demand);
  for (std::size_t i = 0; i < n; ++i)
    start[i] = std::max(kRateFloorMbps, demand[i] * scale);

  // Exact separable KKT point first; first-order descent alone chatters on
  // the big-M hinge when classes carry different priorities.
  std::vector<ClassCurve> curves(n);
  for (std::size_t i = 0; i < n; ++i) {
    ClassCurve& c = curves[i];
    c.demand = demand[i];
    c.big_m = big_m[i];
    c.alpha_over_d = alpha / classes[i]->sla_ms;
    c.drain_ms_mbit = model.mean_packet_bits / 1000.0;
    c.penalty = penalty[i];
    c.knee = penalty[i].ceiling_headroom();
    const double sla_headroom_denom = classes[i]->sla_ms - instance.link.prop_delay_ms;
    c.h_sla = sla_headroom_denom > 0.0
                  ? model.mean_packet_bits / (1000.0 * sla_headroom_denom)
                  : std::numeric_limits<double>::infinity();
    c.cap = capacity;
  }
  const std::vector<double> warm = allocate_by_dual(curves, capacity);
  const double warm_value = problem.objective(warm, nullptr);

  // Polish pass; minimize_convex returns its best visited iterate, so the
  // result can only match or improve the analytic point.
  const ConvexResult polished = minimize_convex(problem, warm, 1e-6, 300);
  const ConvexResult from_start = minimize_convex(problem, start, 1e-6, 300);

  ConvexResult res = polished;
  if (from_start.objective < res.objective) res = from_start;
  if (warm_value < res.objective) {
    res.x = warm;
    res.objective = warm_value;
    res.converged = true;
  }

  QosSolution sol;
  sol.objective = res.objective;
  sol.converged = res.converged;
  for (std::size_t i = 0; i < n; ++i) {
    QosAlloc a;
    a.alloc_mbps = res.x[i];
    a.shortfall_mbps = std::max(0.0, demand[i] - res.x[i]);
    // SLA slack only exists on the served branch; a class in shortfall is
    // accounted by h (the predictor's sentinel is not a number to subtract).
    a.sla_slack_ms = 0.0;
    if (res.x[i] > demand[i]) {
      const double f =
          predict_delay_qos(instance.link, demand[i], res.x[i], model);
      if (std::isfinite(f)) a.sla_slack_ms = std::max(0.0, f - classes[i]->sla_ms);
    }
    sol.per_class[classes[i]->group_id] = a;
  }
  return sol;
}

QosAllResult solve_qos_all(const Topology& topology,
                           const std::map<std::string, std::vector<QosClassInput>>& demands,
                           const DelayModelSpec& model, const QosParams& params) {
  QosAllResult result;
  for (const auto& [link_id, classes] : demands) {  // std::map: sorted by link id
    const OverlayLink* link = topology.find_link(link_id);
    if (!link) {
      result.errors[link_id] = "unknown link";
      continue;
    }
    double total = 0.0;
    for (const auto& c : classes) total += std::max(0.0, c.demand_mbps);
    if (total <= 0.0) continue;  // previous policy stays in force

    QosInstance instance{*link, classes, params};
    try {
      result.per_link[link_id] = solve_qos_link(instance, model);
    } catch (const std::exception& e) {
      result.errors[link_id] = e.what();
    }
  }
  return result;
}

LinkQos policy_from_allocation(const QosSolution& solution,
                               const std::map<std::string, Tier>& tiers,
                               double shaper_headroom) {
  LinkQos qos;
  double weighted_total = 0.0;
  for (const auto& [group, alloc] : solution.per_class) {
    qos.alloc_mbps[group] = alloc.alloc_mbps;
    const auto it = tiers.find(group);
    if (it != tiers.end() && it->second == Tier::Weighted)
      weighted_total += alloc.alloc_mbps;
  }
  for (const auto& [group, alloc] : solution.per_class) {
    const auto it = tiers.find(group);
    if (it == tiers.end() || it->second != Tier::Weighted) continue;
    qos.wfq_weights[group] =
        weighted_total > 0.0 ? alloc.alloc_mbps / weighted_total : 0.0;
    qos.shaper_mbps[group] = alloc.alloc_mbps * (1.0 + shaper_headroom);
  }
  return qos;
}

}  // namespace sdwan
