#pragma once

// Slow-loop routing: split each flow group's demand over its candidate
// egress routes to minimize the maximum link utilization (or a frozen-load
// quality objective), subject to capacity and SLA-derived load caps. The
// continuous problem is a plain LP; a local-search heuristic over discrete
// single-route assignments is provided alongside it.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdwan/delay.h"
#include "sdwan/model.h"
#include "sdwan/solver.h"

namespace sdwan {

enum class SprObjective { MinMlu, MinQuality };

struct SprCommodity {
  std::string group_id;
  double demand_mbps = 0.0;  // b^k
  double sla_ms = 0.0;       // D_k
  std::vector<RouteOption> routes;  // candidate set E_k
};

struct SprInstance {
  const Topology* topology = nullptr;
  std::vector<SprCommodity> commodities;
  SprObjective objective = SprObjective::MinMlu;
  // Loads the quality objective's delay coefficients are frozen at
  // (successive linearization across control epochs). Missing links = 0.
  std::map<std::string, double> current_loads_mbps;
};

struct SprSolution {
  LpStatus status = LpStatus::Optimal;
  // group id -> entry link id -> split fraction (sums to 1 per group).
  std::map<std::string, std::map<std::string, double>> split;
  std::map<std::string, double> link_loads_mbps;
  double mlu = 0.0;
};

// A flow group whose candidate set is empty after SLA feasibility
// filtering; the instance cannot route it at all.
class GroupInfeasibleError : public std::runtime_error {
 public:
  explicit GroupInfeasibleError(const std::string& group)
      : std::runtime_error("no SLA-feasible route for flow group '" + group + "'"),
        group_id(group) {}
  std::string group_id;
};

// Candidate routes that survive SLA filtering, and the per-link load caps
// the surviving SLAs induce.
struct SprFiltered {
  std::vector<std::vector<RouteOption>> routes;  // per commodity
  std::map<std::string, double> link_load_cap_mbps;
};

// Drops routes whose SLA bound cannot be met even on an empty network
// (bound at or below total propagation, or non-positive inverted load cap;
// a relay route's delay slack is split equally across its links). Throws
// GroupInfeasibleError when a positive-demand commodity loses every route.
SprFiltered filter_routes(const SprInstance& instance, const DelayModelSpec& model);

struct SprLpBuild {
  LpProblem lp;
  SprFiltered filtered;
  // Variable layout: one split variable per (commodity, surviving route),
  // commodity-major in instance order; MLU variable appended when present.
  std::vector<std::pair<int, int>> var_route;  // var -> (commodity, route)
  int mlu_var = -1;
};

SprLpBuild build_spr_lp(const SprInstance& instance, const DelayModelSpec& model);

SprSolution solve_spr(const SprInstance& instance, const DelayModelSpec& model);

// Discrete heuristic: every flow group pinned to exactly one route. Greedy
// least-utilization seeding in descending demand order plus
// best-single-move descent, restarted 3 times with seed-shuffled orders.
SprSolution local_search_spr(const SprInstance& instance, const DelayModelSpec& model,
                             std::uint64_t seed, int max_iters = 1000);

// Thresholds sub-1% splits away and renormalizes over the surviving links.
SprPolicy extract_policy(const SprSolution& solution);

}  // namespace sdwan
