#pragma once

// Fast-loop rate allocation, solved per link: maximize demand-weighted log
// fairness while penalizing demand shortfall (big-M) and SLA slack (alpha).
// Shortfall h and slack y are substituted out as exact penalties, leaving a
// single capacity budget, the shape the projected-gradient kernel projects
// onto directly. Allocations map to WFQ weights and shaper rates for
// Weighted-tier classes; Strict-tier allocations are reporting-only.

#include <map>
#include <string>
#include <vector>

#include "sdwan/delay.h"
#include "sdwan/model.h"
#include "sdwan/solver.h"

namespace sdwan {

struct QosClassInput {
  std::string group_id;
  double demand_mbps = 0.0;  // d^k_e, must be > 0 to participate
  double sla_ms = 0.0;       // D_k
  Tier tier = Tier::Weighted;
  int strict_rank = -1;
};

struct QosParams {
  double alpha = 0.01;        // fairness vs SLA-slack trade-off
  double big_m_base = 1e4;    // shortfall penalty scale
  double shaper_headroom = 0.05;
};

struct QosInstance {
  OverlayLink link;
  std::vector<QosClassInput> classes;
  QosParams params;
};

struct QosAlloc {
  double alloc_mbps = 0.0;      // z^k_e
  double sla_slack_ms = 0.0;    // y^k_e (0 when the class is in shortfall)
  double shortfall_mbps = 0.0;  // h^k_e
};

struct QosSolution {
  std::map<std::string, QosAlloc> per_class;
  double objective = 0.0;
  bool converged = true;
};

// Shortfall penalty scale for one class: big-M grows with priority.
double qos_big_m(const QosParams& params, Tier tier, int strict_rank);

// Throws std::invalid_argument when no class has positive demand or the
// capacity cannot fit one rate floor per class.
QosSolution solve_qos_link(const QosInstance& instance, const DelayModelSpec& model);

struct QosAllResult {
  std::map<std::string, QosSolution> per_link;  // links actually solved
  std::map<std::string, std::string> errors;    // link id -> what failed
};

// Solves each link independently (the formulation has no cross-link
// coupling), in sorted link-id order. Zero-demand links are skipped so the
// caller keeps their previous policy; per-link failures are reported
// without aborting the rest.
QosAllResult solve_qos_all(const Topology& topology,
                           const std::map<std::string, std::vector<QosClassInput>>& demands,
                           const DelayModelSpec& model, const QosParams& params);

// Weighted-tier classes get normalized WFQ weights and shaper ceilings
// (alloc plus headroom); Strict classes are recorded unshaped.
LinkQos policy_from_allocation(const QosSolution& solution,
                               const std::map<std::string, Tier>& tiers,
                               double shaper_headroom = 0.05);

}  // namespace sdwan
