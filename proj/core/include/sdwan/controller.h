#pragma once

// Centralized control plane: a slow loop re-solves routing (min-MLU LP)
// and a fast loop re-solves per-link rate allocation, both time-triggered.
// Solver failures never crash the loop: the previous policy is held and
// the hold is logged.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdwan/delay.h"
#include "sdwan/model.h"
#include "sdwan/qos.h"
#include "sdwan/spr.h"

namespace sdwan {

enum class PolicyMode { AllTns, Mlu, MluQos };

const char* to_string(PolicyMode mode);
std::optional<PolicyMode> policy_mode_from_string(const std::string& s);

struct ControlConfig {
  double spr_period_s = 50.0;
  double qos_period_s = 10.0;
  PolicyMode mode = PolicyMode::MluQos;
  double demand_ewma_alpha = 0.3;
};

// EWMA of per-group offered (pre-drop) ingress rates. Groups with no prior
// observation adopt the first sample directly.
struct DemandEstimate {
  std::map<std::string, double> group_mbps;
};

DemandEstimate update_demand(const DemandEstimate& previous,
                             const std::map<std::string, double>& observed_mbps,
                             double alpha);

// Equal WFQ weights over the Weighted-tier classes on a link, no shapers:
// the fixed queuing configuration used by the non-QoS modes.
LinkQos default_qos_link(const std::vector<std::pair<std::string, Tier>>& classes);

struct ControlEvent {
  double t_s = 0.0;
  std::string kind;    // spr | qos | spr-hold | qos-hold
  std::string detail;
};

class Controller {
 public:
  Controller(const Topology& topology, const std::vector<FlowGroup>& groups,
             const DelayModelSpec& delay_model, const ControlConfig& config,
             const QosParams& qos_params = {});

  // Feed the demand estimate refreshed from the last completed epoch.
  void observe(const DemandEstimate& estimate) { estimate_ = estimate; }
  const DemandEstimate& estimate() const { return estimate_; }

  // t_s must sit on a measurement boundary. Solves whatever the mode's
  // cadence schedules at this instant and installs the results.
  void control_step(double t_s);

  const SprPolicy& spr_policy() const { return spr_; }
  const QosPolicy& qos_policy() const { return qos_; }

  int spr_solves() const { return spr_solves_; }
  int qos_solves() const { return qos_solves_; }
  int policy_holds() const { return policy_holds_; }
  const std::vector<ControlEvent>& events() const { return events_; }

  // Last link loads implied by the installed splits and demand estimate.
  std::map<std::string, double> expected_link_loads() const;

 private:
  void solve_spr_step(double t_s);
  void solve_qos_step(double t_s);
  SprPolicy uniform_policy(bool filtered) const;
  QosPolicy default_qos_policy() const;

  const Topology& topology_;
  std::vector<FlowGroup> groups_;  // sorted by id
  DelayModelSpec delay_model_;
  ControlConfig config_;
  QosParams qos_params_;
  std::map<std::string, Tier> tier_of_;

  DemandEstimate estimate_;
  SprPolicy spr_;
  QosPolicy qos_;

  int spr_solves_ = 0;
  int qos_solves_ = 0;
  int policy_holds_ = 0;
  std::vector<ControlEvent> events_;
};

}  // namespace sdwan
