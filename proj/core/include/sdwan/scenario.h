#pragma once

// Scenario files: JSON schema (versioned), the two built-in topologies, and
// structural validation. The JSON dependency stays private to the .cpp.

#include <stdexcept>
#include <string>
#include <vector>

#include "sdwan/controller.h"
#include "sdwan/delay.h"
#include "sdwan/model.h"
#include "sdwan/sim.h"

namespace sdwan {

struct ClassSpec {
  std::string name;
  double max_e2e_delay_ms = 0.0;
  Tier tier = Tier::Weighted;
  int strict_rank = -1;

  bool operator==(const ClassSpec&) const = default;
};

struct Scenario {
  int schema_version = 1;
  std::string name;
  Topology topology;
  std::vector<ClassSpec> classes;
  std::vector<FlowGroup> groups;
  TrafficSpec traffic;
  DelayModelSpec delay_model;
  SimConfig sim;
  ControlConfig control;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts a file path or "builtin:mstp_only" / "builtin:sdwan_mix".
// Throws ScenarioError with field-level diagnostics on malformed input.
Scenario load_scenario(const std::string& path_or_builtin);

Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& scenario);

// Cross-reference checks beyond raw parsing: route links exist, continuation
// chains reach the group's spoke, traffic streams resolve, control periods
// align with the measurement period. Empty result = runnable.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Original all-MSTP network: 18 Mbps hub<->spoke lines, single-path groups.
Scenario builtin_mstp_only();

// Post-migration mix: MSTP downsized to 6 Mbps, 12 Mbps MV lines, 24 Mbps
// hub-hub MAN usable as a relay by the delay-tolerant classes.
Scenario builtin_sdwan_mix();

}  // namespace sdwan
