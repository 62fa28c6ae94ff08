#pragma once

// End-to-end experiment drivers: co-simulate controller and fluid network
// over the configured horizon, write the run artifacts (report.json,
// metrics.csv, policy_log.jsonl), and build the mode-comparison table.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdwan/report.h"
#include "sdwan/scenario.h"

namespace sdwan {

struct RunOptions {
  PolicyMode mode = PolicyMode::MluQos;
  std::uint64_t seed = 0;
  std::optional<double> horizon_s;           // overrides the scenario value
  std::optional<std::string> out_dir;        // no artifacts when unset
};

RunReport run_experiment(const Scenario& scenario, const RunOptions& options);

struct CompareOptions {
  std::vector<PolicyMode> modes;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::optional<double> horizon_s;
};

struct CompareCell {
  bool failed = false;
  double sla_satisfaction_pct = 0.0;  // averaged over seeds
  double avg_delay_ms = 0.0;
  double p95_delay_ms = 0.0;
};

struct CompareTable {
  std::vector<std::string> classes;  // row labels
  std::vector<PolicyMode> modes;     // column labels
  std::vector<std::vector<CompareCell>> cells;  // [row][column]
  std::vector<RunReport> runs;
};

// Runs every (mode, seed) pair into its own subdirectory and emits the
// Table-1-shaped comparison.csv (rows = application classes, columns =
// modes, cells = satisfaction / avg / p95 averaged over seeds). A failed
// run marks its cells instead of aborting the table.
CompareTable compare_modes(const Scenario& scenario, const CompareOptions& options);

std::string compare_to_csv(const CompareTable& table);

}  // namespace sdwan
