#pragma once

// Run metrics: per-epoch end-to-end delays per flow group, SLA satisfaction
// rates, nearest-rank percentiles, per-epoch MLU, and the per-application
// aggregates the comparison table is built from.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdwan/model.h"
#include "sdwan/scenario.h"

namespace sdwan {

struct GroupReport {
  std::string id;
  std::string klass;
  double sla_satisfaction_pct = 0.0;
  double avg_delay_ms = 0.0;
  double p95_delay_ms = 0.0;
  double offered_mbit = 0.0;
  double delivered_mbit = 0.0;
  std::vector<double> epoch_delay_ms;  // not serialized; raw series
};

struct ClassReport {
  std::string klass;
  double sla_satisfaction_pct = 0.0;
  double avg_delay_ms = 0.0;
  double p95_delay_ms = 0.0;
};

struct RunReport {
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  double horizon_s = 0.0;
  int epochs = 0;
  std::vector<GroupReport> groups;    // sorted by id
  std::vector<ClassReport> classes;   // scenario class order
  std::vector<double> epoch_mlu;
  double max_mlu = 0.0;
  double mean_mlu = 0.0;
  double total_offered_mbit = 0.0;
  double total_delivered_mbit = 0.0;
  int spr_solves = 0;
  int qos_solves = 0;
  int policy_holds = 0;
};

// Nearest-rank percentile (1-based ceil(p*n)); the p95 of 10 samples is the
// largest one.
double nearest_rank_percentile(std::vector<double> samples, double percentile);

// Folds a complete measurement stream into the report. A flow group's
// epoch delay is the traffic-weighted mean over its routes of the sum of
// per-link class delays (relay routes add both links); epochs with no
// traffic count as satisfied and report the propagation delay.
RunReport compute_report(const Scenario& scenario,
                         const std::vector<std::vector<LinkMeasurement>>& epochs,
                         const std::vector<std::map<std::string, double>>& offered_mbps);

std::string report_to_json(const RunReport& report);

// measurements.csv column order: epoch,link,class,throughput_mbps,delay_ms,
// loss_fraction,utilization.
std::string metrics_to_csv(const std::vector<std::vector<LinkMeasurement>>& epochs);
std::vector<std::vector<LinkMeasurement>> metrics_from_csv(const std::string& csv);

}  // namespace sdwan
