#pragma once

// Deterministic discrete-time fluid simulation of the overlay: diurnal
// traffic generation, ingress load balancing per the installed routing
// policy, per-link CBQ scheduling (strict priority ranks, then WFQ with
// shapers) against finite per-class buffers, and 1 s measurement epochs.
//
// Queue accounting runs on integer nano-Mbit internally so that
// arrivals = served + dropped + delta-backlog holds exactly at every tick.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdwan/model.h"

namespace sdwan {

struct SimConfig {
  double tick_s = 0.1;
  double measurement_period_s = 1.0;
  double buffer_limit_mbit = 0.25;  // per class queue
  double horizon_s = 600.0;
  std::uint64_t seed = 0;

  bool operator==(const SimConfig&) const = default;
};

struct DiurnalSpec {
  double base_rate_mbps = 0.0;
  double diurnal_amplitude = 0.0;  // in [0, 1)
  double diurnal_period_s = 86400.0;
  double noise_std = 0.0;  // multiplicative gaussian

  bool operator==(const DiurnalSpec&) const = default;
};

struct TrafficSpec {
  std::map<std::string, DiurnalSpec> per_group;

  bool operator==(const TrafficSpec&) const = default;
};

// base * (1 + amplitude*sin(2*pi*t/period)) * (1 + N(0, noise)), clamped at
// zero. The gaussian draw is a pure function of (seed, stream, tick_index),
// so rates reproduce bitwise regardless of evaluation order.
double offered_rate(const DiurnalSpec& spec, double time_s, std::uint64_t seed,
                    std::uint64_t stream, std::uint64_t tick_index);

// Ingress load balancing: the group's offered rate split over its active
// entry links per the installed ratios. A group absent from the policy (or
// with an empty split) falls back to the uniform split over its full
// candidate set (the all-TNs baseline behavior).
std::map<std::string, double> split_ingress(double offered_mbps,
                                            const SprPolicy& policy,
                                            const FlowGroup& group);

struct SchedClassInput {
  std::string id;
  int strict_rank = -1;      // -1 = Weighted tier
  double wfq_weight = 0.0;   // Weighted tier share (0 = leftover only)
  double shaper_mbps = -1.0; // < 0 = unshaped; ignored for Strict classes
  double backlog_mbit = 0.0;
  double arrivals_mbit = 0.0;
};

struct SchedClassResult {
  double served_mbit = 0.0;
  double dropped_mbit = 0.0;
  double backlog_mbit = 0.0;
};

// One scheduling round on one link: strict ranks drain first (rank 0
// before rank 1, same-rank classes share in proportion to their pending
// fluid), the remaining budget is water-filled over Weighted classes by
// weight with redistribution of unused shares, weighted service is capped
// by shapers, and whatever exceeds the buffer after service is dropped.
std::map<std::string, SchedClassResult> schedule_link_tick(
    double capacity_mbps, double tick_s, double buffer_limit_mbit,
    const std::vector<SchedClassInput>& classes);

// prop + backlog/service, in ms, capped at 10x the class SLA (the cap is
// the whole answer when service is zero).
double estimate_class_delay(double prop_delay_ms, double backlog_mbit,
                            double service_mbps, double sla_ms);

class FluidSimulator {
 public:
  FluidSimulator(const Topology& topology, const std::vector<FlowGroup>& groups,
                 const TrafficSpec& traffic, const SimConfig& config);

  void install(const SprPolicy& spr, const QosPolicy& qos);

  struct EpochResult {
    std::vector<LinkMeasurement> measurements;       // per link, sorted by id
    std::map<std::string, double> offered_mbps;      // per group, epoch mean
  };

  // Advances one measurement period (measurement_period_s / tick_s ticks).
  EpochResult run_epoch();

  std::int64_t epoch() const { return epoch_; }

 private:
  struct Queue {
    std::int64_t backlog = 0;  // nano-Mbit
    std::int64_t arrivals_epoch = 0;
    std::int64_t served_epoch = 0;
    std::int64_t dropped_epoch = 0;
  };
  struct LinkState {
    OverlayLink link;
    std::int64_t budget_per_tick = 0;  // nano-Mbit
    // Group ids that can appear on this link, in deterministic order.
    std::vector<int> group_idx;
    std::vector<Queue> queues;  // parallel to group_idx
  };

  void step_tick();

  Topology topology_;
  std::vector<FlowGroup> groups_;
  TrafficSpec traffic_;
  SimConfig config_;

  std::vector<LinkState> links_;                    // sorted by link id
  std::map<std::string, int> link_index_;
  std::map<std::string, std::map<std::string, int>> queue_index_;  // link -> group -> slot

  SprPolicy spr_;
  QosPolicy qos_;

  std::int64_t epoch_ = 0;
  std::uint64_t tick_count_ = 0;
  int ticks_per_epoch_ = 10;

  std::vector<std::int64_t> offered_epoch_;    // per group, nano-Mbit
  std::vector<std::int64_t> link_arrivals_epoch_;  // per link, nano-Mbit

  // (link slot) -> downstream (link, slot) when served fluid relays onward.
  std::vector<std::vector<std::pair<int, int>>> forward_;
  // Relay fluid handed to the continuation link, delivered next tick.
  std::vector<std::vector<std::int64_t>> pending_, arrivals_tick_;
};

}  // namespace sdwan
