#include "sdwan/delay.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdwan {

namespace {
constexpr double kMbpsToBitsPerMs = 1000.0;
constexpr double kHeadroomEpsMbps = 1e-6;  // denominator guard
}  // namespace

double unreachable_delay_ms() { return std::numeric_limits<double>::infinity(); }

double predict_delay_spr(const OverlayLink& link, double total_load_mbps,
                         const DelayModelSpec& model) {
  if (total_load_mbps < 0.0)
    throw std::invalid_argument("predict_delay_spr: negative load");
  if (total_load_mbps >= link.capacity_mbps) return unreachable_delay_ms();
  const double headroom = link.capacity_mbps - total_load_mbps;
  return link.prop_delay_ms + model.mean_packet_bits / (kMbpsToBitsPerMs * headroom);
}

double predict_delay_qos(const OverlayLink& link, double class_demand_mbps,
                         double class_alloc_mbps, const DelayModelSpec& model) {
  if (class_alloc_mbps < kRateFloorMbps)
    throw std::invalid_argument("predict_delay_qos: allocation below rate floor");
  if (class_demand_mbps < 0.0)
    throw std::invalid_argument("predict_delay_qos: negative demand");
  if (class_demand_mbps >= class_alloc_mbps) return unreachable_delay_ms();
  const double headroom =
      std::max(kHeadroomEpsMbps, class_alloc_mbps - class_demand_mbps);
  return link.prop_delay_ms + model.mean_packet_bits / (kMbpsToBitsPerMs * headroom);
}

std::optional<double> invert_delay_bound(const OverlayLink& link, double bound_ms,
                                         const DelayModelSpec& model) {
  const double slack_ms = bound_ms - link.prop_delay_ms;
  if (slack_ms <= 0.0) return std::nullopt;
  const double load =
      link.capacity_mbps - model.mean_packet_bits / (kMbpsToBitsPerMs * slack_ms);
  return std::max(0.0, load);
}

}  // namespace sdwan
