#pragma once

// Delay prediction f_e^k used by both optimizers. The form is pluggable via
// DelayModelSpec; the shipped variant is an M/M/1-style predictor, which is
// closed-form, convex and invertible; invertibility is what lets the
// routing problem linearize SLA bounds into per-link load caps.
//
// Unit convention: rates in Mbps, delays in ms. 1 Mbps = 1000 bits/ms, so a
// mean packet of S bits drains in S / (1000 * rate_mbps) ms.

#include <optional>

#include "sdwan/model.h"

namespace sdwan {

struct DelayModelSpec {
  enum class Variant { MM1 };
  Variant variant = Variant::MM1;
  double mean_packet_bits = 12000.0;  // 1500-byte packets

  bool operator==(const DelayModelSpec&) const = default;
};

// Saturation sentinel: a distinguished value, not an overflow. Consumers
// must branch on it (std::isinf) rather than propagate it through math.
double unreachable_delay_ms();

// Link delay as a function of total offered load (all flows). Strictly
// increasing and convex in load on [0, C); returns the sentinel at or above
// capacity. Throws std::invalid_argument on negative load.
double predict_delay_spr(const OverlayLink& link, double total_load_mbps,
                         const DelayModelSpec& model);

// Per-class delay when the class's allocation is treated as a virtual
// server of rate `alloc` draining demand `demand`. Strictly decreasing and
// convex in alloc for alloc > demand; sentinel when there is no headroom.
// Throws std::invalid_argument when alloc is below the rate floor or the
// demand is negative.
double predict_delay_qos(const OverlayLink& link, double class_demand_mbps,
                         double class_alloc_mbps, const DelayModelSpec& model);

// Algebraic inverse of predict_delay_spr: the largest total load the link
// can carry while keeping delay <= bound_ms, clamped at 0. Returns nullopt
// when the bound is not above the propagation delay (infeasible; callers
// drop the link from the group's candidate set).
std::optional<double> invert_delay_bound(const OverlayLink& link, double bound_ms,
                                         const DelayModelSpec& model);

}  // namespace sdwan
