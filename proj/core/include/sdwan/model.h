#pragma once

// Shared domain types for the overlay model: topology, flow groups,
// controller policies and per-epoch link measurements. All types are plain
// immutable-after-construction value objects; nothing here owns resources
// or needs synchronization.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sdwan {

enum class LinkKind { Mstp, Mv, Man };
enum class NodeRole { Hub, Spoke };
enum class Tier { Strict, Weighted };

// Fraction of a flow group's traffic below which a link is dropped from the
// installed active set (avoids churning device configs over sub-1% splits).
inline constexpr double kActivationThreshold = 0.01;

// Minimum rate allocation (Mbps) for a class with positive demand; keeps
// the log-fairness term finite.
inline constexpr double kRateFloorMbps = 0.01;

struct Node {
  std::string id;
  NodeRole role = NodeRole::Spoke;

  bool operator==(const Node&) const = default;
};

// One overlay tunnel (hub<->spoke or hub<->hub) over a single access
// network, modeled as a capacity plus a fixed one-way propagation delay.
struct OverlayLink {
  std::string id;
  std::string src;
  std::string dst;
  double capacity_mbps = 0.0;   // C_e
  double prop_delay_ms = 0.0;
  LinkKind kind = LinkKind::Mstp;

  bool operator==(const OverlayLink&) const = default;
};

struct Topology {
  std::vector<Node> nodes;
  std::vector<OverlayLink> links;

  const Node* find_node(const std::string& id) const;
  const OverlayLink* find_link(const std::string& id) const;

  bool operator==(const Topology&) const = default;
};

struct SlaSpec {
  double max_e2e_delay_ms = 0.0;  // D_k

  bool operator==(const SlaSpec&) const = default;
};

// A candidate egress option for a flow group: the entry link at the ingress
// hub, plus the continuation link toward the spoke when the entry is a
// hub-hub relay. Direct options have no continuation.
struct RouteOption {
  std::string entry_link;
  std::optional<std::string> continuation;

  bool is_relay() const { return continuation.has_value(); }
  bool operator==(const RouteOption&) const = default;
};

// An application class aggregate for one hub->spoke pair. `klass` labels the
// application (Critical, VoIP, ...); the id is unique per instance, e.g.
// "office.s1". Strict-tier groups carry a preemption rank (0 = highest).
struct FlowGroup {
  std::string id;
  std::string klass;
  std::string src;  // serving hub
  std::string dst;  // spoke
  SlaSpec sla;
  Tier tier = Tier::Weighted;
  int strict_rank = -1;
  std::vector<RouteOption> routes;
  double demand_mbps = 0.0;  // current measured demand b^k

  // E_k: entry link ids in declared order.
  std::vector<std::string> allowed_links() const;
  const RouteOption* route_for(const std::string& entry_link) const;

  bool operator==(const FlowGroup&) const = default;
};

// Slow-loop output for one flow group: split ratios over the active entry
// links (sum to 1) plus the thresholded active set.
struct GroupSplit {
  std::map<std::string, double> split_ratios;  // entry link id -> x_e^k
  std::set<std::string> active_set;

  bool operator==(const GroupSplit&) const = default;
};

struct SprPolicy {
  std::map<std::string, GroupSplit> groups;  // flow group id -> split

  bool operator==(const SprPolicy&) const = default;
};

// Fast-loop output for one link: per-class rate allocations, plus the
// derived WFQ weights and shaper ceilings for Weighted-tier classes.
// Strict-tier allocations are recorded for reporting only.
struct LinkQos {
  std::map<std::string, double> alloc_mbps;    // z^k_e per flow group
  std::map<std::string, double> wfq_weights;   // Weighted classes, sum to 1
  std::map<std::string, double> shaper_mbps;   // Weighted classes

  bool operator==(const LinkQos&) const = default;
};

struct QosPolicy {
  std::map<std::string, LinkQos> links;  // link id -> parameters

  bool operator==(const QosPolicy&) const = default;
};

// Per-epoch per-link observation fed back to the controller.
struct ClassStats {
  double throughput_mbps = 0.0;  // served rate d^k_e
  double delay_ms = 0.0;         // prop + queueing estimate
  double loss_fraction = 0.0;    // dropped / arrivals

  bool operator==(const ClassStats&) const = default;
};

struct LinkMeasurement {
  std::int64_t epoch = 0;
  std::string link;
  std::map<std::string, ClassStats> per_class;  // flow group id -> stats
  double utilization = 0.0;                     // arrivals / capacity

  bool operator==(const LinkMeasurement&) const = default;
};

// Structural validation. Violations are data, not faults: returns one
// human-readable description per offense, empty when all invariants hold.
std::vector<std::string> validate_topology(const Topology& topology);

// Dense link index, sorted lexicographically by id so solver matrices are
// reproducible across runs. Throws std::invalid_argument on duplicate ids.
std::map<std::string, int> index_links(const Topology& topology);

const char* to_string(LinkKind kind);
const char* to_string(NodeRole role);
const char* to_string(Tier tier);
std::optional<LinkKind> link_kind_from_string(const std::string& s);
std::optional<NodeRole> node_role_from_string(const std::string& s);
std::optional<Tier> tier_from_string(const std::string& s);

}  // namespace sdwan
