#include "sdwan/model.h"

#include <algorithm>
#include <stdexcept>

namespace sdwan {

const Node* Topology::find_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const OverlayLink* Topology::find_link(const std::string& id) const {
  for (const auto& l : links)
    if (l.id == id) return &l;
  return nullptr;
}

std::vector<std::string> FlowGroup::allowed_links() const {
  std::vector<std::string> ids;
  ids.reserve(routes.size());
  for (const auto& r : routes) ids.push_back(r.entry_link);
  return ids;
}

const RouteOption* FlowGroup::route_for(const std::string& entry_link) const {
  for (const auto& r : routes)
    if (r.entry_link == entry_link) return &r;
  return nullptr;
}

std::vector<std::string> validate_topology(const Topology& topology) {
  std::vector<std::string> violations;

  std::set<std::string> node_ids;
  for (const auto& n : topology.nodes) {
    if (n.id.empty()) violations.push_back("node with empty id");
    if (!node_ids.insert(n.id).second)
      violations.push_back("duplicate node id '" + n.id + "'");
  }

  std::set<std::string> link_ids;
  for (const auto& l : topology.links) {
    if (l.id.empty()) violations.push_back("link with empty id");
    if (!link_ids.insert(l.id).second)
      violations.push_back("duplicate link id '" + l.id + "'");
    if (!(l.capacity_mbps > 0.0))
      violations.push_back("link '" + l.id + "' has non-positive capacity");
    if (l.prop_delay_ms < 0.0)
      violations.push_back("link '" + l.id + "' has negative propagation delay");
    if (!node_ids.count(l.src))
      violations.push_back("link '" + l.id + "' references missing node '" + l.src + "'");
    if (!node_ids.count(l.dst))
      violations.push_back("link '" + l.id + "' references missing node '" + l.dst + "'");
    if (l.src == l.dst)
      violations.push_back("link '" + l.id + "' is a self-loop");
  }

  return violations;
}

std::map<std::string, int> index_links(const Topology& topology) {
  std::vector<std::string> ids;
  ids.reserve(topology.links.size());
  for (const auto& l : topology.links) ids.push_back(l.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("index_links: duplicate link ids");

  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) index[ids[i]] = i;
  return index;
}

const char* to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Mstp: return "mstp";
    case LinkKind::Mv: return "mv";
    case LinkKind::Man: return "man";
  }
  return "?";
}

const char* to_string(NodeRole role) {
  return role == NodeRole::Hub ? "hub" : "spoke";
}

const char* to_string(Tier tier) {
  return tier == Tier::Strict ? "strict" : "weighted";
}

std::optional<LinkKind> link_kind_from_string(const std::string& s) {
  if (s == "mstp") return LinkKind::Mstp;
  if (s == "mv") return LinkKind::Mv;
  if (s == "man") return LinkKind::Man;
  return std::nullopt;
}

std::optional<NodeRole> node_role_from_string(const std::string& s) {
  if (s == "hub") return NodeRole::Hub;
  if (s == "spoke") return NodeRole::Spoke;
  return std::nullopt;
}

std::optional<Tier> tier_from_string(const std::string& s) {
  if (s == "strict") return Tier::Strict;
  if (s == "weighted") return Tier::Weighted;
  return std::nullopt;
}

}  // namespace sdwan
