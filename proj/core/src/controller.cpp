#include "sdwan/controller.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdwan {

namespace {

bool on_boundary(double t_s, double period_s) {
  if (period_s <= 0.0) return false;
  const double k = std::round(t_s / period_s);
  return std::abs(t_s - k * period_s) < 1e-6;
}

}  // namespace

const char* to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::AllTns: return "all-tns";
    case PolicyMode::Mlu: return "mlu";
    case PolicyMode::MluQos: return "mlu-qos";
  }
  return "?";
}

std::optional<PolicyMode> policy_mode_from_string(const std::string& s) {
  if (s == "all-tns") return PolicyMode::AllTns;
  if (s == "mlu") return PolicyMode::Mlu;
  if (s == "mlu-qos") return PolicyMode::MluQos;
  return std::nullopt;
}

DemandEstimate update_demand(const DemandEstimate& previous,
                             const std::map<std::string, double>& observed_mbps,
                             double alpha) {
  DemandEstimate next = previous;
  for (const auto& [group, observed] : observed_mbps) {
    const double sample = std::max(0.0, observed);
    const auto it = next.group_mbps.find(group);
    if (it == next.group_mbps.end())
      next.group_mbps[group] = sample;
    else
      it->second = alpha * sample + (1.0 - alpha) * it->second;
  }
  return next;
}

LinkQos default_qos_link(const std::vector<std::pair<std::string, Tier>>& classes) {
  LinkQos qos;
  std::vector<std::string> weighted;
  for (const auto& [id, tier] : classes)
    if (tier == Tier::Weighted) weighted.push_back(id);
  for (const auto& id : weighted)
    qos.wfq_weights[id] = 1.0 / static_cast<double>(weighted.size());
  return qos;
}

Controller::Controller(const Topology& topology, const std::vector<FlowGroup>& groups,
                       const DelayModelSpec& delay_model, const ControlConfig& config,
                       const QosParams& qos_params)
    : topology_(topology),
      groups_(groups),
      delay_model_(delay_model),
      config_(config),
      qos_params_(qos_params) {
  std::sort(groups_.begin(), groups_.end(),
            [](const FlowGroup& a, const FlowGroup& b) { return a.id < b.id; });
  for (const auto& g : groups_) tier_of_[g.id] = g.tier;

  // All modes boot with the fixed queuing configuration; the All-TNs
  // baseline additionally pins the uniform unfiltered split forever.
  qos_ = default_qos_policy();
  if (config_.mode == PolicyMode::AllTns) spr_ = uniform_policy(/*filtered=*/false);
}

SprPolicy Controller::uniform_policy(bool filtered) const {
  SprPolicy policy;
  for (const auto& g : groups_) {
    GroupSplit gs;
    std::vector<std::string> entries;
    if (filtered) {
      SprInstance instance;
      instance.topology = &topology_;
      instance.commodities.push_back(
          {g.id, 0.0, g.sla.max_e2e_delay_ms, g.routes});
      try {
        const SprFiltered f = filter_routes(instance, delay_model_);
        for (const auto& r : f.routes[0]) entries.push_back(r.entry_link);
      } catch (const GroupInfeasibleError&) {
      }
    }
    if (entries.empty())
      for (const auto& r : g.routes) entries.push_back(r.entry_link);
    for (const auto& e : entries) {
      gs.split_ratios[e] = 1.0 / static_cast<double>(entries.size());
      gs.active_set.insert(e);
    }
    policy.groups[g.id] = std::move(gs);
  }
  return policy;
}

QosPolicy Controller::default_qos_policy() const {
  QosPolicy policy;
  std::map<std::string, std::vector<std::pair<std::string, Tier>>> per_link;
  for (const auto& g : groups_) {
    for (const auto& route : g.routes) {
      per_link[route.entry_link].emplace_back(g.id, g.tier);
      if (route.continuation)
        per_link[*route.continuation].emplace_back(g.id, g.tier);
    }
  }
  for (auto& [link, classes] : per_link) {
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    policy.links[link] = default_qos_link(classes);
  }
  return policy;
}

void Controller::solve_spr_step(double t_s) {
  ++spr_solves_;
  SprInstance instance;
  instance.topology = &topology_;
  instance.objective = SprObjective::MinMlu;
  for (const auto& g : groups_) {
    const auto it = estimate_.group_mbps.find(g.id);
    instance.commodities.push_back(
        {g.id, it == estimate_.group_mbps.end() ? 0.0 : it->second,
         g.sla.max_e2e_delay_ms, g.routes});
  }

  try {
    const SprSolution solution = solve_spr(instance, delay_model_);
    if (solution.status != LpStatus::Optimal) {
      ++policy_holds_;
      events_.push_back({t_s, "spr-hold",
                         solution.status == LpStatus::Infeasible ? "infeasible"
                                                                 : "unbounded"});
      return;
    }
    SprPolicy next = extract_policy(solution);
    int changed = 0;
    for (const auto& [group, split] : next.groups) {
      const auto prev = spr_.groups.find(group);
      if (prev == spr_.groups.end() || !(prev->second == split)) ++changed;
    }
    spr_ = std::move(next);
    std::ostringstream detail;
    detail << "mlu=" << solution.mlu << " groups_changed=" << changed;
    events_.push_back({t_s, "spr", detail.str()});
  } catch (const std::exception& e) {
    ++policy_holds_;
    events_.push_back({t_s, "spr-hold", e.what()});
  }
}

void Controller::solve_qos_step(double t_s) {
  ++qos_solves_;

  // Expected per-link per-class demand: EWMA group demand times installed
  // split, accumulated along each route.
  std::map<std::string, std::vector<QosClassInput>> demands;
  for (const auto& g : groups_) {
    const auto bd = estimate_.group_mbps.find(g.id);
    const double b = bd == estimate_.group_mbps.end() ? 0.0 : bd->second;
    if (b <= 0.0) continue;
    const auto pol = spr_.groups.find(g.id);
    if (pol == spr_.groups.end()) continue;
    for (const auto& [entry, ratio] : pol->second.split_ratios) {
      if (ratio <= 0.0) continue;
      const RouteOption* route = g.route_for(entry);
      if (!route) continue;
      std::vector<std::string> ids{route->entry_link};
      if (route->continuation) ids.push_back(*route->continuation);
      for (const auto& id : ids) {
        demands[id].push_back({g.id, b * ratio, g.sla.max_e2e_delay_ms, g.tier,
                               g.strict_rank});
      }
    }
  }

  const QosAllResult result =
      solve_qos_all(topology_, demands, delay_model_, qos_params_);
  int updated = 0, changed = 0;
  for (const auto& [link, solution] : result.per_link) {
    LinkQos next = policy_from_allocation(solution, tier_of_,
                                          qos_params_.shaper_headroom);
    const auto prev = qos_.links.find(link);
    if (prev == qos_.links.end() || !(prev->second == next)) ++changed;
    qos_.links[link] = std::move(next);
    ++updated;
  }
  for (const auto& [link, what] : result.errors) {
    ++policy_holds_;
    events_.push_back({t_s, "qos-hold", link + ": " + what});
  }
  std::ostringstream detail;
  detail << "links=" << updated << " links_changed=" << changed;
  events_.push_back({t_s, "qos", detail.str()});
}

void Controller::control_step(double t_s) {
  if (config_.mode != PolicyMode::AllTns && on_boundary(t_s, config_.spr_period_s))
    solve_spr_step(t_s);
  if (config_.mode == PolicyMode::MluQos && on_boundary(t_s, config_.qos_period_s))
    solve_qos_step(t_s);
}

std::map<std::string, double> Controller::expected_link_loads() const {
  std::map<std::string, double> loads;
  for (const auto& g : groups_) {
    const auto bd = estimate_.group_mbps.find(g.id);
    const double b = bd == estimate_.group_mbps.end() ? 0.0 : bd->second;
    const auto pol = spr_.groups.find(g.id);
    if (pol == spr_.groups.end()) continue;
    for (const auto& [entry, ratio] : pol->second.split_ratios) {
      const RouteOption* route = g.route_for(entry);
      if (!route) continue;
      loads[route->entry_link] += b * ratio;
      if (route->continuation) loads[*route->continuation] += b * ratio;
    }
  }
  return loads;
}

}  // namespace sdwan
