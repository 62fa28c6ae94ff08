#include "sdwan/spr.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sdwan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Finite stand-in for the saturation sentinel in frozen quality
// coefficients; consumers of the LP never see the infinity itself.
constexpr double kSaturatedDelayMs = 1e6;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

const OverlayLink& link_or_throw(const Topology& topo, const std::string& id) {
  const OverlayLink* l = topo.find_link(id);
  if (!l) throw std::invalid_argument("unknown link '" + id + "' in SPR instance");
  return *l;
}

std::vector<std::string> route_links(const RouteOption& r) {
  std::vector<std::string> ids{r.entry_link};
  if (r.continuation) ids.push_back(*r.continuation);
  return ids;
}

double route_prop_ms(const Topology& topo, const RouteOption& r) {
  double p = 0.0;
  for (const auto& id : route_links(r)) p += link_or_throw(topo, id).prop_delay_ms;
  return p;
}

}  // namespace

SprFiltered filter_routes(const SprInstance& instance, const DelayModelSpec& model) {
  const Topology& topo = *instance.topology;
  SprFiltered out;
  out.routes.resize(instance.commodities.size());

  for (std::size_t ci = 0; ci < instance.commodities.size(); ++ci) {
    const auto& com = instance.commodities[ci];
    for (const auto& route : com.routes) {
      const auto links = route_links(route);
      const double slack_ms = com.sla_ms - route_prop_ms(topo, route);
      if (slack_ms <= 0.0) continue;
      // Each link gets its own delay budget: its propagation plus an equal
      // share of the route's slack. Single-link routes keep the full D_k.
      bool ok = true;
      std::vector<std::pair<std::string, double>> caps;
      for (const auto& id : links) {
        const OverlayLink& link = link_or_throw(topo, id);
        const double budget = link.prop_delay_ms + slack_ms / links.size();
        const auto cap = invert_delay_bound(link, budget, model);
        if (!cap || *cap <= 0.0) {
          ok = false;
          break;
        }
        caps.emplace_back(id, *cap);
      }
      if (!ok) continue;
      out.routes[ci].push_back(route);
      for (const auto& [id, cap] : caps) {
        auto it = out.link_load_cap_mbps.find(id);
        if (it == out.link_load_cap_mbps.end())
          out.link_load_cap_mbps.emplace(id, cap);
        else
          it->second = std::min(it->second, cap);
      }
    }
    if (out.routes[ci].empty() && instance.commodities[ci].demand_mbps > 0.0)
      throw GroupInfeasibleError(com.group_id);
  }
  return out;
}

SprLpBuild build_spr_lp(const SprInstance& instance, const DelayModelSpec& model) {
  const Topology& topo = *instance.topology;
  SprLpBuild build;
  build.filtered = filter_routes(instance, model);

  // Positive-demand commodities become LP variables; zero-demand groups are
  // assigned uniform splits outside the LP.
  for (std::size_t ci = 0; ci < instance.commodities.size(); ++ci) {
    if (instance.commodities[ci].demand_mbps <= 0.0) continue;
    for (std::size_t ri = 0; ri < build.filtered.routes[ci].size(); ++ri)
      build.var_route.emplace_back(static_cast<int>(ci), static_cast<int>(ri));
  }

  const bool want_mlu = instance.objective == SprObjective::MinMlu;
  const std::size_t nx = build.var_route.size();
  const std::size_t n = nx + (want_mlu ? 1 : 0);
  if (want_mlu) build.mlu_var = static_cast<int>(nx);

  LpProblem& lp = build.lp;
  lp.objective.assign(n, 0.0);
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, kInf);

  if (want_mlu) {
    lp.objective[nx] = 1.0;
  } else {
    for (std::size_t v = 0; v < nx; ++v) {
      const auto [ci, ri] = build.var_route[v];
      double coeff = 0.0;
      for (const auto& id : route_links(build.filtered.routes[ci][ri])) {
        const OverlayLink& link = link_or_throw(topo, id);
        auto it = instance.current_loads_mbps.find(id);
        const double load = it == instance.current_loads_mbps.end() ? 0.0 : it->second;
        const double d = predict_delay_spr(link, std::min(load, link.capacity_mbps * 0.999999), model);
        coeff += std::isinf(d) ? kSaturatedDelayMs : d;
      }
      lp.objective[v] = coeff;
    }
  }

  // Convexity rows: splits of each commodity sum to 1.
  std::map<int, std::vector<int>> vars_of_commodity;
  for (std::size_t v = 0; v < nx; ++v)
    vars_of_commodity[build.var_route[v].first].push_back(static_cast<int>(v));
  for (const auto& [ci, vars] : vars_of_commodity) {
    LpRow row{std::vector<double>(n, 0.0), Sense::Eq, 1.0};
    for (int v : vars) row.coeffs[v] = 1.0;
    lp.rows.push_back(std::move(row));
  }

  // Demand-weighted load per link, in deterministic (sorted) link order.
  std::map<std::string, std::vector<std::pair<int, double>>> load_terms;
  for (std::size_t v = 0; v < nx; ++v) {
    const auto [ci, ri] = build.var_route[v];
    const double b = instance.commodities[ci].demand_mbps;
    for (const auto& id : route_links(build.filtered.routes[ci][ri]))
      load_terms[id].emplace_back(static_cast<int>(v), b);
  }

  for (const auto& [id, terms] : load_terms) {
    const OverlayLink& link = link_or_throw(topo, id);

    LpRow cap_row{std::vector<double>(n, 0.0), Sense::Le, link.capacity_mbps};
    for (const auto& [v, b] : terms) cap_row.coeffs[v] += b;

    if (want_mlu) {
      LpRow mlu_row = cap_row;
      mlu_row.rhs = 0.0;
      mlu_row.coeffs[nx] = -link.capacity_mbps;
      lp.rows.push_back(std::move(mlu_row));
    }

    const auto cap_it = build.filtered.link_load_cap_mbps.find(id);
    if (cap_it != build.filtered.link_load_cap_mbps.end() &&
        cap_it->second < link.capacity_mbps) {
      LpRow sla_row = cap_row;
      sla_row.rhs = cap_it->second;
      lp.rows.push_back(std::move(sla_row));
    }

    lp.rows.push_back(std::move(cap_row));
  }

  return build;
}

namespace {

SprSolution assemble_solution(const SprInstance& instance, const SprFiltered& filtered,
                              const std::vector<std::map<std::string, double>>& splits,
                              LpStatus status) {
  SprSolution sol;
  sol.status = status;
  for (const auto& link : instance.topology->links) sol.link_loads_mbps[link.id] = 0.0;

  for (std::size_t ci = 0; ci < instance.commodities.size(); ++ci) {
    const auto& com = instance.commodities[ci];
    sol.split[com.group_id] = splits[ci];
    for (const auto& route : filtered.routes[ci]) {
      const auto it = splits[ci].find(route.entry_link);
      if (it == splits[ci].end()) continue;
      const double load = com.demand_mbps * it->second;
      sol.link_loads_mbps[route.entry_link] += load;
      if (route.continuation) sol.link_loads_mbps[*route.continuation] += load;
    }
  }

  sol.mlu = 0.0;
  for (const auto& link : instance.topology->links)
    sol.mlu = std::max(sol.mlu, sol.link_loads_mbps[link.id] / link.capacity_mbps);
  return sol;
}

std::vector<std::map<std::string, double>> uniform_splits(const SprFiltered& filtered) {
  std::vector<std::map<std::string, double>> splits(filtered.routes.size());
  for (std::size_t ci = 0; ci < filtered.routes.size(); ++ci) {
    const auto& routes = filtered.routes[ci];
    for (const auto& r : routes)
      splits[ci][r.entry_link] = routes.empty() ? 0.0 : 1.0 / routes.size();
  }
  return splits;
}

}  // namespace

SprSolution solve_spr(const SprInstance& instance, const DelayModelSpec& model) {
  SprLpBuild build = build_spr_lp(instance, model);

  // All-zero demand: nothing to optimize, report the uniform split.
  auto splits = uniform_splits(build.filtered);
  if (build.var_route.empty())
    return assemble_solution(instance, build.filtered, splits, LpStatus::Optimal);

  const LpResult res = solve_lp(build.lp);
  if (res.status != LpStatus::Optimal)
    return assemble_solution(instance, build.filtered, uniform_splits(build.filtered),
                             res.status);

  for (std::size_t v = 0; v < build.var_route.size(); ++v) {
    const auto [ci, ri] = build.var_route[v];
    const auto& route = build.filtered.routes[ci][ri];
    splits[ci][route.entry_link] = std::max(0.0, res.x[v]);
  }
  return assemble_solution(instance, build.filtered, splits, LpStatus::Optimal);
}

namespace {

struct Assignment {
  std::vector<int> route_of;  // per positive-demand commodity; -1 = unset
};

double assignment_mlu(const SprInstance& instance, const SprFiltered& filtered,
                      const std::vector<int>& commodity_ids,
                      const std::vector<int>& route_of) {
  std::map<std::string, double> loads;
  for (std::size_t i = 0; i < commodity_ids.size(); ++i) {
    if (route_of[i] < 0) continue;
    const auto& com = instance.commodities[commodity_ids[i]];
    const auto& route = filtered.routes[commodity_ids[i]][route_of[i]];
    loads[route.entry_link] += com.demand_mbps;
    if (route.continuation) loads[*route.continuation] += com.demand_mbps;
  }
  double mlu = 0.0;
  for (const auto& [id, load] : loads)
    mlu = std::max(mlu, load / instance.topology->find_link(id)->capacity_mbps);
  return mlu;
}

}  // namespace

SprSolution local_search_spr(const SprInstance& instance, const DelayModelSpec& model,
                             std::uint64_t seed, int max_iters) {
  SprFiltered filtered = filter_routes(instance, model);

  std::vector<int> commodity_ids;
  for (std::size_t ci = 0; ci < instance.commodities.size(); ++ci)
    if (instance.commodities[ci].demand_mbps > 0.0)
      commodity_ids.push_back(static_cast<int>(ci));

  const int nc = static_cast<int>(commodity_ids.size());
  std::vector<int> best_assignment(nc, -1);
  double best_mlu = kInf;

  constexpr int kRestarts = 3;
  std::uint64_t rng = seed;

  for (int restart = 0; restart < kRestarts; ++restart) {
    // Greedy order: descending demand, group id as tiebreak; later restarts
    // shuffle the order deterministically.
    std::vector<int> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& ca = instance.commodities[commodity_ids[a]];
      const auto& cb = instance.commodities[commodity_ids[b]];
      if (ca.demand_mbps != cb.demand_mbps) return ca.demand_mbps > cb.demand_mbps;
      return ca.group_id < cb.group_id;
    });
    if (restart > 0) {
      for (int i = nc - 1; i > 0; --i) {
        const int j = static_cast<int>(splitmix64(rng) % (i + 1));
        std::swap(order[i], order[j]);
      }
    }

    std::vector<int> route_of(nc, -1);
    for (int i : order) {
      const int ci = commodity_ids[i];
      int best_r = -1;
      double best_val = kInf;
      for (std::size_t r = 0; r < filtered.routes[ci].size(); ++r) {
        route_of[i] = static_cast<int>(r);
        const double val = assignment_mlu(instance, filtered, commodity_ids, route_of);
        if (val < best_val - 1e-15) {
          best_val = val;
          best_r = static_cast<int>(r);
        }
      }
      route_of[i] = best_r;
    }

    // Best-improvement single-group moves until a local optimum.
    double current = assignment_mlu(instance, filtered, commodity_ids, route_of);
    for (int iter = 0; iter < max_iters; ++iter) {
      int move_i = -1, move_r = -1;
      double move_val = current;
      for (int i = 0; i < nc; ++i) {
        const int ci = commodity_ids[i];
        const int saved = route_of[i];
        for (std::size_t r = 0; r < filtered.routes[ci].size(); ++r) {
          if (static_cast<int>(r) == saved) continue;
          route_of[i] = static_cast<int>(r);
          const double val = assignment_mlu(instance, filtered, commodity_ids, route_of);
          if (val < move_val - 1e-12) {
            move_val = val;
            move_i = i;
            move_r = static_cast<int>(r);
          }
        }
        route_of[i] = saved;
      }
      if (move_i < 0) break;
      route_of[move_i] = move_r;
      current = move_val;
    }

    if (current < best_mlu - 1e-15) {
      best_mlu = current;
      best_assignment = route_of;
    }
  }

  std::vector<std::map<std::string, double>> splits(instance.commodities.size());
  for (std::size_t ci = 0; ci < instance.commodities.size(); ++ci) {
    if (instance.commodities[ci].demand_mbps <= 0.0) {
      for (const auto& r : filtered.routes[ci])
        splits[ci][r.entry_link] = filtered.routes[ci].empty()
                                       ? 0.0
                                       : 1.0 / filtered.routes[ci].size();
    }
  }
  for (int i = 0; i < nc; ++i) {
    const int ci = commodity_ids[i];
    if (best_assignment[i] >= 0)
      splits[ci][filtered.routes[ci][best_assignment[i]].entry_link] = 1.0;
  }
  return assemble_solution(instance, filtered, splits, LpStatus::Optimal);
}

SprPolicy extract_policy(const SprSolution& solution) {
  SprPolicy policy;
  for (const auto& [group, ratios] : solution.split) {
    GroupSplit gs;
    double total = 0.0;
    for (const auto& [link, x] : ratios) {
      if (x > kActivationThreshold) {
        gs.active_set.insert(link);
        total += x;
      }
    }
    if (gs.active_set.empty() && !ratios.empty()) {
      // Degenerate all-tiny split: keep the single largest share.
      auto best = ratios.begin();
      for (auto it = ratios.begin(); it != ratios.end(); ++it)
        if (it->second > best->second) best = it;
      gs.active_set.insert(best->first);
      total = best->second;
    }
    for (const auto& link : gs.active_set)
      gs.split_ratios[link] = total > 0.0
                                  ? ratios.at(link) / total
                                  : 1.0 / static_cast<double>(gs.active_set.size());
    policy.groups[group] = std::move(gs);
  }
  return policy;
}

}  // namespace sdwan
