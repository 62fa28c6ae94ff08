#include "sdwan/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sdwan {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

constexpr double kNanoPerMbit = 1e9;

i64 to_nano(double mbit) { return std::llround(mbit * kNanoPerMbit); }
double to_mbit(i64 nano) { return static_cast<double>(nano) / kNanoPerMbit; }

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

// Serve `grant` nanos from the pending fluid of `members`, proportionally
// to what each has pending, exact to the nano (leftovers go one nano at a
// time in member order).
void drain_proportional(i64 grant, const std::vector<int>& members,
                        const std::vector<i64>& room, std::vector<i64>& served) {
  i64 remaining = grant;
  while (remaining > 0) {
    i64 total_room = 0;
    for (int i : members) total_room += room[i] - served[i];
    if (total_room <= 0) break;
    if (remaining >= total_room) {
      for (int i : members) served[i] = room[i];
      break;
    }
    const i64 snapshot = remaining;
    i64 given = 0;
    for (int i : members) {
      const i64 r = room[i] - served[i];
      if (r <= 0) continue;
      const i64 take =
          std::min(r, static_cast<i64>(static_cast<i128>(snapshot) * r / total_room));
      served[i] += take;
      given += take;
    }
    if (given == 0) {
      for (int i : members) {
        if (remaining == 0) break;
        if (room[i] - served[i] > 0) {
          served[i] += 1;
          --remaining;
        }
      }
      break;
    }
    remaining -= given;
  }
}

struct NanoClass {
  int strict_rank = -1;
  double weight = 0.0;
  i64 cap = std::numeric_limits<i64>::max();  // shaper ceiling this tick
  i64 avail = 0;                              // backlog + arrivals
};

// Core CBQ round in integer nanos. Returns served per class.
std::vector<i64> schedule_nanos(i64 budget, const std::vector<NanoClass>& cls) {
  const int n = static_cast<int>(cls.size());
  std::vector<i64> served(n, 0);

  // Strict phase, rank by rank.
  std::vector<int> ranks;
  for (const auto& c : cls)
    if (c.strict_rank >= 0) ranks.push_back(c.strict_rank);
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());

  std::vector<i64> room(n, 0);
  for (int i = 0; i < n; ++i) room[i] = cls[i].avail;

  for (int rank : ranks) {
    if (budget <= 0) break;
    std::vector<int> bucket;
    i64 need = 0;
    for (int i = 0; i < n; ++i) {
      if (cls[i].strict_rank == rank && cls[i].avail > 0) {
        bucket.push_back(i);
        need += cls[i].avail;
      }
    }
    if (bucket.empty()) continue;
    const i64 grant = std::min(budget, need);
    drain_proportional(grant, bucket, room, served);
    i64 used = 0;
    for (int i : bucket) used += served[i];
    budget -= used;
  }

  // Weighted phase: water-filling by weight with redistribution. Classes
  // with zero weight only drink once every positive-weight class is done.
  std::vector<int> weighted;
  for (int i = 0; i < n; ++i) {
    if (cls[i].strict_rank < 0) {
      weighted.push_back(i);
      room[i] = std::min(cls[i].avail, cls[i].cap);
    }
  }
  int guard = 0;
  while (budget > 0 && ++guard < 1000) {
    double total_weight = 0.0;
    i64 total_room = 0;
    std::vector<int> able;
    for (int i : weighted) {
      if (room[i] - served[i] > 0) {
        able.push_back(i);
        total_weight += cls[i].weight;
        total_room += room[i] - served[i];
      }
    }
    if (able.empty()) break;
    if (budget >= total_room) {
      for (int i : able) served[i] = room[i];
      budget -= total_room;
      break;
    }
    const i64 snapshot = budget;
    i64 given = 0;
    for (int i : able) {
      i64 share;
      if (total_weight > 0.0) {
        share = static_cast<i64>(static_cast<double>(snapshot) *
                                 (cls[i].weight / total_weight));
      } else {
        share = snapshot / static_cast<i64>(able.size());
      }
      const i64 take = std::min(share, room[i] - served[i]);
      served[i] += take;
      given += take;
    }
    if (given == 0) {
      // Sub-nano shares: hand out single nanos deterministically.
      for (int i : able) {
        if (budget == 0) break;
        served[i] += 1;
        --budget;
      }
      continue;
    }
    budget -= given;
  }

  return served;
}

}  // namespace

double offered_rate(const DiurnalSpec& spec, double time_s, std::uint64_t seed,
                    std::uint64_t stream, std::uint64_t tick_index) {
  double rate = spec.base_rate_mbps;
  if (spec.diurnal_amplitude != 0.0 && spec.diurnal_period_s > 0.0) {
    rate *= 1.0 + spec.diurnal_amplitude *
                      std::sin(2.0 * std::numbers::pi * time_s / spec.diurnal_period_s);
  }
  if (spec.noise_std > 0.0) {
    std::uint64_t h = mix64(seed ^ mix64(stream ^ 0x5bd1e995u));
    h = mix64(h ^ tick_index);
    const double u1 = to_unit(h);
    const double u2 = to_unit(mix64(h));
    const double gauss = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
    rate *= 1.0 + spec.noise_std * gauss;
  }
  return std::max(0.0, rate);
}

std::map<std::string, double> split_ingress(double offered_mbps,
                                            const SprPolicy& policy,
                                            const FlowGroup& group) {
  std::map<std::string, double> out;
  if (offered_mbps <= 0.0) return out;
  const auto pol = policy.groups.find(group.id);
  if (pol != policy.groups.end() && !pol->second.split_ratios.empty()) {
    for (const auto& [entry, ratio] : pol->second.split_ratios)
      if (ratio > 0.0) out[entry] += offered_mbps * ratio;
    return out;
  }
  if (group.routes.empty()) return out;
  const double share = offered_mbps / static_cast<double>(group.routes.size());
  for (const auto& route : group.routes) out[route.entry_link] += share;
  return out;
}

std::map<std::string, SchedClassResult> schedule_link_tick(
    double capacity_mbps, double tick_s, double buffer_limit_mbit,
    const std::vector<SchedClassInput>& classes) {
  const i64 budget = to_nano(capacity_mbps * tick_s);
  const i64 buffer = to_nano(buffer_limit_mbit);

  std::vector<NanoClass> cls(classes.size());
  std::vector<i64> backlog(classes.size()), arrivals(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& in = classes[i];
    if (in.arrivals_mbit < 0.0 || in.backlog_mbit < 0.0)
      throw std::invalid_argument("schedule_link_tick: negative fluid");
    backlog[i] = to_nano(in.backlog_mbit);
    arrivals[i] = to_nano(in.arrivals_mbit);
    cls[i].strict_rank = in.strict_rank;
    cls[i].weight = std::max(0.0, in.wfq_weight);
    cls[i].avail = backlog[i] + arrivals[i];
    if (in.strict_rank < 0 && in.shaper_mbps >= 0.0)
      cls[i].cap = to_nano(in.shaper_mbps * tick_s);
  }

  const std::vector<i64> served = schedule_nanos(budget, cls);

  std::map<std::string, SchedClassResult> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const i64 rem = cls[i].avail - served[i];
    const i64 dropped = std::max<i64>(0, rem - buffer);
    SchedClassResult r;
    r.served_mbit = to_mbit(served[i]);
    r.dropped_mbit = to_mbit(dropped);
    r.backlog_mbit = to_mbit(rem - dropped);
    out[classes[i].id] = r;
  }
  return out;
}

double estimate_class_delay(double prop_delay_ms, double backlog_mbit,
                            double service_mbps, double sla_ms) {
  const double cap_ms = 10.0 * sla_ms;
  if (backlog_mbit <= 0.0) return prop_delay_ms;
  if (service_mbps <= 0.0) return cap_ms;
  const double queueing_ms = 1000.0 * backlog_mbit / service_mbps;
  return std::min(prop_delay_ms + queueing_ms, cap_ms);
}

FluidSimulator::FluidSimulator(const Topology& topology,
                               const std::vector<FlowGroup>& groups,
                               const TrafficSpec& traffic, const SimConfig& config)
    : topology_(topology), groups_(groups), traffic_(traffic), config_(config) {
  const double ratio = config_.measurement_period_s / config_.tick_s;
  ticks_per_epoch_ = static_cast<int>(std::llround(ratio));
  if (ticks_per_epoch_ <= 0 ||
      std::abs(ratio - ticks_per_epoch_) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("tick must divide the measurement period");

  std::sort(groups_.begin(), groups_.end(),
            [](const FlowGroup& a, const FlowGroup& b) { return a.id < b.id; });

  std::vector<const OverlayLink*> sorted_links;
  for (const auto& l : topology_.links) sorted_links.push_back(&l);
  std::sort(sorted_links.begin(), sorted_links.end(),
            [](const OverlayLink* a, const OverlayLink* b) { return a->id < b->id; });

  for (const auto* l : sorted_links) {
    LinkState state;
    state.link = *l;
    state.budget_per_tick = to_nano(l->capacity_mbps * config_.tick_s);
    link_index_[l->id] = static_cast<int>(links_.size());
    links_.push_back(std::move(state));
  }

  // Attach a queue slot for every (link, group) pair a route can touch.
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    for (const auto& route : groups_[gi].routes) {
      std::vector<std::string> ids{route.entry_link};
      if (route.continuation) ids.push_back(*route.continuation);
      for (const auto& id : ids) {
        const auto it = link_index_.find(id);
        if (it == link_index_.end())
          throw std::invalid_argument("route references unknown link '" + id + "'");
        auto& slot_map = queue_index_[id];
        if (!slot_map.count(groups_[gi].id)) {
          slot_map[groups_[gi].id] = static_cast<int>(links_[it->second].group_idx.size());
          links_[it->second].group_idx.push_back(static_cast<int>(gi));
          links_[it->second].queues.emplace_back();
        }
      }
    }
  }

  forward_.resize(links_.size());
  pending_.resize(links_.size());
  arrivals_tick_.resize(links_.size());
  for (std::size_t li = 0; li < links_.size(); ++li) {
    forward_[li].assign(links_[li].group_idx.size(), {-1, -1});
    pending_[li].assign(links_[li].group_idx.size(), 0);
    arrivals_tick_[li].assign(links_[li].group_idx.size(), 0);
  }
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    for (const auto& route : groups_[gi].routes) {
      if (!route.continuation) continue;
      const int entry_li = link_index_.at(route.entry_link);
      const int entry_slot = queue_index_.at(route.entry_link).at(groups_[gi].id);
      const int cont_li = link_index_.at(*route.continuation);
      const int cont_slot = queue_index_.at(*route.continuation).at(groups_[gi].id);
      forward_[entry_li][entry_slot] = {cont_li, cont_slot};
    }
  }

  offered_epoch_.assign(groups_.size(), 0);
  link_arrivals_epoch_.assign(links_.size(), 0);
}

void FluidSimulator::install(const SprPolicy& spr, const QosPolicy& qos) {
  spr_ = spr;
  qos_ = qos;
}

void FluidSimulator::step_tick() {
  const double t = static_cast<double>(tick_count_) * config_.tick_s;

  for (auto& v : arrivals_tick_)
    std::fill(v.begin(), v.end(), 0);

  // Fresh ingress traffic, split per installed policy (uniform fallback).
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const FlowGroup& g = groups_[gi];
    const auto ts = traffic_.per_group.find(g.id);
    if (ts == traffic_.per_group.end()) continue;
    const double rate =
        offered_rate(ts->second, t, config_.seed, gi, tick_count_);
    offered_epoch_[gi] += to_nano(rate * config_.tick_s);
    if (rate <= 0.0) continue;

    for (const auto& [entry, share] : split_ingress(rate, spr_, g)) {
      const int li = link_index_.at(entry);
      const int slot = queue_index_.at(entry).at(g.id);
      arrivals_tick_[li][slot] += to_nano(share * config_.tick_s);
    }
  }

  // Relay fluid served last tick lands on its continuation now.
  for (std::size_t li = 0; li < links_.size(); ++li) {
    for (std::size_t s = 0; s < pending_[li].size(); ++s) {
      arrivals_tick_[li][s] += pending_[li][s];
      pending_[li][s] = 0;
    }
  }

  const i64 buffer = to_nano(config_.buffer_limit_mbit);
  for (std::size_t li = 0; li < links_.size(); ++li) {
    LinkState& ls = links_[li];
    const std::size_t nq = ls.queues.size();
    if (nq == 0) continue;

    const auto qos_it = qos_.links.find(ls.link.id);
    std::vector<NanoClass> cls(nq);
    for (std::size_t s = 0; s < nq; ++s) {
      const FlowGroup& g = groups_[ls.group_idx[s]];
      cls[s].strict_rank = g.tier == Tier::Strict ? g.strict_rank : -1;
      cls[s].avail = ls.queues[s].backlog + arrivals_tick_[li][s];
      if (g.tier == Tier::Weighted && qos_it != qos_.links.end()) {
        const auto w = qos_it->second.wfq_weights.find(g.id);
        if (w != qos_it->second.wfq_weights.end()) cls[s].weight = w->second;
        const auto sh = qos_it->second.shaper_mbps.find(g.id);
        if (sh != qos_it->second.shaper_mbps.end())
          cls[s].cap = to_nano(sh->second * config_.tick_s);
      }
      link_arrivals_epoch_[li] += arrivals_tick_[li][s];
    }

    const std::vector<i64> served = schedule_nanos(ls.budget_per_tick, cls);

    for (std::size_t s = 0; s < nq; ++s) {
      Queue& q = ls.queues[s];
      const i64 rem = cls[s].avail - served[s];
      const i64 dropped = std::max<i64>(0, rem - buffer);
      q.backlog = rem - dropped;
      q.arrivals_epoch += arrivals_tick_[li][s];
      q.served_epoch += served[s];
      q.dropped_epoch += dropped;
      const auto [fli, fslot] = forward_[li][s];
      if (fli >= 0 && served[s] > 0) pending_[fli][fslot] += served[s];
    }
  }

  ++tick_count_;
}

FluidSimulator::EpochResult FluidSimulator::run_epoch() {
  for (int k = 0; k < ticks_per_epoch_; ++k) step_tick();

  const double period = config_.measurement_period_s;
  EpochResult result;
  for (std::size_t li = 0; li < links_.size(); ++li) {
    LinkState& ls = links_[li];
    LinkMeasurement m;
    m.epoch = epoch_;
    m.link = ls.link.id;
    m.utilization =
        to_mbit(link_arrivals_epoch_[li]) / (ls.link.capacity_mbps * period);
    for (std::size_t s = 0; s < ls.queues.size(); ++s) {
      Queue& q = ls.queues[s];
      const FlowGroup& g = groups_[ls.group_idx[s]];
      ClassStats stats;
      // Offered decomposition of the class over the link (the d^k_e the
      // controller reasons about); the served rate is throughput*(1-loss).
      stats.throughput_mbps = to_mbit(q.arrivals_epoch) / period;
      stats.delay_ms =
          estimate_class_delay(ls.link.prop_delay_ms, to_mbit(q.backlog),
                               to_mbit(q.served_epoch) / period,
                               g.sla.max_e2e_delay_ms);
      stats.loss_fraction =
          q.arrivals_epoch > 0
              ? static_cast<double>(q.dropped_epoch) / static_cast<double>(q.arrivals_epoch)
              : 0.0;
      m.per_class[g.id] = stats;
      q.arrivals_epoch = q.served_epoch = q.dropped_epoch = 0;
    }
    result.measurements.push_back(std::move(m));
    link_arrivals_epoch_[li] = 0;
  }

  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    result.offered_mbps[groups_[gi].id] = to_mbit(offered_epoch_[gi]) / period;
    offered_epoch_[gi] = 0;
  }

  ++epoch_;
  return result;
}

}  // namespace sdwan
