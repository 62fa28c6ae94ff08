#include "sdwan/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sdwan {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const ClassStats* find_stats(const LinkMeasurement* m, const std::string& group) {
  if (!m) return nullptr;
  const auto it = m->per_class.find(group);
  return it == m->per_class.end() ? nullptr : &it->second;
}

}  // namespace

double nearest_rank_percentile(std::vector<double> samples, double percentile) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(samples.size())));
  const std::size_t idx = std::min(samples.size(), std::max<std::size_t>(1, rank)) - 1;
  return samples[idx];
}

RunReport compute_report(const Scenario& scenario,
                         const std::vector<std::vector<LinkMeasurement>>& epochs,
                         const std::vector<std::map<std::string, double>>& offered_mbps) {
  if (epochs.empty()) throw std::invalid_argument("compute_report: empty stream");

  RunReport report;
  report.scenario = scenario.name;
  report.epochs = static_cast<int>(epochs.size());

  std::vector<FlowGroup> groups = scenario.groups;
  std::sort(groups.begin(), groups.end(),
            [](const FlowGroup& a, const FlowGroup& b) { return a.id < b.id; });

  const double period = scenario.sim.measurement_period_s;

  struct Tally {
    int satisfied = 0;
    std::vector<double> delays;
    double offered_mbit = 0.0;
    double delivered_mbit = 0.0;
  };
  std::map<std::string, Tally> tallies;

  for (std::size_t e = 0; e < epochs.size(); ++e) {
    std::map<std::string, const LinkMeasurement*> by_link;
    for (const auto& m : epochs[e]) by_link[m.link] = &m;

    for (const auto& g : groups) {
      Tally& tally = tallies[g.id];

      double weight_total = 0.0;
      double weighted_delay = 0.0;
      double prop_total = 0.0;
      for (const auto& route : g.routes) {
        const LinkMeasurement* entry =
            by_link.count(route.entry_link) ? by_link[route.entry_link] : nullptr;
        const ClassStats* entry_stats = find_stats(entry, g.id);

        double route_delay = entry_stats ? entry_stats->delay_ms : 0.0;
        double route_prop =
            scenario.topology.find_link(route.entry_link)
                ? scenario.topology.find_link(route.entry_link)->prop_delay_ms
                : 0.0;
        const std::string terminal =
            route.continuation ? *route.continuation : route.entry_link;
        if (route.continuation) {
          const LinkMeasurement* cont =
              by_link.count(*route.continuation) ? by_link[*route.continuation] : nullptr;
          const ClassStats* cont_stats = find_stats(cont, g.id);
          route_delay += cont_stats ? cont_stats->delay_ms : 0.0;
          route_prop += scenario.topology.find_link(*route.continuation)
                            ? scenario.topology.find_link(*route.continuation)->prop_delay_ms
                            : 0.0;
        }
        prop_total += route_prop;

        const double w = entry_stats ? entry_stats->throughput_mbps : 0.0;
        weight_total += w;
        weighted_delay += w * route_delay;

        const LinkMeasurement* term_m =
            by_link.count(terminal) ? by_link[terminal] : nullptr;
        const ClassStats* term_stats = find_stats(term_m, g.id);
        if (term_stats)
          tally.delivered_mbit += term_stats->throughput_mbps *
                                  (1.0 - term_stats->loss_fraction) * period;
      }

      double delay;
      bool satisfied;
      if (weight_total > 0.0) {
        delay = weighted_delay / weight_total;
        satisfied = delay <= g.sla.max_e2e_delay_ms;
      } else {
        // No traffic this epoch: no violation evidence; report propagation.
        delay = g.routes.empty() ? 0.0
                                 : prop_total / static_cast<double>(g.routes.size());
        satisfied = true;
      }
      tally.delays.push_back(delay);
      if (satisfied) ++tally.satisfied;

      if (e < offered_mbps.size()) {
        const auto it = offered_mbps[e].find(g.id);
        if (it != offered_mbps[e].end()) tally.offered_mbit += it->second * period;
      }
    }

    double mlu = 0.0;
    for (const auto& m : epochs[e]) mlu = std::max(mlu, m.utilization);
    report.epoch_mlu.push_back(mlu);
  }

  for (const auto& g : groups) {
    const Tally& tally = tallies[g.id];
    GroupReport gr;
    gr.id = g.id;
    gr.klass = g.klass;
    gr.sla_satisfaction_pct =
        100.0 * static_cast<double>(tally.satisfied) / static_cast<double>(report.epochs);
    double sum = 0.0;
    for (double d : tally.delays) sum += d;
    gr.avg_delay_ms = sum / static_cast<double>(tally.delays.size());
    gr.p95_delay_ms = nearest_rank_percentile(tally.delays, 95.0);
    gr.offered_mbit = tally.offered_mbit;
    gr.delivered_mbit = tally.delivered_mbit;
    gr.epoch_delay_ms = tally.delays;
    report.total_offered_mbit += gr.offered_mbit;
    report.total_delivered_mbit += gr.delivered_mbit;
    report.groups.push_back(std::move(gr));
  }

  for (const auto& c : scenario.classes) {
    ClassReport cr;
    cr.klass = c.name;
    int satisfied = 0, samples = 0;
    std::vector<double> pooled;
    double sum = 0.0;
    for (const auto& g : groups) {
      if (g.klass != c.name) continue;
      const Tally& tally = tallies[g.id];
      satisfied += tally.satisfied;
      samples += static_cast<int>(tally.delays.size());
      for (double d : tally.delays) {
        pooled.push_back(d);
        sum += d;
      }
    }
    if (samples == 0) continue;
    cr.sla_satisfaction_pct = 100.0 * satisfied / static_cast<double>(samples);
    cr.avg_delay_ms = sum / static_cast<double>(samples);
    cr.p95_delay_ms = nearest_rank_percentile(pooled, 95.0);
    report.classes.push_back(std::move(cr));
  }

  for (double mlu : report.epoch_mlu) {
    report.max_mlu = std::max(report.max_mlu, mlu);
    report.mean_mlu += mlu;
  }
  report.mean_mlu /= static_cast<double>(report.epoch_mlu.size());

  return report;
}

std::string report_to_json(const RunReport& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["horizon_s"] = r.horizon_s;
  j["epochs"] = r.epochs;
  j["spr_solves"] = r.spr_solves;
  j["qos_solves"] = r.qos_solves;
  j["policy_holds"] = r.policy_holds;

  Json groups = Json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"id", g.id},
                      {"class", g.klass},
                      {"sla_satisfaction_pct", g.sla_satisfaction_pct},
                      {"avg_delay_ms", g.avg_delay_ms},
                      {"p95_delay_ms", g.p95_delay_ms},
                      {"offered_mbit", g.offered_mbit},
                      {"delivered_mbit", g.delivered_mbit}});
  }
  j["flow_groups"] = groups;

  Json classes = Json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"class", c.klass},
                       {"sla_satisfaction_pct", c.sla_satisfaction_pct},
                       {"avg_delay_ms", c.avg_delay_ms},
                       {"p95_delay_ms", c.p95_delay_ms}});
  }
  j["classes"] = classes;

  j["mlu"] = {{"max", r.max_mlu}, {"mean", r.mean_mlu}, {"per_epoch", r.epoch_mlu}};
  j["totals"] = {{"offered_mbit", r.total_offered_mbit},
                 {"delivered_mbit", r.total_delivered_mbit}};
  return j.dump(2) + "\n";
}

std::string metrics_to_csv(const std::vector<std::vector<LinkMeasurement>>& epochs) {
  std::ostringstream out;
  out << "epoch,link,class,throughput_mbps,delay_ms,loss_fraction,utilization\n";
  for (const auto& epoch : epochs) {
    for (const auto& m : epoch) {
      for (const auto& [group, stats] : m.per_class) {
        out << m.epoch << ',' << m.link << ',' << group << ','
            << fmt_double(stats.throughput_mbps) << ',' << fmt_double(stats.delay_ms)
            << ',' << fmt_double(stats.loss_fraction) << ','
            << fmt_double(m.utilization) << '\n';
      }
    }
  }
  return out.str();
}

std::vector<std::vector<LinkMeasurement>> metrics_from_csv(const std::string& csv) {
  std::vector<std::vector<LinkMeasurement>> epochs;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string epoch_s, link, group, tput_s, delay_s, loss_s, util_s;
    std::getline(row, epoch_s, ',');
    std::getline(row, link, ',');
    std::getline(row, group, ',');
    std::getline(row, tput_s, ',');
    std::getline(row, delay_s, ',');
    std::getline(row, loss_s, ',');
    std::getline(row, util_s, ',');
    const std::int64_t epoch = std::stoll(epoch_s);
    if (epochs.size() <= static_cast<std::size_t>(epoch))
      epochs.resize(epoch + 1);
    auto& measurements = epochs[epoch];
    LinkMeasurement* m = nullptr;
    for (auto& cand : measurements)
      if (cand.link == link) m = &cand;
    if (!m) {
      measurements.push_back({});
      m = &measurements.back();
      m->epoch = epoch;
      m->link = link;
    }
    m->utilization = std::stod(util_s);
    ClassStats stats;
    stats.throughput_mbps = std::stod(tput_s);
    stats.delay_ms = std::stod(delay_s);
    stats.loss_fraction = std::stod(loss_s);
    m->per_class[group] = stats;
  }
  return epochs;
}

}  // namespace sdwan
