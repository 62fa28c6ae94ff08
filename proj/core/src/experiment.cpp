#include "sdwan/experiment.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sdwan/sim.h"

namespace sdwan {

namespace {

using Json = nlohmann::ordered_json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("short write to '" + path.string() + "'");
}

std::string events_to_jsonl(const std::vector<ControlEvent>& events,
                            PolicyMode mode) {
  std::ostringstream out;
  for (const auto& e : events) {
    Json j;
    j["t_s"] = e.t_s;
    j["mode"] = to_string(mode);
    j["kind"] = e.kind;
    j["detail"] = e.detail;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace

RunReport run_experiment(const Scenario& scenario, const RunOptions& options) {
  Scenario s = scenario;
  s.control.mode = options.mode;
  s.sim.seed = options.seed;
  if (options.horizon_s) s.sim.horizon_s = *options.horizon_s;

  const double period = s.sim.measurement_period_s;
  const int epochs = static_cast<int>(std::llround(s.sim.horizon_s / period));
  if (epochs <= 0) throw std::invalid_argument("run_experiment: empty horizon");

  FluidSimulator sim(s.topology, s.groups, s.traffic, s.sim);
  Controller controller(s.topology, s.groups, s.delay_model, s.control);

  DemandEstimate estimate;
  std::vector<std::vector<LinkMeasurement>> measurements;
  std::vector<std::map<std::string, double>> offered;
  measurements.reserve(epochs);
  offered.reserve(epochs);

  for (int e = 0; e < epochs; ++e) {
    controller.control_step(static_cast<double>(e) * period);
    sim.install(controller.spr_policy(), controller.qos_policy());
    auto epoch = sim.run_epoch();
    estimate = update_demand(estimate, epoch.offered_mbps,
                             s.control.demand_ewma_alpha);
    controller.observe(estimate);
    measurements.push_back(std::move(epoch.measurements));
    offered.push_back(std::move(epoch.offered_mbps));
  }
  // Trailing boundary: the cadence counts the horizon instant itself.
  controller.control_step(static_cast<double>(epochs) * period);

  RunReport report = compute_report(s, measurements, offered);
  report.mode = to_string(options.mode);
  report.seed = options.seed;
  report.horizon_s = s.sim.horizon_s;
  report.spr_solves = controller.spr_solves();
  report.qos_solves = controller.qos_solves();
  report.policy_holds = controller.policy_holds();

  if (options.out_dir) {
    const std::filesystem::path dir(*options.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", report_to_json(report));
    write_file(dir / "metrics.csv", metrics_to_csv(measurements));
    write_file(dir / "policy_log.jsonl",
               events_to_jsonl(controller.events(), options.mode));
  }
  return report;
}

CompareTable compare_modes(const Scenario& scenario, const CompareOptions& options) {
  if (options.modes.empty() || options.seeds.empty())
    throw std::invalid_argument("compare_modes: need at least one mode and seed");

  CompareTable table;
  table.modes = options.modes;
  for (const auto& c : scenario.classes) table.classes.push_back(c.name);
  table.cells.assign(table.classes.size(),
                     std::vector<CompareCell>(options.modes.size()));

  for (std::size_t mi = 0; mi < options.modes.size(); ++mi) {
    const PolicyMode mode = options.modes[mi];
    int completed = 0;
    std::vector<double> sat(table.classes.size(), 0.0);
    std::vector<double> avg(table.classes.size(), 0.0);
    std::vector<double> p95(table.classes.size(), 0.0);

    for (const std::uint64_t seed : options.seeds) {
      RunOptions run;
      run.mode = mode;
      run.seed = seed;
      run.horizon_s = options.horizon_s;
      if (!options.out_dir.empty()) {
        std::ostringstream sub;
        sub << to_string(mode) << "-seed" << seed;
        run.out_dir = (std::filesystem::path(options.out_dir) / sub.str()).string();
      }
      try {
        RunReport report = run_experiment(scenario, run);
        for (std::size_t row = 0; row < table.classes.size(); ++row) {
          for (const auto& cr : report.classes) {
            if (cr.klass != table.classes[row]) continue;
            sat[row] += cr.sla_satisfaction_pct;
            avg[row] += cr.avg_delay_ms;
            p95[row] += cr.p95_delay_ms;
          }
        }
        table.runs.push_back(std::move(report));
        ++completed;
      } catch (const std::exception&) {
        // Leave the column marked failed; other (mode, seed) pairs proceed.
      }
    }

    for (std::size_t row = 0; row < table.classes.size(); ++row) {
      CompareCell& cell = table.cells[row][mi];
      if (completed == 0) {
        cell.failed = true;
        continue;
      }
      cell.sla_satisfaction_pct = sat[row] / completed;
      cell.avg_delay_ms = avg[row] / completed;
      cell.p95_delay_ms = p95[row] / completed;
    }
  }

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_file(std::filesystem::path(options.out_dir) / "comparison.csv",
               compare_to_csv(table));
  }
  return table;
}

std::string compare_to_csv(const CompareTable& table) {
  std::ostringstream out;
  out << "class";
  for (const PolicyMode mode : table.modes) out << ',' << to_string(mode);
  out << '\n';
  for (std::size_t row = 0; row < table.classes.size(); ++row) {
    out << table.classes[row];
    for (std::size_t mi = 0; mi < table.modes.size(); ++mi) {
      const CompareCell& cell = table.cells[row][mi];
      if (cell.failed) {
        out << ",failed";
        continue;
      }
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.1f / %.1f / %.1f",
                    cell.sla_satisfaction_pct, cell.avg_delay_ms, cell.p95_delay_ms);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace sdwan
