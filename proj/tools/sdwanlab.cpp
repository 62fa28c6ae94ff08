// Command-line front end: run single experiments, compare policy modes,
// validate scenario files, and poke the two optimizers on standalone
// instance files.
//
// Exit codes: 0 success, 2 validation/parse error, 3 solver fault, 4 I/O.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sdwan/experiment.h"
#include "sdwan/qos.h"
#include "sdwan/scenario.h"
#include "sdwan/spr.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

sdwan::PolicyMode parse_mode(const std::string& s) {
  const auto mode = sdwan::policy_mode_from_string(s);
  if (!mode) throw CLI::ValidationError("--mode", "expected all-tns, mlu or mlu-qos");
  return *mode;
}

sdwan::Topology topology_from_json(const Json& j) {
  sdwan::Topology topo;
  for (const auto& jn : j.at("nodes")) {
    sdwan::Node n;
    n.id = jn.at("id").get<std::string>();
    n.role = sdwan::node_role_from_string(jn.at("role").get<std::string>())
                 .value_or(sdwan::NodeRole::Spoke);
    topo.nodes.push_back(std::move(n));
  }
  for (const auto& jl : j.at("links")) {
    sdwan::OverlayLink l;
    l.id = jl.at("id").get<std::string>();
    l.src = jl.at("src").get<std::string>();
    l.dst = jl.at("dst").get<std::string>();
    l.capacity_mbps = jl.at("capacity_mbps").get<double>();
    l.prop_delay_ms = jl.value("prop_delay_ms", 0.0);
    l.kind = sdwan::link_kind_from_string(jl.value("kind", "mstp"))
                 .value_or(sdwan::LinkKind::Mstp);
    topo.links.push_back(std::move(l));
  }
  return topo;
}

int cmd_run(const std::string& scenario_ref, const std::string& mode_s,
            std::uint64_t seed, double horizon, const std::string& out_dir) {
  const sdwan::Scenario scenario = sdwan::load_scenario(scenario_ref);
  sdwan::RunOptions options;
  options.mode = parse_mode(mode_s);
  options.seed = seed;
  if (horizon > 0.0) options.horizon_s = horizon;
  options.out_dir = out_dir;

  const sdwan::RunReport report = sdwan::run_experiment(scenario, options);
  std::printf("scenario=%s mode=%s seed=%llu epochs=%d\n", report.scenario.c_str(),
              report.mode.c_str(), static_cast<unsigned long long>(report.seed),
              report.epochs);
  for (const auto& c : report.classes) {
    std::printf("  %-12s sla=%6.2f%%  avg=%7.2f ms  p95=%7.2f ms\n", c.klass.c_str(),
                c.sla_satisfaction_pct, c.avg_delay_ms, c.p95_delay_ms);
  }
  std::printf("  max MLU %.3f, mean MLU %.3f, spr %d qos %d holds %d\n",
              report.max_mlu, report.mean_mlu, report.spr_solves, report.qos_solves,
              report.policy_holds);
  std::printf("artifacts in %s\n", out_dir.c_str());
  return kExitOk;
}

int cmd_compare(const std::string& scenario_ref, const std::vector<std::string>& modes_s,
                const std::vector<std::uint64_t>& seeds, double horizon,
                const std::string& out_dir) {
  const sdwan::Scenario scenario = sdwan::load_scenario(scenario_ref);
  sdwan::CompareOptions options;
  for (const auto& m : modes_s) options.modes.push_back(parse_mode(m));
  options.seeds = seeds;
  options.out_dir = out_dir;
  if (horizon > 0.0) options.horizon_s = horizon;

  const sdwan::CompareTable table = sdwan::compare_modes(scenario, options);
  std::fputs(sdwan::compare_to_csv(table).c_str(), stdout);
  return kExitOk;
}

int cmd_validate(const std::string& scenario_ref) {
  sdwan::Scenario scenario;
  if (scenario_ref.rfind("builtin:", 0) == 0) {
    scenario = sdwan::load_scenario(scenario_ref);
  } else {
    scenario = sdwan::parse_scenario(read_file(scenario_ref));
  }
  const auto violations = sdwan::validate_scenario(scenario);
  if (violations.empty()) {
    std::printf("ok: %s (%zu links, %zu flow groups)\n", scenario.name.c_str(),
                scenario.topology.links.size(), scenario.groups.size());
    return kExitOk;
  }
  for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
  return kExitValidation;
}

int cmd_spr_solve(const std::string& instance_path, const std::string& objective,
                  bool local_search, std::uint64_t seed) {
  const Json j = Json::parse(read_file(instance_path));
  const sdwan::Topology topo = topology_from_json(j.at("topology"));

  sdwan::SprInstance instance;
  instance.topology = &topo;
  instance.objective = objective == "quality" ? sdwan::SprObjective::MinQuality
                                              : sdwan::SprObjective::MinMlu;
  for (const auto& jc : j.at("commodities")) {
    sdwan::SprCommodity com;
    com.group_id = jc.at("group").get<std::string>();
    com.demand_mbps = jc.at("demand_mbps").get<double>();
    com.sla_ms = jc.value("sla_ms", 1e9);
    for (const auto& jr : jc.at("routes")) {
      sdwan::RouteOption r;
      r.entry_link = jr.at("entry").get<std::string>();
      if (jr.contains("continuation"))
        r.continuation = jr.at("continuation").get<std::string>();
      com.routes.push_back(std::move(r));
    }
    instance.commodities.push_back(std::move(com));
  }
  if (j.contains("current_loads_mbps"))
    for (const auto& [link, load] : j.at("current_loads_mbps").items())
      instance.current_loads_mbps[link] = load.get<double>();

  sdwan::DelayModelSpec model;
  const sdwan::SprSolution solution =
      local_search ? sdwan::local_search_spr(instance, model, seed)
                   : sdwan::solve_spr(instance, model);

  Json out;
  out["status"] = solution.status == sdwan::LpStatus::Optimal ? "optimal"
                  : solution.status == sdwan::LpStatus::Infeasible ? "infeasible"
                                                                   : "unbounded";
  out["mlu"] = solution.mlu;
  Json split = Json::object();
  for (const auto& [group, ratios] : solution.split) {
    Json r = Json::object();
    for (const auto& [link, x] : ratios) r[link] = x;
    split[group] = r;
  }
  out["split"] = split;
  Json loads = Json::object();
  for (const auto& [link, load] : solution.link_loads_mbps) loads[link] = load;
  out["link_loads_mbps"] = loads;
  std::printf("%s\n", out.dump(2).c_str());
  return solution.status == sdwan::LpStatus::Optimal ? kExitOk : kExitSolver;
}

int cmd_qos_solve(const std::string& instance_path) {
  const Json j = Json::parse(read_file(instance_path));
  sdwan::QosInstance instance;
  const Json& jl = j.at("link");
  instance.link.id = jl.value("id", "link");
  instance.link.capacity_mbps = jl.at("capacity_mbps").get<double>();
  instance.link.prop_delay_ms = jl.value("prop_delay_ms", 0.0);
  for (const auto& jc : j.at("classes")) {
    sdwan::QosClassInput c;
    c.group_id = jc.at("group").get<std::string>();
    c.demand_mbps = jc.at("demand_mbps").get<double>();
    c.sla_ms = jc.value("sla_ms", 1e9);
    const std::string tier = jc.value("tier", "weighted");
    c.tier = sdwan::tier_from_string(tier).value_or(sdwan::Tier::Weighted);
    c.strict_rank = jc.value("strict_rank", -1);
    instance.classes.push_back(std::move(c));
  }
  instance.params.alpha = j.value("alpha", 0.01);

  sdwan::DelayModelSpec model;
  const sdwan::QosSolution solution = sdwan::solve_qos_link(instance, model);

  Json out;
  out["objective"] = solution.objective;
  out["converged"] = solution.converged;
  Json alloc = Json::object();
  for (const auto& [group, a] : solution.per_class)
    alloc[group] = {{"alloc_mbps", a.alloc_mbps},
                    {"shortfall_mbps", a.shortfall_mbps},
                    {"sla_slack_ms", a.sla_slack_ms}};
  out["allocation"] = alloc;
  std::printf("%s\n", out.dump(2).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlay traffic-engineering lab: joint routing and QoS policy "
               "optimization against a fluid network simulator"};
  app.require_subcommand(1);

  // run
  std::string scenario_ref, mode_s = "mlu-qos", out_dir = "out";
  std::uint64_t seed = 0;
  double horizon = -1.0;
  auto* run = app.add_subcommand("run", "Run one experiment and write artifacts");
  run->add_option("--scenario", scenario_ref, "Path or builtin:NAME")->required();
  run->add_option("--mode", mode_s, "all-tns | mlu | mlu-qos");
  run->add_option("--seed", seed, "Simulation seed");
  run->add_option("--horizon", horizon, "Horizon override, seconds");
  run->add_option("--out", out_dir, "Output directory");

  // compare
  std::vector<std::string> modes_s{"all-tns", "mlu", "mlu-qos"};
  std::vector<std::uint64_t> seeds{0};
  auto* compare = app.add_subcommand("compare", "Run a mode/seed grid and tabulate");
  compare->add_option("--scenario", scenario_ref, "Path or builtin:NAME")->required();
  compare->add_option("--modes", modes_s, "Policy modes")->delimiter(',');
  compare->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  compare->add_option("--horizon", horizon, "Horizon override, seconds");
  compare->add_option("--out", out_dir, "Output directory");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", scenario_ref, "Path or builtin:NAME")->required();

  // dump
  auto* dump = app.add_subcommand("dump", "Print a scenario as JSON (template aid)");
  dump->add_option("--scenario", scenario_ref, "Path or builtin:NAME")->required();

  // spr-solve
  std::string instance_path, objective = "mlu";
  bool local = false;
  auto* spr = app.add_subcommand("spr-solve", "Solve a routing instance file");
  spr->add_option("--instance", instance_path, "Instance JSON")->required();
  spr->add_option("--objective", objective, "mlu | quality");
  spr->add_flag("--local-search", local, "Use the discrete heuristic");
  spr->add_option("--seed", seed, "Heuristic seed");

  // qos-solve
  auto* qos = app.add_subcommand("qos-solve", "Solve a single-link QoS instance file");
  qos->add_option("--instance", instance_path, "Instance JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_ref, mode_s, seed, horizon, out_dir);
    if (compare->parsed())
      return cmd_compare(scenario_ref, modes_s, seeds, horizon, out_dir);
    if (validate->parsed()) return cmd_validate(scenario_ref);
    if (dump->parsed()) {
      std::fputs(sdwan::scenario_to_json(sdwan::load_scenario(scenario_ref)).c_str(),
                 stdout);
      return kExitOk;
    }
    if (spr->parsed()) return cmd_spr_solve(instance_path, objective, local, seed);
    if (qos->parsed()) return cmd_qos_solve(instance_path);
  } catch (const sdwan::ScenarioError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "instance parse error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid instance: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver fault: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
