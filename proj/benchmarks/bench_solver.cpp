#include <benchmark/benchmark.h>

#include <cmath>

#include "sdwan/qos.h"
#include "sdwan/scenario.h"
#include "sdwan/spr.h"

namespace {

// Routing LP at the built-in scenario's scale: 18 commodities over 11 links.
static void SprLpSolve(benchmark::State& state) {
  const sdwan::Scenario s = sdwan::builtin_sdwan_mix();
  const sdwan::DelayModelSpec model = s.delay_model;
  sdwan::SprInstance instance;
  instance.topology = &s.topology;
  for (const auto& g : s.groups) {
    instance.commodities.push_back(
        {g.id, 2.0 + 0.1 * instance.commodities.size(), g.sla.max_e2e_delay_ms,
         g.routes});
  }
  for (auto _ : state) {
    const sdwan::SprSolution sol = sdwan::solve_spr(instance, model);
    benchmark::DoNotOptimize(sol.mlu);
  }
}
BENCHMARK(SprLpSolve);

static void SprLocalSearch(benchmark::State& state) {
  const sdwan::Scenario s = sdwan::builtin_sdwan_mix();
  const sdwan::DelayModelSpec model = s.delay_model;
  sdwan::SprInstance instance;
  instance.topology = &s.topology;
  for (const auto& g : s.groups)
    instance.commodities.push_back(
        {g.id, 1.5, g.sla.max_e2e_delay_ms, g.routes});
  for (auto _ : state) {
    const sdwan::SprSolution sol = sdwan::local_search_spr(instance, model, 17);
    benchmark::DoNotOptimize(sol.mlu);
  }
}
BENCHMARK(SprLocalSearch);

static void QosLinkSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  sdwan::QosInstance instance{{"e", "h", "s", 6.0, 10.0, sdwan::LinkKind::Mstp},
                              {},
                              sdwan::QosParams{}};
  for (int i = 0; i < n; ++i) {
    sdwan::QosClassInput c;
    c.group_id = "c" + std::to_string(i);
    c.demand_mbps = 0.8 + 0.4 * i;
    c.sla_ms = 15.0 + 25.0 * i;
    c.tier = i < 4 ? sdwan::Tier::Strict : sdwan::Tier::Weighted;
    c.strict_rank = i < 4 ? i : -1;
    instance.classes.push_back(std::move(c));
  }
  const sdwan::DelayModelSpec model;
  for (auto _ : state) {
    const sdwan::QosSolution sol = sdwan::solve_qos_link(instance, model);
    benchmark::DoNotOptimize(sol.objective);
  }
}
BENCHMARK(QosLinkSolve)->Arg(2)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
