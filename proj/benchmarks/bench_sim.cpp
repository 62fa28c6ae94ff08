#include <benchmark/benchmark.h>

#include "sdwan/controller.h"
#include "sdwan/scenario.h"
#include "sdwan/sim.h"

namespace {

static void SchedulerTick(benchmark::State& state) {
  std::vector<sdwan::SchedClassInput> classes(6);
  for (int i = 0; i < 6; ++i) {
    classes[i].id = "c" + std::to_string(i);
    classes[i].strict_rank = i < 4 ? i : -1;
    classes[i].wfq_weight = i < 4 ? 0.0 : 0.5;
    classes[i].backlog_mbit = 0.05 * i;
    classes[i].arrivals_mbit = 0.08;
  }
  for (auto _ : state) {
    const auto out = sdwan::schedule_link_tick(6.0, 0.1, 0.25, classes);
    benchmark::DoNotOptimize(out.size());
  }
}
BENCHMARK(SchedulerTick);

// One 1 s measurement epoch (10 ticks) of the full built-in overlay.
static void SimulatorEpoch(benchmark::State& state) {
  const sdwan::Scenario s = sdwan::builtin_sdwan_mix();
  sdwan::FluidSimulator sim(s.topology, s.groups, s.traffic, s.sim);
  sdwan::Controller ctrl(s.topology, s.groups, s.delay_model,
                         sdwan::ControlConfig{50.0, 10.0, sdwan::PolicyMode::AllTns, 0.3});
  sim.install(ctrl.spr_policy(), ctrl.qos_policy());
  for (auto _ : state) {
    const auto epoch = sim.run_epoch();
    benchmark::DoNotOptimize(epoch.measurements.size());
  }
}
BENCHMARK(SimulatorEpoch);

}  // namespace
