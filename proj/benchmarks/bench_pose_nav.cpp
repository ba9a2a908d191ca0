// Copyright 2026 The Flame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <benchmark/benchmark.h>

#include "flame/mapserver/protocol.hpp"
#include "flame/nav/navgraph.hpp"
#include "flame/pose/pose.hpp"
#include "flame/sim/world.hpp"

#ifndef FLAME_SCENARIO_DIR
#define FLAME_SCENARIO_DIR "scenarios"
#endif

namespace {

using namespace flame;

void BM_Kabsch(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20, 20);
  const auto truth = pose::Pose::from_axis_angle(pose::Vec3(0.2, 1, 0.3).normalized(), 0.7,
                                                 pose::Vec3(4, -2, 1));
  std::vector<pose::PointPair> pairs(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pairs) {
    p.p = pose::Vec3(u(rng), u(rng), u(rng));
    p.q = pose::transform_point(truth, p.p);
  }
  for (auto _ : state) {
    auto r = pose::kabsch(pairs);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Kabsch)->Arg(3)->Arg(30)->Arg(300);

// The map server's /localize work for one step of the default scenario.
void BM_Localize(benchmark::State& state) {
  const sim::World world(sim::load_world_spec(FLAME_SCENARIO_DIR "/four_maps.json"));
  const auto cues = sim::synthesize_cues(world, 3, 0);
  for (auto _ : state) {
    auto r = mapserver::localize(cues, world.maps()[0]);
    benchmark::DoNotOptimize(r);
  }
  state.counters["observations"] = static_cast<double>(cues.observations.size());
}
BENCHMARK(BM_Localize);

void BM_StitchAndRoute(benchmark::State& state) {
  const sim::World world(sim::load_world_spec(FLAME_SCENARIO_DIR "/campus3.json"));
  std::vector<mapserver::WaypointGraph> graphs;
  for (const auto& m : world.maps()) graphs.push_back(mapserver::waypoint_graph(m));
  for (auto _ : state) {
    auto g = nav::stitch(graphs);
    auto r = nav::route(g, "eng-entrance", "lib-stacks");
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_StitchAndRoute);

}  // namespace

BENCHMARK_MAIN();
