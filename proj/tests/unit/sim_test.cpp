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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "flame/errors.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/sim/harness.hpp"
#include "flame/sim/world.hpp"

namespace flame::sim {
namespace {

std::string scenario(const std::string& name) {
  return std::string(FLAME_SCENARIO_DIR) + "/" + name + ".json";
}

WorldSpec small_spec() {
  WorldSpec s = load_world_spec(scenario("four_maps"));
  s.steps = 60;
  return s;
}

TEST(LocalFrameTest, RoundTrip) {
  const LocalFrame f(cells::LatLng(40.4433, -79.9436));
  for (const Vec2 p : {Vec2(0, 0), Vec2(120.5, -33.25), Vec2(-1000, 2500)}) {
    const Vec2 back = f.to_local(f.to_latlng(p));
    EXPECT_NEAR((back - p).norm(), 0, 1e-6);
  }
  // one degree of latitude is about 111 km
  EXPECT_NEAR(f.to_latlng(Vec2(0, 111195)).lat(), 41.4433, 1e-3);
  EXPECT_NEAR(f.to_latlng(Vec2(50, 0)).distance_m(f.origin()), 50, 0.01);
}

TEST(WorldSpecTest, JsonRoundTripAndValidation) {
  const WorldSpec s = load_world_spec(scenario("four_maps"));
  EXPECT_EQ(s.maps.size(), 4u);
  EXPECT_EQ(s.nameservers, 2);
  const WorldSpec again = WorldSpec::from_json(s.to_json());
  EXPECT_EQ(again.to_json(), s.to_json());
  EXPECT_EQ(config_hash(again), config_hash(s));

  auto bad = s.to_json();
  bad["maps"][1]["map_id"] = "hall-a";
  EXPECT_THROW(WorldSpec::from_json(bad), ValidationError);
  bad = s.to_json();
  bad["maps"][0]["nameserver"] = 2;
  EXPECT_THROW(WorldSpec::from_json(bad), ValidationError);
  bad = s.to_json();
  bad["route"] = nlohmann::json::array({{0, 0}});
  EXPECT_THROW(WorldSpec::from_json(bad), ValidationError);
  bad = s.to_json();
  bad["network"] = "carrier-pigeon";
  EXPECT_THROW(WorldSpec::from_json(bad), ValidationError);
  EXPECT_THROW(load_world_spec("/nonexistent/world.json"), Error);
}

TEST(WorldTest, TrajectoryAndLandmarks) {
  const World w(small_spec());
  ASSERT_EQ(w.steps().size(), 60u);
  for (std::size_t k = 1; k < w.steps().size(); ++k) {
    EXPECT_GT(w.steps()[k].t, w.steps()[k - 1].t);
    // straight-line distance never exceeds the walked distance
    const double d = (w.steps()[k].x.translation() - w.steps()[k - 1].x.translation()).norm();
    EXPECT_LE(d, 2.4 + 1e-9);
  }
  EXPECT_NEAR(w.steps()[1].traveled_m, 2.4, 1e-12);
  for (std::size_t m = 0; m < w.maps().size(); ++m) {
    const auto& map = w.maps()[m];
    ASSERT_EQ(map.landmarks.size(), w.landmarks_world(m).size());
    EXPECT_EQ(map.landmarks.size(), 160u);  // 2400 m^2 at 1 per 15 m^2
    const pose::Pose g = w.spec().maps[m].frame;
    for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
      EXPECT_LT((pose::transform_point(g, map.landmarks[i].position) - w.landmarks_world(m)[i]).norm(),
                1e-9);
      EXPECT_TRUE(w.inside(m, w.landmarks_world(m)[i]));
    }
  }
}

TEST(WorldTest, CoarseNoiseMatchesRadius) {
  WorldSpec s = small_spec();
  s.steps = 4000;
  const World w(s);
  int within = 0;
  for (const auto& st : w.steps()) {
    const double r = st.coarse.error_radius_m;
    if (st.indoor) {
      EXPECT_GE(r, 15);
      EXPECT_LE(r, 60);
    } else {
      EXPECT_GE(r, 5);
      EXPECT_LE(r, 30);
    }
    const Vec2 c = w.frame().to_local(st.coarse.center);
    within += (c - st.x.translation().head<2>()).norm() <= r;
  }
  // 95% radius, binomial sd about 0.35%
  EXPECT_NEAR(within / 4000.0, 0.95, 0.015);
}

TEST(WorldTest, FixIntervalRepeatsFixes) {
  WorldSpec s = small_spec();
  s.coarse.fix_interval_s = 6;
  const World w(s);
  for (std::size_t k = 0; k < w.steps().size(); ++k) {
    const auto& a = w.steps()[k].coarse;
    const auto& b = w.steps()[k - k % 3].coarse;
    EXPECT_EQ(a.center, b.center);
    EXPECT_EQ(a.error_radius_m, b.error_radius_m);
  }
  EXPECT_NE(w.steps()[0].coarse.center, w.steps()[3].coarse.center);
}

TEST(WorldTest, VioOffsetAndDrift) {
  WorldSpec s = small_spec();
  s.vio.drift_per_m = 0.01;
  const World w(s);
  for (const auto& st : w.steps()) {
    const pose::Pose undrifted = pose::compose(s.vio.offset, st.x);
    EXPECT_NEAR((st.vio.translation() - undrifted.translation()).norm(), 0.01 * st.traveled_m, 1e-9);
  }
}

TEST(CuesTest, LandmarkAtDeviceIsAtOrigin) {
  WorldSpec s = small_spec();
  s.steps = 1;
  s.route = {Vec2(10, 20), Vec2(20, 20)};
  s.obs_noise_m = 0;
  const World probe(s);
  // put the device exactly on the first landmark of map 0
  const pose::Vec3 lm = probe.landmarks_world(0)[0];
  s.route = {lm.head<2>(), lm.head<2>() + Vec2(1, 0)};
  s.device_height_m = lm.z();
  const World w(s);
  const auto cues = synthesize_cues(w, 0, 0);
  bool seen = false;
  for (const auto& o : cues.observations) {
    if (o.landmark_id == w.maps()[0].landmarks[0].id) {
      seen = true;
      EXPECT_LT(o.position.norm(), 1e-9);
    }
    EXPECT_LE(o.position.norm(), s.r_vis_m + 1e-9);
  }
  EXPECT_TRUE(seen);
}

TEST(CuesTest, FarOutsideSeesNothing) {
  WorldSpec s = small_spec();
  s.steps = 5;
  s.occlusion = false;
  s.route = {Vec2(-200, -200), Vec2(-300, -200)};
  const World w(s);
  for (std::size_t k = 0; k < w.steps().size(); ++k) {
    EXPECT_TRUE(synthesize_all_cues(w, k).observations.empty());
  }
}

TEST(CuesTest, OcclusionHidesOtherBuildings) {
  WorldSpec s = small_spec();
  s.steps = 1;
  s.route = {Vec2(58, 20), Vec2(59, 20)};  // inside hall-a, 22 m from hall-b's wall
  s.r_vis_m = 30;
  World w(s);
  EXPECT_FALSE(synthesize_cues(w, 0, 0).observations.empty());
  EXPECT_TRUE(synthesize_cues(w, 0, 1).observations.empty());
  s.occlusion = false;
  World open(s);
  EXPECT_FALSE(synthesize_cues(open, 0, 1).observations.empty());
}

TEST(CuesTest, NoiselessCuesLocalizeToGroundTruth) {
  WorldSpec s = small_spec();
  s.obs_noise_m = 0;
  const World w(s);
  int checked = 0;
  for (std::size_t k = 0; k < w.steps().size(); ++k) {
    const auto best = w.best_map(w.steps()[k].x);
    if (!best) continue;
    const auto cues = synthesize_cues(w, k, *best);
    if (cues.observations.size() < 3) continue;
    const auto r = mapserver::localize(cues, w.maps()[*best]);
    ASSERT_TRUE(r.ok) << r.message;
    const pose::Pose want = pose::compose(pose::inverse(s.maps[*best].frame), w.steps()[k].x);
    EXPECT_LT((r.pose.translation() - want.translation()).norm(), 1e-6);
    EXPECT_LT(pose::rotation_angle(r.pose.rotation(), want.rotation()), 1e-6);
    EXPECT_GT(r.confidence, 0.99);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(HarnessTest, DeterministicAndConserving) {
  const WorldSpec s = small_spec();
  const auto a = run(s);
  const auto b = run(s);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_TRUE(a.aggregates.conservation_ok);
  EXPECT_EQ(a.steps[0].geodomains_uncached, a.steps[0].geodomains_total);
  EXPECT_EQ(a.steps[0].geodomains_cached, 0);
  EXPECT_TRUE(a.steps[0].rediscovered);
  EXPECT_EQ(a.aggregates.economy_violations, 0);
  for (const auto& st : a.steps) {
    EXPECT_GE(st.geodomains_total, st.geodomains_uncached);
    EXPECT_GE(st.hit_ratio, 0);
    EXPECT_LE(st.hit_ratio, 1);
  }
  WorldSpec other = s;
  other.rng_seed += 1;
  EXPECT_NE(run(other).to_json().dump(), a.to_json().dump());
}

TEST(HarnessTest, DelegationIsFollowed) {
  WorldSpec s = small_spec();
  s.steps = 100;  // far enough to enter lab-c, whose records are delegated
  const auto r = run(s);
  int delegated = 0;
  bool saw_c = false;
  for (const auto& st : r.steps) {
    delegated += st.delegated_lookups;
    saw_c |= st.active == std::optional<std::string>("lab-c");
  }
  EXPECT_GT(delegated, 0);
  EXPECT_TRUE(saw_c);
}

TEST(HarnessTest, SingleMapRediscoversOnce) {
  const auto r = run(load_world_spec(scenario("single_map")));
  EXPECT_EQ(r.aggregates.rediscoveries, 1);
  EXPECT_DOUBLE_EQ(r.aggregates.selection_accuracy, 1.0);
  for (const auto& st : r.steps) {
    EXPECT_EQ(st.active, std::optional<std::string>("hall-a"));
    EXPECT_EQ(st.client_dns_wire_queries > 0, st.step == 0);
  }
}

TEST(HarnessTest, LoopbackMatchesSimulated) {
  WorldSpec s = small_spec();
  s.steps = 25;
  auto sim = run(s).to_json();
  s.network = "loopback";
  auto live = run(s).to_json();
  sim["metadata"].erase("network");
  live["metadata"].erase("network");
  EXPECT_EQ(sim.dump(), live.dump());
}

TEST(HarnessTest, AggregateCrossingsAndSpurious) {
  std::vector<StepMetrics> steps(8);
  for (int k = 0; k < 8; ++k) {
    steps[k].step = k;
    steps[k].geodomains_total = 10;
    steps[k].geodomains_cached = 10;
    steps[k].hit_ratio = 1;
    steps[k].truth = k < 4 ? "a" : "b";
    steps[k].active = k < 5 ? "a" : "b";
    steps[k].scores = {{*steps[k].active, true, 0.9, 10, 0.0, 0.0}};
  }
  steps[4].scores[0].ok = false;  // a fails once the device is in b
  steps[0].rediscovered = true;
  steps[5].rediscovered = true;
  steps[7].rediscovered = true;  // b was fine at step 6
  const auto a = aggregate(steps, 2, 1.0);
  ASSERT_EQ(a.crossings.size(), 1u);
  EXPECT_EQ(a.crossings[0].step, 4);
  EXPECT_EQ(a.crossings[0].lag, 1);
  EXPECT_EQ(a.max_crossing_lag, 1);
  EXPECT_EQ(a.rediscoveries, 3);
  EXPECT_EQ(a.spurious_rediscoveries, 1);
  EXPECT_EQ(a.selection_steps, 6);
  EXPECT_EQ(a.selection_correct, 5);
  EXPECT_DOUBLE_EQ(a.frac_hit_ratio_ge_0_9, 1.0);
  EXPECT_EQ(a.hit_ratio_histogram[9], 6);
}

TEST(ReportTest, WritesFilesAndManifest) {
  const WorldSpec s = small_spec();
  const auto r = run(s);
  const auto dir = std::filesystem::temp_directory_path() / "flame_report_test";
  std::filesystem::remove_all(dir);
  const auto files = report(r, s, dir.string(), {nlohmann::json{{"step", 0}}});
  for (const char* name : {"metrics.json", "summary.json", "steps.csv", "fig10a_geodomains_timeseries.csv",
                           "fig10b_geodomains_boxplot.csv", "fig11_hit_ratio_histogram.csv",
                           "fig12_map_selection.csv", "events.jsonl", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  EXPECT_EQ(std::filesystem::path(files.back()).filename(), "manifest.json");
  std::ifstream in(dir / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["seed"], s.rng_seed);
  EXPECT_EQ(manifest["config_hash"], config_hash(s));
  EXPECT_EQ(manifest["files"].size(), files.size() - 1);
  std::ifstream ts(dir / "fig10a_geodomains_timeseries.csv");
  std::string line;
  int lines = 0;
  while (std::getline(ts, line)) ++lines;
  EXPECT_EQ(lines, s.steps + 1);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace flame::sim
