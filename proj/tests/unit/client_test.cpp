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

#include <gtest/gtest.h>

#include "flame/client/client.hpp"
#include "flame/dns/zone.hpp"
#include "flame/geo/zone_records.hpp"

namespace flame::client {
namespace {

using pose::Pose;
using pose::Quat;
using pose::Vec3;

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(-100, 100);
  return Pose(Quat(n(rng), n(rng), n(rng), n(rng)), Vec3(u(rng), u(rng), u(rng)));
}

TEST(ErrorScoreTest, Arithmetic) {
  const Pose a(Quat::Identity(), Vec3(1, 2, 3));
  EXPECT_EQ(error_score(a, a, Pose(), Pose()), 0);
  const Pose l0, l1(Quat::Identity(), Vec3(2, 0, 0));
  const Pose s0(Quat::Identity(), Vec3(10, 10, 0)), s1(Quat::Identity(), Vec3(10, 13.5, 0));
  EXPECT_DOUBLE_EQ(error_score(l0, l1, s0, s1), 1.5);
}

TEST(ErrorScoreTest, Ema) {
  double ema = ema_update(std::nullopt, 0.0, 0.3);
  EXPECT_EQ(ema, 0.0);
  ema = ema_update(ema, 1.0, 0.3);
  EXPECT_DOUBLE_EQ(ema, 0.3);
  EXPECT_EQ(ema_update(std::nullopt, 0.7, 0.3), 0.7);  // first score seeds
  EXPECT_EQ(ema_update(0.5, 0.25, 0.3), 0.3 * 0.25 + 0.7 * 0.5);
}

TEST(WaypointFrameTest, Identities) {
  std::mt19937_64 rng(11);
  const Pose p = random_pose(rng);
  const Vec3 w(1, 2, 3);
  EXPECT_LT((waypoint_to_app_frame(p, p, w) - w).norm(), 1e-12);
  const Vec3 t(4, -5, 6);
  EXPECT_LT((waypoint_to_app_frame(Pose(), Pose(Quat::Identity(), t), w) - (w - t)).norm(), 1e-12);
  for (int i = 0; i < 10000; ++i) {
    const Pose pa = random_pose(rng), pr = random_pose(rng);
    const Vec3 wr(rng() % 200 - 100.0, rng() % 200 - 100.0, rng() % 20 - 10.0);
    const Vec3 wa = waypoint_to_app_frame(pa, pr, wr);
    EXPECT_LT((pose::transform_point(pose::inverse(pa), wa) -
               pose::transform_point(pose::inverse(pr), wr)).norm(), 1e-9);
  }
}

// Maps registered on the same cells and built from one set of world
// landmarks; map k stores them in its own frame, optionally perturbed, so a
// perturbed map localizes with lower confidence.
struct Fixture {
  cells::LatLng spot{47.6205, -122.3493};
  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>();
  std::shared_ptr<discovery::SimulatedTransport> dns = std::make_shared<discovery::SimulatedTransport>();
  std::shared_ptr<mapserver::InProcessMapTransport> maps =
      std::make_shared<mapserver::InProcessMapTransport>();
  std::shared_ptr<discovery::DiscoveryClient> disc;
  std::vector<std::shared_ptr<const mapserver::MapService>> services;
  std::vector<Pose> frames;  // map frame -> world
  std::vector<Vec3> world;   // landmark i in the world frame
  net::Endpoint ns{"10.0.0.1", 53};

  explicit Fixture(std::vector<double> perturb = {0.0}) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int i = 0; i < 30; ++i) world.emplace_back(u(rng), u(rng), 0.5 + (i % 5) * 0.5);
    std::vector<geo::ZoneRecord> records;
    for (std::size_t k = 0; k < perturb.size(); ++k) {
      mapserver::MapFile m;
      m.map_id = std::string(1, static_cast<char>('a' + k));
      m.region = {{47.62, -122.35}, {47.62, -122.3486}, {47.621, -122.3486}, {47.621, -122.35}};
      std::normal_distribution<double> n(0, perturb[k] > 0 ? perturb[k] : 1);
      const Pose g = Pose::from_yaw(0.3 * static_cast<double>(k), Vec3(5.0 * k, -3.0 * k, 0));
      frames.push_back(g);
      for (std::size_t i = 0; i < world.size(); ++i) {
        Vec3 local = pose::transform_point(pose::inverse(g), world[i]);
        if (perturb[k] > 0) local += Vec3(n(rng), n(rng), n(rng));
        m.landmarks.push_back({"lm" + std::to_string(i), local});
      }
      m.waypoints.push_back({m.map_id + "/door", Vec3(1, 2, 0), {}});
      auto svc = std::make_shared<const mapserver::MapService>(m);
      services.push_back(svc);
      const std::string url = "https://" + m.map_id + ".maps.example.edu";
      maps->add(url, svc);
      const auto recs = geo::zone_records(cells::SphericalCap(spot, 40), dns::FlameRecord::mcname(url),
                                          cells::CoveringParams::registration_defaults(), "flame.test");
      records.insert(records.end(), recs.begin(), recs.end());
    }
    auto zs = std::make_shared<dns::ZoneSet>();
    zs->add(dns::load_zone(geo::render_zone("flame.test", geo::SoaParams::defaults_for("flame.test"), records)));
    dns->add_server(ns, zs);
    discovery::DiscoveryConfig dc;
    dc.resolvers = {ns};
    dc.max_parallel = 1;
    disc = std::make_shared<discovery::DiscoveryClient>(dc, dns, clock);
  }

  // Every landmark as seen by a device at world pose x.
  mapserver::LocationCues cues(const Pose& x) const {
    mapserver::LocationCues c;
    for (std::size_t i = 0; i < world.size(); ++i) {
      c.observations.push_back({"lm" + std::to_string(i), pose::transform_point(pose::inverse(x), world[i])});
    }
    return c;
  }

  FlameClient client(ClientConfig cfg = {}) {
    cfg.max_parallel = 1;
    return FlameClient(cfg, disc, maps, clock);
  }
};

TEST(FlameClientTest, SingleServerStopsQueryingDns) {
  Fixture f;
  auto c = f.client();
  const Pose v = Pose::from_yaw(1.0, Vec3(100, 0, 0));  // VIO session offset
  for (int i = 0; i < 20; ++i) {
    const Pose x = Pose::from_yaw(0.1 * i, Vec3(0.8 * i, 0.2 * i, 1.5));
    const auto out = c.step({f.spot, 10}, pose::compose(v, x), f.cues(x));
    ASSERT_TRUE(out.active) << i;
    EXPECT_EQ(out.rediscovered, i == 0);
    if (i == 0) {
      EXPECT_GT(out.dns_wire_queries, 0u);
    } else {
      EXPECT_EQ(out.dns_wire_queries, 0u);
      ASSERT_TRUE(out.scores.at(0).ema_error_m);
      EXPECT_LT(*out.scores[0].ema_error_m, 1e-6);
    }
    // device pose in the map frame is G^-1 X
    EXPECT_LT((out.pose_in_map->translation() -
               pose::compose(pose::inverse(f.frames[0]), x).translation()).norm(), 1e-6);
    ASSERT_EQ(out.waypoints_in_app_frame.size(), 1u);
    // the waypoint in the app frame is V G w
    const Vec3 want = pose::transform_point(pose::compose(v, f.frames[0]), Vec3(1, 2, 0));
    EXPECT_LT((out.waypoints_in_app_frame[0].position - want).norm(), 1e-6);
    f.clock->advance(2.0);
  }
}

TEST(FlameClientTest, NoVioPicksMaxConfidence) {
  Fixture f({0.05, 0.0, 0.02});  // "b" is exact
  auto c = f.client();
  const Pose x(Quat::Identity(), Vec3(1, 1, 1.5));
  const auto out = c.step({f.spot, 10}, std::nullopt, f.cues(x));
  ASSERT_TRUE(out.active);
  ASSERT_EQ(out.scores.size(), 3u);
  EXPECT_EQ(out.active->url, "https://b.maps.example.edu");
  for (const auto& s : out.scores) {
    EXPECT_LE(s.confidence, out.scores[1].confidence);
  }
  EXPECT_GT(out.scores[1].confidence, out.scores[0].confidence);
  // and the pose is in b's frame
  EXPECT_LT((out.pose_in_map->translation() -
             pose::compose(pose::inverse(f.frames[1]), x).translation()).norm(), 1e-6);
  EXPECT_TRUE(out.waypoints_in_app_frame.empty());  // no VIO, no app frame
}

TEST(FlameClientTest, TransportErrorTriggersRediscovery) {
  Fixture f;
  auto c = f.client();
  const Pose x(Quat::Identity(), Vec3(0, 0, 1.5));
  EXPECT_TRUE(c.step({f.spot, 10}, x, f.cues(x)).rediscovered);
  f.clock->advance(2);
  EXPECT_FALSE(c.step({f.spot, 10}, x, f.cues(x)).rediscovered);
  // server disappears
  f.maps->add("https://a.maps.example.edu", nullptr);
  f.clock->advance(2);
  const auto lost = c.step({f.spot, 10}, x, f.cues(x));
  EXPECT_FALSE(lost.rediscovered);
  EXPECT_FALSE(lost.active);
  EXPECT_FALSE(lost.scores.at(0).ok);
  f.clock->advance(2);
  const auto next = c.step({f.spot, 10}, x, f.cues(x));
  EXPECT_TRUE(next.rediscovered);
  EXPECT_FALSE(next.active);
}

TEST(FlameClientTest, CapabilityMismatchSkipsServer) {
  Fixture f;
  ClientConfig cfg;
  cfg.cue_types = {"image/jpeg"};
  auto c = f.client(cfg);
  const Pose x(Quat::Identity(), Vec3(0, 0, 1.5));
  const auto out = c.step({f.spot, 10}, x, f.cues(x));
  EXPECT_FALSE(out.active);
  EXPECT_TRUE(out.scores.empty());
  EXPECT_FALSE(out.warnings.empty());
}

TEST(FlameClientTest, NoSignalsRediscoversEveryStep) {
  Fixture f({0.0, 0.0});
  ClientConfig cfg;
  cfg.use_confidence = false;
  auto c = f.client(cfg);
  const Pose x(Quat::Identity(), Vec3(0, 0, 1.5));
  for (int i = 0; i < 3; ++i) {
    const auto out = c.step({f.spot, 10}, std::nullopt, f.cues(x));
    EXPECT_TRUE(out.rediscovered);
    ASSERT_TRUE(out.active);
    EXPECT_EQ(out.active->url, "https://a.maps.example.edu");  // first by url
    f.clock->advance(2);
  }
}

TEST(FlameClientTest, DriftingServerIsDropped) {
  // The servers see a moving device as stationary (the cues never change),
  // so their error scores grow with VIO motion and nothing stays acceptable.
  Fixture f({0.0, 0.0});
  auto c = f.client();
  const Pose x0(Quat::Identity(), Vec3(0, 0, 1.5));
  const auto frozen = f.cues(x0);
  int rediscoveries = 0;
  for (int i = 0; i < 12; ++i) {
    const Pose x(Quat::Identity(), Vec3(1.5 * i, 0, 1.5));
    const auto out = c.step({f.spot, 10}, x, frozen);
    rediscoveries += out.rediscovered;
    f.clock->advance(2);
  }
  EXPECT_GE(rediscoveries, 2);
  const auto& ta = c.tracks().at("https://a.maps.example.edu");
  ASSERT_TRUE(ta.ema_error_m);
  EXPECT_GT(*ta.ema_error_m, 1.0);
}

TEST(FlameClientTest, EventLogLine) {
  Fixture f;
  auto c = f.client();
  std::vector<nlohmann::json> log;
  c.set_event_sink([&](const nlohmann::json& j) { log.push_back(j); });
  const Pose x(Quat::Identity(), Vec3(0, 0, 1.5));
  c.step({f.spot, 10}, x, f.cues(x));
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0]["step"], 0);
  EXPECT_EQ(log[0]["rediscovered"], true);
  EXPECT_EQ(log[0]["active"], "https://a.maps.example.edu");
  EXPECT_GT(log[0]["dns"]["wire_queries"].get<int>(), 0);
  EXPECT_GT(log[0]["timing"]["total_s"].get<double>(), 0);
}

}  // namespace
}  // namespace flame::client
