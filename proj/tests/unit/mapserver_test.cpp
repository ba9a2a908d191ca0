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

#include <algorithm>
#include <chrono>
#include <future>
#include <random>

#include <gtest/gtest.h>

#include "flame/errors.hpp"
#include "flame/mapserver/map_file.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/mapserver/service.hpp"

namespace flame::mapserver {
namespace {

using pose::Pose;
using pose::Quat;
using pose::Vec3;

MapFile test_map(int landmarks = 40) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 30);
  std::uniform_real_distribution<double> h(0, 3);
  MapFile m;
  m.map_id = "bldg-a";
  m.frame_note = "origin at the north-west corner";
  m.region = {{37.0, -122.0}, {37.0, -121.9996}, {37.0003, -121.9996}, {37.0003, -122.0}};
  for (int i = 0; i < landmarks; ++i) {
    m.landmarks.push_back({"lm-a-" + std::to_string(i), Vec3(u(rng), u(rng), h(rng))});
  }
  for (int i = 0; i < 5; ++i) {
    m.waypoints.push_back({"bldg-a/wp-" + std::to_string(i), Vec3(5.0 * i + 0.1, 2.0 / 3.0, 0), {{"floor", "1"}}});
  }
  for (int i = 0; i < 4; ++i) m.edges.emplace_back(m.waypoints[i].name, m.waypoints[i + 1].name);
  return m;
}

// Observations of the `n` landmarks nearest to the device at `x` (device pose
// in the map frame).
LocationCues observe(const MapFile& m, const Pose& x, int n, double sigma, std::mt19937_64& rng) {
  std::vector<const Landmark*> ls;
  for (const auto& l : m.landmarks) ls.push_back(&l);
  std::sort(ls.begin(), ls.end(), [&](auto* a, auto* b) {
    return (a->position - x.translation()).norm() < (b->position - x.translation()).norm();
  });
  std::normal_distribution<double> noise(0, sigma);
  LocationCues c;
  const Pose inv = pose::inverse(x);
  for (int i = 0; i < n && i < static_cast<int>(ls.size()); ++i) {
    Vec3 p = pose::transform_point(inv, ls[i]->position);
    if (sigma > 0) p += Vec3(noise(rng), noise(rng), noise(rng));
    c.observations.push_back({ls[i]->id, p});
  }
  return c;
}

Pose random_device(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(5, 25);
  std::uniform_real_distribution<double> yaw(-M_PI, M_PI);
  return Pose::from_yaw(yaw(rng), Vec3(u(rng), u(rng), 1.5));
}

TEST(MapFileTest, JsonRoundtripAndValidation) {
  const MapFile m = test_map();
  const MapFile back = MapFile::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.to_json(), m.to_json());

  auto j = m.to_json();
  j["landmarks"].push_back(j["landmarks"][0]);
  EXPECT_THROW(MapFile::from_json(j), ValidationError);
  j = m.to_json();
  j["edges"].push_back({"bldg-a/wp-0", "nowhere"});
  EXPECT_THROW(MapFile::from_json(j), ValidationError);
  j = m.to_json();
  j["landmarks"] = nlohmann::json::array({j["landmarks"][0], j["landmarks"][1]});
  EXPECT_THROW(MapFile::from_json(j), ValidationError);
  j = m.to_json();
  j.erase("map_id");
  EXPECT_THROW(MapFile::from_json(j), ValidationError);
  j = m.to_json();
  j["region"] = nlohmann::json::array({{37, -122}, {37.1, -122}});
  EXPECT_THROW(MapFile::from_json(j), ValidationError);
}

TEST(LocalizeTest, NoiselessRecoversPose) {
  const MapFile m = test_map();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Pose x = random_device(rng);
    const auto r = localize(observe(m, x, 8, 0, rng), m);
    ASSERT_TRUE(r.ok);
    EXPECT_EQ(r.matched_count, 8);
    EXPECT_LT((r.pose.translation() - x.translation()).norm(), 1e-6);
    EXPECT_LT(pose::rotation_angle(r.pose.rotation(), x.rotation()), 1e-6);
    EXPECT_GT(r.confidence, 0.99);
  }
}

TEST(LocalizeTest, DisjointIdsFail) {
  const MapFile m = test_map();
  LocationCues c;
  for (int i = 0; i < 5; ++i) c.observations.push_back({"lm-b-" + std::to_string(i), Vec3(i, i * i, 1)});
  const auto r = localize(c, m);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.error_code, "insufficient_matches");
  EXPECT_EQ(r.confidence, 0);
  EXPECT_EQ(r.matched_count, 0);
}

TEST(LocalizeTest, RepeatedIdsCountOnce) {
  const MapFile m = test_map();
  std::mt19937_64 rng(2);
  auto c = observe(m, random_device(rng), 3, 0, rng);
  c.observations.push_back(c.observations[0]);
  c.observations.push_back(c.observations[1]);
  const auto r = localize(c, m);
  EXPECT_EQ(r.matched_count, 3);
  EXPECT_LE(r.matched_count, static_cast<int>(c.observations.size()));
}

TEST(LocalizeTest, NoisyAccuracy) {
  const MapFile m = test_map();
  std::vector<double> terr, rmsd;
  for (int seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    const Pose x = random_device(rng);
    const auto r = localize(observe(m, x, 10, 0.01, rng), m);
    ASSERT_TRUE(r.ok);
    terr.push_back((r.pose.translation() - x.translation()).norm());
    rmsd.push_back(r.rmsd_m);
  }
  std::sort(terr.begin(), terr.end());
  std::sort(rmsd.begin(), rmsd.end());
  EXPECT_LE(terr[250], 0.02);
  EXPECT_GT(rmsd[250], 0.01);
  EXPECT_LT(rmsd[250], 0.025);
}

TEST(LocalizeTest, ConfidenceDecreasesWithNoise) {
  const MapFile m = test_map();
  double prev = 2;
  for (const double sigma : {0.0, 0.01, 0.05, 0.20}) {
    double sum = 0;
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      sum += localize(observe(m, random_device(rng), 10, sigma, rng), m).confidence;
    }
    EXPECT_LT(sum / 100, prev) << "sigma " << sigma;
    prev = sum / 100;
  }
}

TEST(CapabilitiesTest, ContentsAndNegotiation) {
  const auto c = capabilities(test_map());
  EXPECT_EQ(c.cue_types, std::vector<std::string>{"landmark-observations/v1"});
  EXPECT_TRUE(c.waypoints);
  EXPECT_EQ(c.protocol, 1);
  EXPECT_FALSE(c.supports_any({"image/jpeg"}));
  EXPECT_TRUE(c.supports_any({"image/jpeg", "landmark-observations/v1"}));
}

void expect_no_landmarks(const std::string& body, const MapFile& m) {
  EXPECT_EQ(body.find("landmark\""), std::string::npos);
  for (const auto& l : m.landmarks) EXPECT_EQ(body.find(l.id), std::string::npos) << body;
}

TEST(ServiceTest, Routes) {
  const MapService svc(test_map());
  const auto caps = svc.handle("GET", "/capabilities", "");
  EXPECT_EQ(caps.status, 200);
  EXPECT_EQ(svc.handle("GET", "/capabilities", "").body, caps.body);  // byte identical
  EXPECT_EQ(nlohmann::json::parse(caps.body)["v"], 1);

  const auto wps = svc.handle("GET", "/waypoints", "");
  const auto g = WaypointGraph::from_json(nlohmann::json::parse(wps.body));
  EXPECT_EQ(g.waypoints.size(), 5u);
  EXPECT_EQ(g.edges.size(), 4u);
  for (std::size_t i = 0; i < g.waypoints.size(); ++i) {
    EXPECT_LT((g.waypoints[i].position - svc.map().waypoints[i].position).norm(), 1e-9);
  }
  EXPECT_EQ(svc.handle("GET", "/campus/waypoints", "").body, wps.body);  // mount prefix

  const auto bad = svc.handle("POST", "/localize", "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad.body)["error"]["code"], "bad_json");
  EXPECT_EQ(svc.handle("POST", "/localize", R"({"v":2,"observations":[]})").status, 400);
  EXPECT_EQ(svc.handle("GET", "/localize", "").status, 405);
  const auto nf = svc.handle("GET", "/landmarks", "");
  EXPECT_EQ(nf.status, 404);
  EXPECT_EQ(nlohmann::json::parse(nf.body)["error"]["code"], "not_found");

  std::mt19937_64 rng(3);
  const std::string req = observe(svc.map(), random_device(rng), 6, 0.01, rng).to_json().dump();
  const auto loc = svc.handle("POST", "/localize", req);
  EXPECT_EQ(loc.status, 200);
  EXPECT_EQ(svc.handle("POST", "/localize", req).body, loc.body);  // stateless
  const auto fail = svc.handle("POST", "/localize", R"({"v":1,"observations":[]})");
  EXPECT_EQ(fail.status, 422);
  EXPECT_EQ(nlohmann::json::parse(fail.body)["error"]["code"], "insufficient_matches");

  for (const auto* b : {&caps, &wps, &bad, &nf, &loc, &fail}) expect_no_landmarks(b->body, svc.map());
}

TEST(MapServerTest, HttpRoundTrip) {
  auto svc = std::make_shared<const MapService>(test_map());
  MapServer server(svc, {"127.0.0.1", 0});
  RemoteMap remote(std::make_shared<HttpMapTransport>(), server.base_url());
  EXPECT_EQ(remote.capabilities().map_id, "bldg-a");
  std::mt19937_64 rng(4);
  const Pose x = random_device(rng);
  const auto cues = observe(svc->map(), x, 10, 0, rng);
  remote.localize(cues);  // warm up the connection path
  double latency = 0;
  const auto start = std::chrono::steady_clock::now();
  const auto r = remote.localize(cues, &latency);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_TRUE(r.ok);
  EXPECT_LT((r.pose.translation() - x.translation()).norm(), 1e-6);
  EXPECT_LT(wall, 0.05);
  EXPECT_FALSE(remote.localize(LocationCues{}).ok);
  EXPECT_EQ(remote.waypoints().waypoints.size(), 5u);
  RemoteMap prefixed(std::make_shared<HttpMapTransport>(), server.base_url() + "/campus/");
  EXPECT_EQ(prefixed.capabilities().map_id, "bldg-a");
}

TEST(MapServerTest, ConcurrentVirtualUsers) {
  auto svc = std::make_shared<const MapService>(test_map());
  MapServer server(svc, {"127.0.0.1", 0});
  auto transport = std::make_shared<HttpMapTransport>();
  std::vector<std::future<int>> users;
  for (int u = 0; u < 50; ++u) {
    users.push_back(std::async(std::launch::async, [&, u] {
      std::mt19937_64 rng(u);
      RemoteMap remote(transport, server.base_url());
      int ok = 0;
      for (int k = 0; k < 4; ++k) {
        const Pose x = random_device(rng);
        const auto r = remote.localize(observe(svc->map(), x, 10, 0, rng));
        if (r.ok && (r.pose.translation() - x.translation()).norm() < 1e-6) ++ok;
      }
      return ok;
    }));
  }
  int total = 0;
  for (auto& f : users) total += f.get();
  EXPECT_EQ(total, 200);
}

TEST(MapServerTest, BindFailureAndRefused) {
  auto svc = std::make_shared<const MapService>(test_map());
  MapServer a(svc, {"127.0.0.1", 0});
  EXPECT_THROW(MapServer(svc, a.endpoint()), TransportError);
  const std::string url = a.base_url();
  a.stop();
  RemoteMap remote(std::make_shared<HttpMapTransport>(std::chrono::milliseconds(300)), url);
  EXPECT_THROW(remote.capabilities(), TransportError);
}

}  // namespace
}  // namespace flame::mapserver
