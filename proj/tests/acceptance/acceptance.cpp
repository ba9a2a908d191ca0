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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).
//
//   flame_acceptance [ids...] [--load-seconds N] [--report out.json]

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "flame/cells/coverer.hpp"
#include "flame/cells/region.hpp"
#include "flame/client/client.hpp"
#include "flame/clock.hpp"
#include "flame/discovery/client.hpp"
#include "flame/discovery/transport.hpp"
#include "flame/dns/message.hpp"
#include "flame/dns/nameserver.hpp"
#include "flame/dns/zone.hpp"
#include "flame/errors.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/geo/zone_records.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/mapserver/service.hpp"
#include "flame/nav/navgraph.hpp"
#include "flame/net/udp.hpp"
#include "flame/pose/pose.hpp"
#include "flame/sim/harness.hpp"
#include "flame/sim/world.hpp"

namespace {

using namespace flame;
using Steady = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

double seconds_since(Steady::time_point t0) {
  return std::chrono::duration<double>(Steady::now() - t0).count();
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) - 1;
  return v[std::min(k, v.size() - 1)];
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

pose::Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  pose::Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

pose::Vec3 random_vec(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  return {u(rng), u(rng), u(rng)};
}

// ---------------------------------------------------------------- 1

Outcome grammar() {
  Outcome o;
  const auto d = geo::GeoDomain::parse("1.3.5.loc", "loc");
  const std::vector<int> want_path{3, 1};
  const bool forward = d.cell().face() == 5 && d.cell().path() == want_path;
  const auto cell = cells::CellId::from_face_path(5, want_path);
  const bool backward = geo::cell_to_geodomain(cell, "loc").to_string() == "1.3.5.loc";
  std::vector<std::string> parents;
  for (const auto& p : geo::parent_domains(d)) parents.push_back(p.to_string());
  const bool chain = parents == std::vector<std::string>{"3.5.loc", "5.loc"};
  o.pass = forward && backward && chain;
  o.detail = fmt::format("parse={} render={} parents=[{}]", forward, backward,
                         fmt::join(parents, ","));
  o.data = {{"parents", parents}};
  return o;
}

// ---------------------------------------------------------------- 2, 3, 7

struct DefaultRun {
  sim::MetricsReport report;
  double seconds = 0;
  bool deterministic = false;
};

const DefaultRun& default_run() {
  static const DefaultRun run = [] {
    DefaultRun r;
    const auto spec = sim::load_world_spec(FLAME_SCENARIO_DIR "/four_maps.json");
    const auto t0 = Steady::now();
    r.report = sim::run(spec);
    r.seconds = seconds_since(t0);
    r.deterministic = sim::run(spec).to_json() == r.report.to_json();
    return r;
  }();
  return run;
}

Outcome query_stats() {
  const auto& run = default_run();
  const auto& a = run.report.aggregates;
  Outcome o;
  const bool total_ok = a.median_total >= 30 && a.median_total <= 45;
  const bool uncached_ok = a.median_uncached <= 8;
  const bool first_ok = a.first_total > 0 && a.first_uncached == a.first_total;
  const bool time_ok = run.seconds < 30;
  o.pass = total_ok && uncached_ok && first_ok && time_ok && a.conservation_ok &&
           run.report.steps.size() == 500;
  o.detail = fmt::format(
      "steps={} median_total={} (30..45) median_uncached={} (<=8) first={}/{} uncached "
      "conservation={} run={:.2f}s",
      run.report.steps.size(), a.median_total, a.median_uncached, a.first_uncached, a.first_total,
      a.conservation_ok, run.seconds);
  o.data = {{"median_total", a.median_total},
            {"median_uncached", a.median_uncached},
            {"first_total", a.first_total},
            {"first_uncached", a.first_uncached},
            {"seconds", run.seconds}};
  return o;
}

Outcome hit_ratio() {
  const auto& a = default_run().report.aggregates;
  Outcome o;
  o.pass = a.frac_hit_ratio_ge_0_9 >= 0.8;
  o.detail = fmt::format("share of post-warmup steps with ratio>=0.9 = {:.3f} (>=0.80), mean={:.3f}, "
                         "histogram=[{}]",
                         a.frac_hit_ratio_ge_0_9, a.mean_hit_ratio,
                         fmt::join(a.hit_ratio_histogram, ","));
  o.data = {{"frac_ge_0_9", a.frac_hit_ratio_ge_0_9},
            {"mean", a.mean_hit_ratio},
            {"histogram", a.hit_ratio_histogram}};
  return o;
}

Outcome selection() {
  const auto& run = default_run();
  const auto& a = run.report.aggregates;
  Outcome o;
  const bool acc_ok = a.selection_accuracy >= 0.9;
  const bool lag_ok = !a.crossings.empty() && a.max_crossing_lag >= 0 && a.max_crossing_lag <= 3;
  const bool spurious_ok = a.spurious_rediscoveries == 0;
  o.pass = acc_ok && lag_ok && spurious_ok && run.deterministic;
  o.detail = fmt::format(
      "accuracy={:.4f} ({}/{}) crossings={} max_lag={} (<=3) spurious={} rediscoveries={} "
      "deterministic={}",
      a.selection_accuracy, a.selection_correct, a.selection_steps, a.crossings.size(),
      a.max_crossing_lag, a.spurious_rediscoveries, a.rediscoveries, run.deterministic);
  o.data = {{"accuracy", a.selection_accuracy},
            {"crossings", a.crossings.size()},
            {"max_lag", a.max_crossing_lag},
            {"spurious", a.spurious_rediscoveries}};
  return o;
}

// ---------------------------------------------------------------- 4

// Local tangent offsets (east, north) in meters around a centre.
cells::LatLng offset(const cells::LatLng& c, double east, double north) {
  constexpr double kR = cells::kEarthRadiusMeters;
  const double dlat = north / kR * 180 / std::numbers::pi;
  const double dlng = east / (kR * std::cos(c.lat_radians())) * 180 / std::numbers::pi;
  return {c.lat() + dlat, c.lng() + dlng};
}

Outcome soundness() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> lat(-70, 70), lng(-180, 180), unit(0, 1);
  const double radii[] = {5, 10, 30, 100};
  const std::string url = "https://registered.maps.example";
  int found = 0, polygons = 0;
  std::vector<std::string> misses;
  for (int i = 0; i < 500; ++i) {
    const cells::LatLng centre(lat(rng), lng(rng));
    std::unique_ptr<cells::Region> region;
    std::function<cells::LatLng()> interior;
    if (i % 2 == 0) {
      // one vertex per quadrant keeps the centre inside and the ring simple
      std::vector<double> ang(4);
      for (int k = 0; k < 4; ++k) ang[k] = (k + 0.2 + 0.6 * unit(rng)) * std::numbers::pi / 2;
      std::vector<cells::LatLng> ring;
      for (double a : ang) {
        const double r = 10 + unit(rng) * 190;
        ring.push_back(offset(centre, r * std::cos(a), r * std::sin(a)));
      }
      try {
        auto poly = std::make_unique<cells::SphericalPolygon>(
            cells::SphericalPolygon::from_ring_any_orientation(ring));
        region = std::move(poly);
      } catch (const DegenerateGeometryError&) {
        --i;
        continue;
      }
      ++polygons;
      interior = [&, c = centre] {
        for (;;) {
          const auto p = offset(c, (unit(rng) - 0.5) * 400, (unit(rng) - 0.5) * 400);
          if (region->contains(p.to_point())) return p;
        }
      };
    } else {
      const double r = 10 + unit(rng) * 190;
      region = std::make_unique<cells::SphericalCap>(centre, r);
      interior = [&, c = centre, r] {
        const double a = unit(rng) * 2 * std::numbers::pi, d = std::sqrt(unit(rng)) * r * 0.999;
        return offset(c, d * std::cos(a), d * std::sin(a));
      };
    }
    const auto records = geo::zone_records(*region, dns::FlameRecord::mcname(url),
                                           cells::CoveringParams::registration_defaults(),
                                           geo::kDefaultSuffix);
    auto zones = std::make_shared<dns::ZoneSet>();
    zones->add(dns::load_zone(geo::render_zone(
        geo::kDefaultSuffix, geo::SoaParams::defaults_for(geo::kDefaultSuffix), records)));
    auto transport = std::make_shared<discovery::SimulatedTransport>();
    const net::Endpoint root{"10.0.0.1", 53};
    transport->add_server(root, zones);
    discovery::DiscoveryConfig cfg;
    cfg.resolvers = {root};
    cfg.max_parallel = 1;
    discovery::DiscoveryClient client(cfg, transport, std::make_shared<ManualClock>());
    const geo::CoarseLocation loc{interior(), radii[i % 4]};
    const auto result = client.discover(loc, geo::QueryConfig{});
    const bool ok = std::any_of(result.descriptors.begin(), result.descriptors.end(),
                                [&](const auto& d) { return d.url == url; });
    if (ok) {
      ++found;
    } else if (misses.size() < 5) {
      misses.push_back(fmt::format("#{} at {:.6f},{:.6f} r={}", i, loc.center.lat(),
                                   loc.center.lng(), loc.error_radius_m));
    }
  }
  Outcome o;
  o.pass = found == 500;
  o.detail = fmt::format("discovered {}/500 ({} polygons, {} caps){}{}", found, polygons,
                         500 - polygons, misses.empty() ? "" : "; misses: ",
                         fmt::join(misses, "; "));
  o.data = {{"found", found}, {"scenarios", 500}};
  return o;
}

// ---------------------------------------------------------------- 5

Outcome negative_caching() {
  struct Case {
    std::uint32_t soa_ttl, minimum;
  };
  Outcome o;
  o.pass = true;
  std::vector<std::string> parts;
  for (const Case c : {Case{3600, 60}, Case{20, 60}}) {
    const std::uint32_t window = std::min(c.soa_ttl, c.minimum);
    geo::SoaParams soa = geo::SoaParams::defaults_for(geo::kDefaultSuffix);
    soa.ttl = c.soa_ttl;
    soa.minimum = c.minimum;
    dns::ZoneSet zs;
    zs.add(dns::load_zone(geo::render_zone(geo::kDefaultSuffix, soa, {})));
    dns::NameserverConfig ns_cfg;
    ns_cfg.listen = {"127.0.0.1", 0};
    dns::Nameserver server(std::move(zs), ns_cfg);

    auto clock = std::make_shared<ManualClock>(1000);
    discovery::DiscoveryConfig cfg;
    cfg.resolvers = {server.endpoint()};
    discovery::DiscoveryClient client(cfg, std::make_shared<discovery::UdpTransport>(), clock);
    const std::string name = "9.9.9.loc." + std::string(geo::kDefaultSuffix);

    // (time offset, expected new wire queries)
    const std::vector<std::pair<double, int>> plan{
        {0, 1}, {1, 0}, {window / 2.0, 0}, {window - 0.001, 0}, {double(window), 1},
        {window + 1.0, 0}};
    std::vector<int> got;
    bool ok = true;
    for (const auto& [dt, want] : plan) {
      clock->set(1000 + dt);
      const auto before = client.wire_queries();
      const auto before_srv = server.stats().nxdomain;
      const auto r = client.resolve_txt(name);
      const int wire = static_cast<int>(client.wire_queries() - before);
      const int srv = static_cast<int>(server.stats().nxdomain - before_srv);
      got.push_back(wire);
      ok = ok && wire == want && srv == want && r.status == discovery::TxtResult::Status::kNxDomain;
    }
    ok = ok && server.stats().queries == 2;
    o.pass = o.pass && ok;
    parts.push_back(fmt::format("SOA ttl={} min={}: window={}s wire per lookup [{}] (want 1,0,0,0,1,0)",
                                c.soa_ttl, c.minimum, window, fmt::join(got, ",")));
  }
  o.detail = fmt::format("{}", fmt::join(parts, "; "));
  return o;
}

// ---------------------------------------------------------------- 6

Outcome kabsch_accuracy() {
  Outcome o;
  double worst_clean_t = 0, worst_clean_r = 0;
  for (int seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(60000 + seed);
    const pose::Pose truth(random_rotation(rng), random_vec(rng, 50));
    std::uniform_int_distribution<int> count(3, 40);
    std::vector<pose::PointPair> pairs(static_cast<std::size_t>(count(rng)));
    for (auto& p : pairs) {
      p.p = random_vec(rng, 10);
      p.q = pose::transform_point(truth, p.p);
    }
    const auto r = pose::kabsch(pairs);
    worst_clean_t = std::max(worst_clean_t, (r.pose.translation() - truth.translation()).norm());
    worst_clean_r = std::max(worst_clean_r, pose::rotation_angle(r.pose.rotation(), truth.rotation()));
  }

  // Localization through the map server's matcher: a room of landmarks,
  // a device at head height, 10..30 visible landmarks with 1 cm noise.
  std::vector<double> t_err, r_err;
  for (int seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(70000 + seed);
    std::uniform_real_distribution<double> u(0, 1);
    mapserver::MapFile map;
    map.map_id = "room";
    map.region = {{0, 0}, {0, 0.0002}, {0.0002, 0.0002}, {0.0002, 0}};
    for (int i = 0; i < 60; ++i) {
      map.landmarks.push_back({fmt::format("lm{}", i),
                               {u(rng) * 20, u(rng) * 20, 0.3 + u(rng) * 2.7}});
    }
    const pose::Pose device = pose::compose(
        pose::Pose(pose::Quat::Identity(), {5 + u(rng) * 10, 5 + u(rng) * 10, 1.5}),
        pose::Pose::from_axis_angle(random_vec(rng, 1).normalized(), 0.2 * u(rng)) );
    const pose::Pose yaw = pose::Pose::from_yaw(u(rng) * 2 * std::numbers::pi);
    const pose::Pose x = pose::compose(device, yaw);
    const pose::Pose to_device = pose::inverse(x);
    std::vector<std::size_t> idx(map.landmarks.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n = 10 + static_cast<int>(u(rng) * 21);
    std::normal_distribution<double> noise(0, 0.01);
    mapserver::LocationCues cues;
    for (int k = 0; k < n; ++k) {
      const auto& lm = map.landmarks[idx[static_cast<std::size_t>(k)]];
      pose::Vec3 p = pose::transform_point(to_device, lm.position);
      p += pose::Vec3(noise(rng), noise(rng), noise(rng));
      cues.observations.push_back({lm.id, p});
    }
    const auto res = mapserver::localize(cues, map);
    if (!res.ok) {
      t_err.push_back(1e9);
      r_err.push_back(180);
      continue;
    }
    t_err.push_back((res.pose.translation() - x.translation()).norm());
    r_err.push_back(pose::rotation_angle(res.pose.rotation(), x.rotation()) * 180 / std::numbers::pi);
  }
  const double mt = median(t_err), mr = median(r_err);
  o.pass = worst_clean_t <= 1e-9 && worst_clean_r <= 1e-9 && mt <= 0.03 && mr <= 1.0;
  o.detail = fmt::format(
      "noiseless worst t={:.2e} m r={:.2e} rad (<=1e-9); 1 cm noise over 500 seeds: median t={:.4f} m "
      "(<=0.03) median r={:.3f} deg (<=1.0)",
      worst_clean_t, worst_clean_r, mt, mr);
  o.data = {{"median_t_m", mt}, {"median_r_deg", mr}, {"clean_t", worst_clean_t}};
  return o;
}

// ---------------------------------------------------------------- 8

Outcome frame_identity() {
  std::mt19937_64 rng(8008);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const pose::Pose p_a(random_rotation(rng), random_vec(rng, 100));
    const pose::Pose p_r(random_rotation(rng), random_vec(rng, 100));
    const pose::Vec3 w_r = random_vec(rng, 50);
    const pose::Vec3 w_a = client::waypoint_to_app_frame(p_a, p_r, w_r);
    const pose::Vec3 lhs = pose::transform_point(pose::inverse(p_a), w_a);
    const pose::Vec3 rhs = pose::transform_point(pose::inverse(p_r), w_r);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = fmt::format("10000 instances, worst |inv(P_A)W_A - inv(P_R)W_R| = {:.2e} m (<=1e-9)", worst);
  o.data = {{"worst", worst}};
  return o;
}

// ---------------------------------------------------------------- 9

struct Best {
  double length = std::numeric_limits<double>::infinity();
  std::vector<std::string> path;
  int ties = 0;
};

// Every simple path, straight from the scenario's world coordinates.
void enumerate(const std::map<std::string, std::map<std::string, double>>& adj,
               const std::string& at, const std::string& goal, std::vector<std::string>& path,
               std::set<std::string>& used, double len, Best& best) {
  if (at == goal) {
    if (len < best.length - 1e-9) {
      best = {len, path, 0};
    } else if (std::abs(len - best.length) <= 1e-9) {
      ++best.ties;
    }
    return;
  }
  for (const auto& [next, w] : adj.at(at)) {
    if (used.count(next)) continue;
    used.insert(next);
    path.push_back(next);
    enumerate(adj, next, goal, path, used, len + w, best);
    path.pop_back();
    used.erase(next);
  }
}

Outcome campus_navigation() {
  const sim::World world(sim::load_world_spec(FLAME_SCENARIO_DIR "/campus3.json"));
  const auto& spec = world.spec();
  std::map<std::string, pose::Vec3> world_pos;
  std::map<std::string, std::map<std::string, double>> adj;
  for (const auto& m : spec.maps) {
    for (const auto& w : m.waypoints) world_pos[w.name] = w.position;
  }
  for (const auto& m : spec.maps) {
    for (const auto& [a, b] : m.edges) {
      const double w = (world_pos.at(a) - world_pos.at(b)).norm();
      adj[a][b] = w;
      adj[b][a] = w;
    }
  }

  std::vector<mapserver::WaypointGraph> graphs;
  for (const auto& m : world.maps()) graphs.push_back(mapserver::waypoint_graph(m));
  const auto g = nav::stitch(graphs);

  int pairs = 0, agree = 0, ambiguous = 0;
  double worst_len = 0;
  std::string first_bad;
  for (const auto& [from, _] : world_pos) {
    for (const auto& [to, __] : world_pos) {
      if (from == to) continue;
      ++pairs;
      Best best;
      std::vector<std::string> path{from};
      std::set<std::string> used{from};
      enumerate(adj, from, to, path, used, 0, best);
      const auto r = nav::route(g, from, to);
      std::vector<std::string> names;
      for (const auto& h : r.hops) names.push_back(h.name);
      const double dl = std::abs(r.length_m - best.length);
      worst_len = std::max(worst_len, dl);
      if (best.ties > 0) ++ambiguous;
      if (r.reachable && dl <= 1e-9 && (best.ties > 0 || names == best.path)) {
        ++agree;
      } else if (first_bad.empty()) {
        first_bad = from + "->" + to;
      }
    }
  }

  // Path positions against ground truth, with each map active in turn.
  const auto main_route = nav::route(g, "eng-entrance", "lib-stacks");
  std::set<std::string> crossed;
  for (const auto& h : main_route.hops) crossed.insert(h.map_id);
  double worst_pos = 0;
  std::set<std::string> checked;
  int deferred = 0;
  for (std::size_t m = 0; m < spec.maps.size(); ++m) {
    const auto& steps = world.steps();
    const auto it = std::find_if(steps.begin(), steps.end(), [&](const sim::StepTruth& s) {
      return world.inside(m, s.x.translation());
    });
    if (it == steps.end()) return {false, "trajectory never enters " + spec.maps[m].map_id};
    const pose::Pose p_r = pose::compose(pose::inverse(spec.maps[m].frame), it->x);
    const pose::Pose app_from_world = pose::compose(it->vio, pose::inverse(it->x));
    for (const auto& pt : nav::path_positions(g, main_route, spec.maps[m].map_id, it->vio, p_r)) {
      if (pt.deferred || !pt.position) {
        ++deferred;
        continue;
      }
      const pose::Vec3 truth = pose::transform_point(app_from_world, world_pos.at(pt.name));
      worst_pos = std::max(worst_pos, (*pt.position - truth).norm());
      checked.insert(pt.name);
    }
  }
  Outcome o;
  o.pass = agree == pairs && crossed.size() == 3 && checked.size() == main_route.hops.size() &&
           worst_pos <= 1e-6;
  o.detail = fmt::format(
      "{}/{} ordered pairs match exhaustive optimum ({} with ties, worst dlen={:.1e}){}; "
      "eng-entrance->lib-stacks {:.3f} m over {} maps; path positions checked {}/{} (deferred {}), "
      "worst error {:.2e} m (<=1e-6)",
      agree, pairs, ambiguous, worst_len, first_bad.empty() ? "" : " first mismatch " + first_bad,
      main_route.length_m, crossed.size(), checked.size(), main_route.hops.size(), deferred,
      worst_pos);
  o.data = {{"pairs", pairs}, {"agree", agree}, {"worst_pos", worst_pos}};
  return o;
}

// ---------------------------------------------------------------- 10

struct LoadResult {
  double rate_target = 0;
  double seconds = 0;
  std::size_t sent = 0;
  std::size_t received = 0;
  std::size_t malformed = 0;
  double achieved_qps = 0;
  double p50_ms = 0, p99_ms = 0, max_ms = 0;
  double max_send_lag_ms = 0;
  double send_elapsed_s = 0;  // first scheduled send to the last actual send
};

struct LoadFixture {
  std::unique_ptr<dns::Nameserver> server;
  std::vector<std::string> names;
  std::vector<dns::DnsMessage> expected;  // id 0
};

LoadFixture load_fixture() {
  LoadFixture f;
  const auto spec = sim::load_world_spec(FLAME_SCENARIO_DIR "/four_maps.json");
  const sim::World world(spec);
  std::vector<geo::ZoneRecord> records;
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    const auto r = geo::zone_records(world.maps()[m].region_polygon(),
                                     dns::FlameRecord::mcname(spec.maps[m].url),
                                     cells::CoveringParams::registration_defaults(), spec.suffix);
    records.insert(records.end(), r.begin(), r.end());
  }
  dns::ZoneSet zs;
  zs.add(dns::load_zone(geo::render_zone(spec.suffix, geo::SoaParams::defaults_for(spec.suffix),
                                         records)));
  // The discovery names of a walk: hits, empty non-terminals and NXDOMAIN.
  std::set<std::string> names;
  for (std::size_t s = 0; s < world.steps().size(); s += 25) {
    for (const auto& d : geo::query_set(world.steps()[s].coarse, geo::QueryConfig{})) {
      names.insert(d.to_string());
    }
  }
  f.names.assign(names.begin(), names.end());
  for (const auto& n : f.names) f.expected.push_back(dns::answer(dns::make_query(n, dns::rtype::kTxt, 0), zs));
  dns::NameserverConfig cfg;
  cfg.listen = {"127.0.0.1", 0};
  f.server = std::make_unique<dns::Nameserver>(std::move(zs), cfg);
  return f;
}

// Open loop: queries go out on a fixed schedule whatever the replies do.
LoadResult drive(const LoadFixture& f, double qps, double seconds) {
  const std::size_t n = static_cast<std::size_t>(qps * seconds);
  if (n > 65536) throw Error("too many queries for distinct ids");
  net::UdpSocket sock;
  sock.bind({"127.0.0.1", 0});
  std::vector<std::vector<std::uint8_t>> wire(n);
  for (std::size_t i = 0; i < n; ++i) {
    wire[i] = dns::encode_message(
        dns::make_query(f.names[i % f.names.size()], dns::rtype::kTxt, static_cast<std::uint16_t>(i)));
  }
  std::vector<std::atomic<std::int64_t>> sent_at(n);
  std::vector<double> latency_ms;
  latency_ms.reserve(n);
  std::atomic<bool> sending_done{false};
  LoadResult r;
  r.rate_target = qps;
  r.seconds = seconds;
  std::vector<char> seen(n, 0);
  std::size_t malformed = 0;

  const auto t0 = Steady::now() + std::chrono::milliseconds(20);
  std::thread receiver([&] {
    Steady::time_point last_activity = Steady::now();
    while (true) {
      auto dg = sock.receive(std::chrono::milliseconds(50));
      if (!dg) {
        if (sending_done && (r.received == n || Steady::now() - last_activity > std::chrono::seconds(2))) break;
        continue;
      }
      const auto now = Steady::now();
      last_activity = now;
      try {
        auto msg = dns::decode_message(dg->data);
        const std::size_t i = msg.id;
        if (i >= n || seen[i]) {
          ++malformed;
          continue;
        }
        seen[i] = 1;
        ++r.received;
        const auto sent = Steady::time_point(Steady::duration(sent_at[i].load()));
        latency_ms.push_back(std::chrono::duration<double, std::milli>(now - sent).count());
        msg.id = 0;
        if (!(msg == f.expected[i % f.names.size()])) ++malformed;
      } catch (const ParseError&) {
        ++malformed;
      }
    }
  });
  const auto ep = f.server->endpoint();
  for (std::size_t i = 0; i < n; ++i) {
    const auto due = t0 + std::chrono::duration_cast<Steady::duration>(
                              std::chrono::duration<double>(static_cast<double>(i) / qps));
    std::this_thread::sleep_until(due);
    const auto now = Steady::now();
    r.max_send_lag_ms =
        std::max(r.max_send_lag_ms, std::chrono::duration<double, std::milli>(now - due).count());
    sent_at[i].store(now.time_since_epoch().count());
    sock.send_to(wire[i], ep);
  }
  const double elapsed = seconds_since(t0);
  sending_done = true;
  receiver.join();
  r.sent = n;
  r.malformed = malformed;
  r.send_elapsed_s = elapsed;
  r.achieved_qps = static_cast<double>(r.received) / std::max(elapsed, seconds);
  r.p50_ms = percentile(latency_ms, 0.50);
  r.p99_ms = percentile(latency_ms, 0.99);
  r.max_ms = latency_ms.empty() ? 0 : *std::max_element(latency_ms.begin(), latency_ms.end());
  return r;
}

double g_load_seconds = 30;

Outcome nameserver_load() {
  auto f = load_fixture();
  drive(f, 500, 1);  // warm-up, not scored
  const auto low = drive(f, 100, std::max(10.0, g_load_seconds / 3));
  const auto high = drive(f, 1000, g_load_seconds);
  const double ratio = low.p99_ms > 0 ? high.p99_ms / low.p99_ms : 0;
  Outcome o;
  // every query answered, and the sender kept to the schedule
  const bool rate_ok = high.received == high.sent && high.send_elapsed_s <= high.seconds + 0.05;
  o.pass = g_load_seconds >= 30 && rate_ok && high.malformed == 0 && low.malformed == 0 &&
           low.received == low.sent && high.p99_ms < 50 && ratio <= 3;
  const auto line = [](const LoadResult& r) {
    return fmt::format("{}qps x {}s: {}/{} answered, sent over {:.3f}s, {:.1f} qps, p50={:.3f} ms p99={:.3f} ms max={:.3f} ms, "
                       "malformed={}",
                       r.rate_target, r.seconds, r.received, r.sent, r.send_elapsed_s, r.achieved_qps, r.p50_ms, r.p99_ms,
                       r.max_ms, r.malformed);
  };
  o.detail = fmt::format("{}; {}; p99 ratio={:.2f} (<=3); {} distinct names", line(high), line(low),
                         ratio, f.names.size());
  o.data = {{"p99_1000_ms", high.p99_ms}, {"p99_100_ms", low.p99_ms}, {"ratio", ratio},
            {"qps", high.achieved_qps}, {"malformed", high.malformed + low.malformed},
            {"seconds", high.seconds}};
  return o;
}

// ---------------------------------------------------------------- 11

Outcome localize_latency() {
  const auto spec = sim::load_world_spec(FLAME_SCENARIO_DIR "/four_maps.json");
  const sim::World world(spec);
  auto service = std::make_shared<const mapserver::MapService>(world.maps()[0]);
  mapserver::MapServer server(service, {"127.0.0.1", 0});
  auto transport = std::make_shared<mapserver::HttpMapTransport>();
  mapserver::RemoteMap remote(transport, server.base_url());
  std::vector<mapserver::LocationCues> cues;
  for (std::size_t s = 0; s < world.steps().size() && cues.size() < 50; ++s) {
    auto c = sim::synthesize_cues(world, s, 0);
    if (c.observations.size() >= 3) cues.push_back(std::move(c));
  }
  if (cues.empty()) return {false, "no step sees the first map"};
  std::vector<double> ms;
  int ok = 0;
  remote.localize(cues[0]);  // connection set-up
  for (int i = 0; i < 500; ++i) {
    const auto t0 = Steady::now();
    const auto r = remote.localize(cues[static_cast<std::size_t>(i) % cues.size()]);
    ms.push_back(seconds_since(t0) * 1000);
    ok += r.ok;
  }
  const double p50 = percentile(ms, 0.5), p99 = percentile(ms, 0.99),
               mx = *std::max_element(ms.begin(), ms.end());

  // Step-time budget in the client event log of a loopback run.
  auto loop_spec = spec;
  loop_spec.network = "loopback";
  loop_spec.steps = 80;
  std::vector<nlohmann::json> events;
  sim::RunOptions opts;
  opts.event_sink = [&](const nlohmann::json& e) { events.push_back(e); };
  sim::run(loop_spec, opts);
  int accounted = 0, consistent = 0;
  double worst_step_s = 0;
  for (const auto& e : events) {
    if (!e.contains("timing")) continue;
    const auto& t = e["timing"];
    ++accounted;
    const double parts = t["discovery_s"].get<double>() + t["capabilities_s"].get<double>() +
                         t["localize_s"].get<double>() + t["waypoints_s"].get<double>();
    // discovery time only on rediscovery steps, and always when the wire was used
    const bool disc = t["discovery_s"].get<double>() > 0;
    const bool redisc = e["rediscovered"].get<bool>();
    const bool wire = e["dns"].value("wire_lookups", 0) > 0;
    if (std::abs(parts - t["total_s"].get<double>()) <= 1e-12 && (!disc || redisc) &&
        (!(redisc && wire) || disc)) {
      ++consistent;
    }
    worst_step_s = std::max(worst_step_s, t["total_s"].get<double>());
  }
  Outcome o;
  o.pass = ok == 500 && mx < 50 && accounted == loop_spec.steps && consistent == accounted;
  o.detail = fmt::format(
      "/localize over loopback HTTP, 500 requests: {} ok, p50={:.2f} ms p99={:.2f} ms max={:.2f} ms "
      "(every one <50); event log: {}/{} steps with timing, {} consistent, slowest step {:.1f} ms",
      ok, p50, p99, mx, accounted, loop_spec.steps, consistent, worst_step_s * 1000);
  o.data = {{"p50_ms", p50}, {"p99_ms", p99}, {"max_ms", mx}, {"slowest_step_ms", worst_step_s * 1000}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  std::set<int> only;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--load-seconds" && i + 1 < argc) {
      g_load_seconds = std::stod(argv[++i]);
    } else if (a == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      only.insert(std::stoi(a));
    }
  }
  const std::vector<Criterion> all{
      {1, "geo-domain grammar", 1, grammar},
      {2, "query-set statistics", 30, query_stats},
      {3, "cache hit ratio", 30, hit_ratio},
      {4, "discovery soundness", 60, soundness},
      {5, "negative caching", 10, negative_caching},
      {6, "Kabsch/localization accuracy", 60, kabsch_accuracy},
      {7, "map selection", 60, selection},
      {8, "waypoint frame identity", 5, frame_identity},
      {9, "cross-map navigation", 10, campus_navigation},
      {10, "nameserver load", 120, nameserver_load},
      {11, "localize latency and step timing", 60, localize_latency},
  };
  int failed = 0;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = Steady::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = seconds_since(t0);
    const bool in_time = s < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << fmt::format("{} [{:>2}] {}: {}{} ({:.2f} s)", pass ? "PASS" : "FAIL", c.id, c.title,
                             o.detail, in_time ? "" : fmt::format(" [over {} s budget]", c.budget_s), s)
              << std::endl;
    results.push_back({{"id", c.id}, {"title", c.title}, {"pass", pass}, {"seconds", s},
                       {"detail", o.detail}, {"data", o.data}});
  }
  std::cout << fmt::format("{} of {} criteria passed", results.size() - failed, results.size())
            << std::endl;
  if (!report_path.empty()) {
    std::FILE* fp = std::fopen(report_path.c_str(), "w");
    if (fp) {
      std::fputs(results.dump(2).c_str(), fp);
      std::fclose(fp);
    }
  }
  return failed;
}
