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

#include "flame/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "flame/errors.hpp"

namespace flame::sim {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
// 95% radius of a circular 2-D Gaussian in units of sigma: sqrt(chi2_2(0.95)).
constexpr double kRadius95 = 2.447746830680816;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > y) != (b.y() > y) &&
        x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    a += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  }
  return std::abs(a) / 2;
}

nlohmann::json vec2_json(const Vec2& v) { return {v.x(), v.y()}; }

Vec2 vec2_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected [x, y], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

pose::Vec3 vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) {
    throw ValidationError("expected [x, y, z], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
}

// {"q": [w,x,y,z], "t": [...]} or the shorter {"yaw_deg": a, "t": [...]}.
pose::Pose pose_from(const nlohmann::json& j) {
  if (j.contains("yaw_deg")) {
    return pose::Pose::from_yaw(j.at("yaw_deg").get<double>() / kDeg,
                                vec3_from(j.value("t", nlohmann::json::array({0, 0, 0}))));
  }
  return pose::Pose::from_json(j);
}

}  // namespace

cells::LatLng LocalFrame::to_latlng(const Vec2& en) const {
  const double r = cells::kEarthRadiusMeters;
  return {origin_.lat() + kDeg * en.y() / r,
          origin_.lng() + kDeg * en.x() / (r * std::cos(origin_.lat_radians()))};
}

Vec2 LocalFrame::to_local(const cells::LatLng& ll) const {
  const double r = cells::kEarthRadiusMeters;
  return {(ll.lng() - origin_.lng()) / kDeg * r * std::cos(origin_.lat_radians()),
          (ll.lat() - origin_.lat()) / kDeg * r};
}

void WorldSpec::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("world: " + what);
  };
  need(steps > 0, "steps must be positive");
  need(step_s > 0 && speed_mps >= 0, "step_s must be positive and speed_mps non-negative");
  need(route.size() >= 2, "route needs at least two points");
  need(coarse.outdoor_min_m > 0 && coarse.outdoor_min_m <= coarse.outdoor_max_m &&
           coarse.indoor_min_m > 0 && coarse.indoor_min_m <= coarse.indoor_max_m,
       "coarse radius bands must satisfy 0 < min <= max");
  need(coarse.fix_interval_s >= 0, "fix_interval_s must be non-negative");
  need(r_vis_m > 0 && obs_noise_m >= 0, "r_vis_m must be positive, obs_noise_m non-negative");
  need(nameservers >= 1, "need at least one nameserver");
  need(network == "simulated" || network == "loopback", "network must be simulated or loopback");
  need(warmup_steps >= 0, "warmup_steps must be non-negative");
  need(!maps.empty(), "no maps");
  std::set<std::string> ids;
  for (const MapSpec& m : maps) {
    need(!m.map_id.empty() && ids.insert(m.map_id).second, "map ids must be unique and non-empty");
    need(m.region.size() >= 3, m.map_id + ": region needs at least three vertices");
    need(m.nameserver >= 0 && m.nameserver < nameservers, m.map_id + ": nameserver out of range");
    need(m.landmark_density > 0, m.map_id + ": landmark_density must be positive");
  }
}

nlohmann::json WorldSpec::to_json() const {
  nlohmann::json jm = nlohmann::json::array();
  for (const MapSpec& m : maps) {
    nlohmann::json region = nlohmann::json::array();
    for (const Vec2& v : m.region) region.push_back(vec2_json(v));
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& w : m.waypoints) {
      wps.push_back({{"name", w.name}, {"position", {w.position.x(), w.position.y(), w.position.z()}}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : m.edges) edges.push_back({a, b});
    jm.push_back({{"map_id", m.map_id}, {"url", m.url}, {"frame", m.frame.to_json()},
                  {"region", region}, {"nameserver", m.nameserver},
                  {"landmark_density", m.landmark_density}, {"waypoints", wps}, {"edges", edges}});
  }
  nlohmann::json route_j = nlohmann::json::array();
  for (const Vec2& v : route) route_j.push_back(vec2_json(v));
  return {
      {"name", name},
      {"rng_seed", rng_seed},
      {"origin", {origin.lat(), origin.lng()}},
      {"steps", steps},
      {"step_s", step_s},
      {"speed_mps", speed_mps},
      {"device_height_m", device_height_m},
      {"route", route_j},
      {"coarse",
       {{"outdoor_radius_m", {coarse.outdoor_min_m, coarse.outdoor_max_m}},
        {"indoor_radius_m", {coarse.indoor_min_m, coarse.indoor_max_m}},
        {"fix_interval_s", coarse.fix_interval_s}}},
      {"r_vis_m", r_vis_m},
      {"obs_noise_m", obs_noise_m},
      {"occlusion", occlusion},
      {"vio", {{"offset", vio.offset.to_json()}, {"drift_per_m", vio.drift_per_m}}},
      {"maps", jm},
      {"nameservers", nameservers},
      {"network", network},
      {"dns_latency_s", dns_latency_s},
      {"map_latency_s", map_latency_s},
      {"record_ttl", record_ttl},
      {"soa_minimum", soa_minimum},
      {"suffix", suffix},
      {"error_threshold_m", error_threshold_m},
      {"confidence_threshold", confidence_threshold},
      {"ema_alpha", ema_alpha},
      {"warmup_steps", warmup_steps},
  };
}

WorldSpec WorldSpec::from_json(const nlohmann::json& j) {
  WorldSpec w;
  try {
    w.name = j.value("name", w.name);
    w.rng_seed = j.value("rng_seed", w.rng_seed);
    if (j.contains("origin")) {
      const auto& o = j.at("origin");
      w.origin = cells::LatLng(o.at(0).get<double>(), o.at(1).get<double>());
    }
    w.steps = j.value("steps", w.steps);
    w.step_s = j.value("step_s", w.step_s);
    w.speed_mps = j.value("speed_mps", w.speed_mps);
    w.device_height_m = j.value("device_height_m", w.device_height_m);
    for (const auto& p : j.at("route")) w.route.push_back(vec2_from(p));
    if (j.contains("coarse")) {
      const auto& c = j.at("coarse");
      if (c.contains("outdoor_radius_m")) {
        w.coarse.outdoor_min_m = c["outdoor_radius_m"].at(0);
        w.coarse.outdoor_max_m = c["outdoor_radius_m"].at(1);
      }
      if (c.contains("indoor_radius_m")) {
        w.coarse.indoor_min_m = c["indoor_radius_m"].at(0);
        w.coarse.indoor_max_m = c["indoor_radius_m"].at(1);
      }
      w.coarse.fix_interval_s = c.value("fix_interval_s", w.coarse.fix_interval_s);
    }
    w.r_vis_m = j.value("r_vis_m", w.r_vis_m);
    w.obs_noise_m = j.value("obs_noise_m", w.obs_noise_m);
    w.occlusion = j.value("occlusion", w.occlusion);
    if (j.contains("vio")) {
      const auto& v = j.at("vio");
      if (v.contains("offset")) w.vio.offset = pose_from(v.at("offset"));
      w.vio.drift_per_m = v.value("drift_per_m", 0.0);
    }
    for (const auto& jm : j.at("maps")) {
      MapSpec m;
      m.map_id = jm.at("map_id").get<std::string>();
      m.url = jm.value("url", "https://" + m.map_id + ".maps.example.edu");
      if (jm.contains("frame")) m.frame = pose_from(jm.at("frame"));
      for (const auto& p : jm.at("region")) m.region.push_back(vec2_from(p));
      m.nameserver = jm.value("nameserver", 0);
      m.landmark_density = jm.value("landmark_density", m.landmark_density);
      for (const auto& wp : jm.value("waypoints", nlohmann::json::array())) {
        m.waypoints.push_back({wp.at("name").get<std::string>(), vec3_from(wp.at("position"))});
      }
      for (const auto& e : jm.value("edges", nlohmann::json::array())) {
        m.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      }
      w.maps.push_back(std::move(m));
    }
    w.nameservers = j.value("nameservers", w.nameservers);
    w.network = j.value("network", w.network);
    w.dns_latency_s = j.value("dns_latency_s", w.dns_latency_s);
    w.map_latency_s = j.value("map_latency_s", w.map_latency_s);
    w.record_ttl = j.value("record_ttl", w.record_ttl);
    w.soa_minimum = j.value("soa_minimum", w.soa_minimum);
    w.suffix = j.value("suffix", w.suffix);
    w.error_threshold_m = j.value("error_threshold_m", w.error_threshold_m);
    w.confidence_threshold = j.value("confidence_threshold", w.confidence_threshold);
    w.ema_alpha = j.value("ema_alpha", w.ema_alpha);
    w.warmup_steps = j.value("warmup_steps", w.warmup_steps);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("world: ") + e.what());
  }
  w.validate();
  return w;
}

WorldSpec load_world_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), static_cast<int>(e.byte));
  }
  return WorldSpec::from_json(j);
}

World::World(WorldSpec spec) : spec_(std::move(spec)), frame_(spec_.origin) {
  spec_.validate();
  for (std::size_t m = 0; m < spec_.maps.size(); ++m) {
    const MapSpec& ms = spec_.maps[m];
    mapserver::MapFile mf;
    mf.map_id = ms.map_id;
    mf.frame_note = "simulated";
    for (const Vec2& v : ms.region) mf.region.push_back(frame_.to_latlng(v));
    const pose::Pose to_map = pose::inverse(ms.frame);

    auto rng = stream(spec_.rng_seed, 1, m);
    double lo_x = ms.region[0].x(), hi_x = lo_x, lo_y = ms.region[0].y(), hi_y = lo_y;
    for (const Vec2& v : ms.region) {
      lo_x = std::min(lo_x, v.x());
      hi_x = std::max(hi_x, v.x());
      lo_y = std::min(lo_y, v.y());
      hi_y = std::max(hi_y, v.y());
    }
    std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y), uz(0.3, 3.0);
    const auto count =
        static_cast<std::size_t>(std::lround(polygon_area(ms.region) * ms.landmark_density));
    std::vector<pose::Vec3> world;
    while (world.size() < count) {
      const double x = ux(rng), y = uy(rng), z = uz(rng);
      if (!point_in_polygon(ms.region, x, y)) continue;
      world.emplace_back(x, y, z);
      mf.landmarks.push_back({ms.map_id + "/lm" + std::to_string(world.size() - 1),
                              pose::transform_point(to_map, world.back())});
    }
    for (const WaypointSpec& w : ms.waypoints) {
      mf.waypoints.push_back({w.name, pose::transform_point(to_map, w.position), {}});
    }
    mf.edges = ms.edges;
    mf.validate();
    maps_.push_back(std::move(mf));
    world_lm_.push_back(std::move(world));
  }

  cumulative_.push_back(0);
  for (std::size_t i = 0; i < spec_.route.size(); ++i) {
    const Vec2& a = spec_.route[i];
    const Vec2& b = spec_.route[(i + 1) % spec_.route.size()];
    cumulative_.push_back(cumulative_.back() + (b - a).norm());
  }
  route_length_ = cumulative_.back();
  if (!(route_length_ > 0)) throw ValidationError("world: route has zero length");

  auto coarse_rng = stream(spec_.rng_seed, 2);
  auto drift_rng = stream(spec_.rng_seed, 3);
  const double drift_angle = std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(drift_rng);
  const pose::Vec3 drift_dir(std::cos(drift_angle), std::sin(drift_angle), 0);
  std::optional<double> last_fix;
  geo::CoarseLocation fix;
  for (int k = 0; k < spec_.steps; ++k) {
    StepTruth st;
    st.t = k * spec_.step_s;
    st.traveled_m = spec_.speed_mps * st.t;
    st.x = device_pose_at_distance(st.traveled_m);
    const pose::Pose drift(pose::Quat::Identity(), drift_dir * spec_.vio.drift_per_m * st.traveled_m);
    st.vio = pose::compose(spec_.vio.offset, pose::compose(drift, st.x));
    for (std::size_t m = 0; m < maps_.size(); ++m) st.indoor |= inside(m, st.x.translation());
    if (!last_fix || spec_.coarse.fix_interval_s == 0 ||
        st.t - *last_fix >= spec_.coarse.fix_interval_s - 1e-9) {
      const double lo = st.indoor ? spec_.coarse.indoor_min_m : spec_.coarse.outdoor_min_m;
      const double hi = st.indoor ? spec_.coarse.indoor_max_m : spec_.coarse.outdoor_max_m;
      const double r = std::uniform_real_distribution<double>(lo, hi)(coarse_rng);
      std::normal_distribution<double> n(0, r / kRadius95);
      const double de = n(coarse_rng);
      const double dn = n(coarse_rng);
      const Vec2 center(st.x.translation().x() + de, st.x.translation().y() + dn);
      fix = {frame_.to_latlng(center), r};
      last_fix = st.t;
    }
    st.coarse = fix;
    steps_.push_back(st);
  }
}

pose::Pose World::device_pose_at_distance(double s) const {
  s = std::fmod(s, route_length_);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = std::min<std::size_t>(it - cumulative_.begin() - 1, spec_.route.size() - 1);
  const Vec2& a = spec_.route[i];
  const Vec2& b = spec_.route[(i + 1) % spec_.route.size()];
  const double len = cumulative_[i + 1] - cumulative_[i];
  const Vec2 p = len > 0 ? Vec2(a + (b - a) * ((s - cumulative_[i]) / len)) : a;
  const double yaw = std::atan2(b.y() - a.y(), b.x() - a.x());
  return pose::Pose::from_yaw(yaw, pose::Vec3(p.x(), p.y(), spec_.device_height_m));
}

bool World::inside(std::size_t m, const pose::Vec3& p) const {
  return point_in_polygon(spec_.maps.at(m).region, p.x(), p.y());
}

std::vector<std::size_t> World::visible_landmarks(std::size_t m, const pose::Pose& x) const {
  std::vector<std::size_t> out;
  if (spec_.occlusion && !inside(m, x.translation())) return out;
  const auto& lm = world_lm_.at(m);
  for (std::size_t i = 0; i < lm.size(); ++i) {
    if ((lm[i] - x.translation()).norm() <= spec_.r_vis_m) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> World::best_map(const pose::Pose& x) const {
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t m = 0; m < maps_.size(); ++m) {
    if (!inside(m, x.translation())) continue;
    const std::size_t n = visible_landmarks(m, x).size();
    if (!best || n > best_count || (n == best_count && maps_[m].map_id < maps_[*best].map_id)) {
      best = m;
      best_count = n;
    }
  }
  return best;
}

mapserver::LocationCues synthesize_cues(const World& world, std::size_t step, std::size_t m,
                                        bool noise) {
  const StepTruth& st = world.steps().at(step);
  const pose::Pose to_device = pose::inverse(st.x);
  const double sigma = noise ? world.spec().obs_noise_m : 0;
  auto rng = stream(world.spec().rng_seed, 1000 + step, m);
  std::normal_distribution<double> n(0, 1);
  mapserver::LocationCues cues;
  cues.timestamp = st.t;
  const auto& lm = world.landmarks_world(m);
  for (const std::size_t i : world.visible_landmarks(m, st.x)) {
    pose::Vec3 p = pose::transform_point(to_device, lm[i]);
    if (sigma > 0) p += pose::Vec3(n(rng), n(rng), n(rng)) * sigma;
    cues.observations.push_back({world.maps()[m].landmarks[i].id, p});
  }
  return cues;
}

mapserver::LocationCues synthesize_all_cues(const World& world, std::size_t step, bool noise) {
  mapserver::LocationCues all;
  all.timestamp = world.steps().at(step).t;
  for (std::size_t m = 0; m < world.maps().size(); ++m) {
    auto c = synthesize_cues(world, step, m, noise);
    all.observations.insert(all.observations.end(), c.observations.begin(), c.observations.end());
  }
  return all;
}

std::vector<std::string> export_maps(const World& world, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& m : world.maps()) {
    paths.push_back((std::filesystem::path(dir) / (m.map_id + ".json")).string());
    mapserver::save_map_file(m, paths.back());
  }
  return paths;
}

}  // namespace flame::sim
