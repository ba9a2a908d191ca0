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

#ifndef FLAME_SIM_WORLD_HPP_
#define FLAME_SIM_WORLD_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "flame/cells/latlng.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/mapserver/map_file.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/pose/pose.hpp"

namespace flame::sim {

using Vec2 = Eigen::Vector2d;

// Local east/north frame around an origin, meters. Equirectangular, which
// is plenty at campus scale.
class LocalFrame {
 public:
  LocalFrame() = default;
  explicit LocalFrame(cells::LatLng origin) : origin_(origin) {}
  cells::LatLng to_latlng(const Vec2& en) const;
  Vec2 to_local(const cells::LatLng& ll) const;
  const cells::LatLng& origin() const { return origin_; }

 private:
  cells::LatLng origin_;
};

struct WaypointSpec {
  std::string name;
  pose::Vec3 position;  // world frame
};

struct MapSpec {
  std::string map_id;
  std::string url;           // used with the simulated network
  pose::Pose frame;          // map frame -> world (G_m)
  std::vector<Vec2> region;  // world east/north, meters
  int nameserver = 0;        // >0: records live on a delegated server
  double landmark_density = 1.0 / 15;  // per square meter
  std::vector<WaypointSpec> waypoints;
  std::vector<std::pair<std::string, std::string>> edges;
};

struct CoarseModel {
  double outdoor_min_m = 5;
  double outdoor_max_m = 30;
  double indoor_min_m = 15;
  double indoor_max_m = 60;
  // 0: a fresh fix every step; otherwise the last fix is repeated until
  // this much time has passed.
  double fix_interval_s = 0;
};

struct VioModel {
  pose::Pose offset;        // session offset V
  double drift_per_m = 0;   // meters of drift per meter traveled
};

struct WorldSpec {
  std::string name = "world";
  std::uint64_t rng_seed = 1;
  cells::LatLng origin{40.4433, -79.9436};
  int steps = 500;
  double step_s = 2.0;
  double speed_mps = 1.2;
  double device_height_m = 1.5;
  std::vector<Vec2> route;  // closed loop walked from route[0]
  CoarseModel coarse;
  double r_vis_m = 10;
  double obs_noise_m = 0.01;
  bool occlusion = true;  // region boundaries are walls
  VioModel vio;
  std::vector<MapSpec> maps;
  int nameservers = 1;
  std::string network = "simulated";  // or "loopback"
  double dns_latency_s = 0.005;
  double map_latency_s = 0.02;
  std::uint32_t record_ttl = 300;
  std::uint32_t soa_minimum = 60;
  std::string suffix = std::string(geo::kDefaultSuffix);
  double error_threshold_m = 1.0;
  double confidence_threshold = 0.5;
  double ema_alpha = 0.3;
  int warmup_steps = 5;

  void validate() const;
  nlohmann::json to_json() const;
  static WorldSpec from_json(const nlohmann::json& j);
};

WorldSpec load_world_spec(const std::string& path);

struct StepTruth {
  double t = 0;
  pose::Pose x;            // device pose in the world
  pose::Pose vio;          // P_A reported by the device
  double traveled_m = 0;
  geo::CoarseLocation coarse;
  bool indoor = false;
};

class World {
 public:
  explicit World(WorldSpec spec);

  const WorldSpec& spec() const { return spec_; }
  const LocalFrame& frame() const { return frame_; }
  const std::vector<mapserver::MapFile>& maps() const { return maps_; }
  // Landmark positions in the world frame, same order as maps()[m].landmarks.
  const std::vector<pose::Vec3>& landmarks_world(std::size_t m) const { return world_lm_.at(m); }
  const std::vector<StepTruth>& steps() const { return steps_; }
  double route_length_m() const { return route_length_; }

  bool inside(std::size_t m, const pose::Vec3& p) const;
  std::vector<std::size_t> visible_landmarks(std::size_t m, const pose::Pose& x) const;
  // Map containing the device with the most visible landmarks; ties go to
  // the smaller map id.
  std::optional<std::size_t> best_map(const pose::Pose& x) const;
  pose::Pose device_pose_at_distance(double s) const;

 private:
  WorldSpec spec_;
  LocalFrame frame_;
  std::vector<mapserver::MapFile> maps_;
  std::vector<std::vector<pose::Vec3>> world_lm_;
  std::vector<StepTruth> steps_;
  std::vector<double> cumulative_;
  double route_length_ = 0;
};

// Landmarks of map m seen from step `step`, in the device frame. Noise, when
// enabled, is seeded from (rng_seed, step, m).
mapserver::LocationCues synthesize_cues(const World& world, std::size_t step, std::size_t m,
                                        bool noise = true);
// All maps' observations for one step.
mapserver::LocationCues synthesize_all_cues(const World& world, std::size_t step,
                                            bool noise = true);

// Writes <dir>/<map_id>.json for every map and returns the paths.
std::vector<std::string> export_maps(const World& world, const std::string& dir);

}  // namespace flame::sim

#endif  // FLAME_SIM_WORLD_HPP_
