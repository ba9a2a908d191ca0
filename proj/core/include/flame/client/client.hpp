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

#ifndef FLAME_CLIENT_CLIENT_HPP_
#define FLAME_CLIENT_CLIENT_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/clock.hpp"
#include "flame/discovery/client.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/mapserver/service.hpp"
#include "flame/pose/pose.hpp"

namespace flame::client {

struct ClientConfig {
  double query_interval_s = 2.0;
  double ema_alpha = 0.3;
  double error_threshold_m = 1.0;
  double confidence_threshold = 0.5;
  // When false, server confidence is ignored; without VIO the client then
  // rediscovers on every step.
  bool use_confidence = true;
  geo::QueryConfig query_cfg;
  discovery::FilterPolicy policy;
  std::vector<std::string> cue_types{"landmark-observations/v1"};
  int max_parallel = 8;  // localization fan-out; 1 keeps it on the caller

  void validate() const;
};

// e = |d_L - d_S| with d_L, d_S the displacement magnitudes reported by
// VIO and by the server since the previous localization.
double error_score(const pose::Pose& l_prev, const pose::Pose& l_now, const pose::Pose& s_prev,
                   const pose::Pose& s_now);
// ema' = alpha * e + (1 - alpha) * ema; the first score seeds the average.
double ema_update(std::optional<double> ema, double e, double alpha);

// W_A = P_A * P_R^-1 * W_R
pose::Vec3 waypoint_to_app_frame(const pose::Pose& p_a, const pose::Pose& p_r,
                                 const pose::Vec3& w_r);

struct ServerTrack {
  discovery::MapServerDescriptor descriptor;
  std::optional<mapserver::CapabilitySet> capabilities;
  std::optional<mapserver::WaypointGraph> waypoints;
  std::optional<mapserver::LocalizeResult> last_result;
  double last_time = 0;
  std::string last_error;  // transport error of the last attempt
  struct Prev {
    std::optional<pose::Pose> l;  // VIO pose, when VIO was available
    pose::Pose s;                 // server pose in its map frame
    double t = 0;
  };
  std::optional<Prev> prev;
  std::optional<double> last_error_m;  // e of the last update
  std::optional<double> ema_error_m;
};

struct AppWaypoint {
  std::string name;
  pose::Vec3 position;  // application frame
  std::map<std::string, std::string> meta;
};

struct ServerScore {
  std::string url;
  bool ok = false;
  double confidence = 0;
  int matched_count = 0;
  std::optional<double> error_m;
  std::optional<double> ema_error_m;
  std::string error;

  nlohmann::json to_json() const;
};

struct StepTiming {
  double discovery_s = 0;
  double capabilities_s = 0;
  double localize_s = 0;
  double waypoints_s = 0;
  double total_s() const { return discovery_s + capabilities_s + localize_s + waypoints_s; }
};

struct ClientOutput {
  int step = 0;
  double t = 0;
  std::optional<discovery::MapServerDescriptor> active;
  std::optional<pose::Pose> pose_in_map;
  std::vector<AppWaypoint> waypoints_in_app_frame;
  bool rediscovered = false;
  std::vector<ServerScore> scores;
  std::vector<std::string> warnings;
  std::optional<discovery::DiscoveryStats> discovery;
  std::uint64_t dns_wire_queries = 0;  // datagrams sent during this step
  StepTiming timing;

  // One event-log line.
  nlohmann::json to_json() const;
};

class FlameClient {
 public:
  FlameClient(ClientConfig config, std::shared_ptr<discovery::DiscoveryClient> discovery,
              std::shared_ptr<mapserver::MapTransport> maps,
              std::shared_ptr<const Clock> clock = std::make_shared<SteadyClock>());

  // One pass of the localization flowchart. `vio` is the device pose in
  // the application frame (P_A), when tracking is available.
  ClientOutput step(const geo::CoarseLocation& loc, const std::optional<pose::Pose>& vio,
                    const mapserver::LocationCues& cues);

  const std::optional<std::string>& active_url() const { return active_; }
  const std::map<std::string, ServerTrack>& tracks() const { return tracks_; }
  const ClientConfig& config() const { return config_; }
  void set_event_sink(std::function<void(const nlohmann::json&)> sink) { sink_ = std::move(sink); }

 private:
  bool acceptable(const ServerTrack& t, bool have_vio) const;
  void localize_one(ServerTrack& t, const std::optional<pose::Pose>& vio,
                    const mapserver::LocationCues& cues, double now, double& latency);
  ServerScore score_of(const ServerTrack& t) const;

  ClientConfig config_;
  std::shared_ptr<discovery::DiscoveryClient> discovery_;
  std::shared_ptr<mapserver::MapTransport> maps_;
  std::shared_ptr<const Clock> clock_;
  std::map<std::string, ServerTrack> tracks_;
  std::optional<std::string> active_;
  int step_ = 0;
  std::function<void(const nlohmann::json&)> sink_;
};

}  // namespace flame::client

#endif  // FLAME_CLIENT_CLIENT_HPP_
