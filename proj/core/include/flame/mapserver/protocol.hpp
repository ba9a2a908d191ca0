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

#ifndef FLAME_MAPSERVER_PROTOCOL_HPP_
#define FLAME_MAPSERVER_PROTOCOL_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/mapserver/map_file.hpp"
#include "flame/pose/pose.hpp"

namespace flame::mapserver {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kLandmarkCueType = "landmark-observations/v1";

struct Observation {
  std::string landmark_id;
  pose::Vec3 position;  // device frame, meters
};

struct LocationCues {
  std::vector<Observation> observations;
  double timestamp = 0;

  nlohmann::json to_json() const;
  // Throws ValidationError.
  static LocationCues from_json(const nlohmann::json& j);
};

// Result of localizing against one map. When ok is false, error_code says
// why (e.g. "insufficient_matches") and confidence is 0.
struct LocalizeResult {
  bool ok = false;
  pose::Pose pose;  // device pose in the map frame: p_map = pose(p_device)
  double confidence = 0;
  int matched_count = 0;
  double rmsd_m = 0;
  std::string error_code;
  std::string message;

  nlohmann::json to_json() const;
  static LocalizeResult from_json(const nlohmann::json& j);
};

struct CapabilitySet {
  std::string map_id;
  int protocol = kProtocolVersion;
  std::vector<std::string> cue_types;
  bool waypoints = false;

  nlohmann::json to_json() const;
  static CapabilitySet from_json(const nlohmann::json& j);
  bool supports_any(const std::vector<std::string>& offered) const;
};

struct WaypointGraph {
  std::string map_id;
  std::vector<Waypoint> waypoints;
  std::vector<std::pair<std::string, std::string>> edges;

  nlohmann::json to_json() const;
  static WaypointGraph from_json(const nlohmann::json& j);
};

// Matches observation ids against the map's landmarks (first observation
// of a repeated id wins) and registers device-frame points onto map-frame
// points. Fewer than 3 matches, or a degenerate layout, gives ok = false.
LocalizeResult localize(const LocationCues& cues, const MapFile& map);
CapabilitySet capabilities(const MapFile& map);
// Public graph only; landmarks never leave the server.
WaypointGraph waypoint_graph(const MapFile& map);

}  // namespace flame::mapserver

#endif  // FLAME_MAPSERVER_PROTOCOL_HPP_
