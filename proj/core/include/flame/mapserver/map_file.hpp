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

#ifndef FLAME_MAPSERVER_MAP_FILE_HPP_
#define FLAME_MAPSERVER_MAP_FILE_HPP_

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/cells/latlng.hpp"
#include "flame/cells/region.hpp"
#include "flame/pose/pose.hpp"

namespace flame::mapserver {

struct Landmark {
  std::string id;
  pose::Vec3 position;  // map frame, meters
};

// A tagged point of interest. Names are the cross-map identity used for
// stitching, so they should be globally meaningful ("bldg-a/door-3").
struct Waypoint {
  std::string name;
  pose::Vec3 position;  // map frame, meters
  std::map<std::string, std::string> meta;
};

struct MapFile {
  std::string map_id;
  std::string frame_note;
  std::vector<cells::LatLng> region;  // polygon ring, either orientation
  std::vector<Landmark> landmarks;
  std::vector<Waypoint> waypoints;
  std::vector<std::pair<std::string, std::string>> edges;  // undirected
  double confidence_sigma_m = 0.05;

  // Throws ValidationError naming the first violated invariant.
  void validate() const;
  cells::SphericalPolygon region_polygon() const;

  nlohmann::json to_json() const;
  // Parses and validates.
  static MapFile from_json(const nlohmann::json& j);
};

MapFile load_map_file(const std::string& path);
void save_map_file(const MapFile& map, const std::string& path);

}  // namespace flame::mapserver

#endif  // FLAME_MAPSERVER_MAP_FILE_HPP_
