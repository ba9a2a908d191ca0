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

#ifndef FLAME_NAV_NAVGRAPH_HPP_
#define FLAME_NAV_NAVGRAPH_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/mapserver/protocol.hpp"
#include "flame/pose/pose.hpp"

namespace flame::nav {

inline constexpr double kDefaultStitchTolerance = 0.5;

struct StitchedNode {
  std::string name;
  std::map<std::string, pose::Vec3> positions;  // map_id -> position in that map
  std::map<std::string, std::string> meta;      // union; first map wins on clashes
};

struct StitchedEdge {
  std::string a;  // a < b
  std::string b;
  double weight = 0;                        // mean over contributing maps
  std::map<std::string, double> per_map;    // map_id -> length in that frame
};

class StitchedGraph {
 public:
  const std::map<std::string, StitchedNode>& nodes() const { return nodes_; }
  const std::vector<StitchedEdge>& edges() const { return edges_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::vector<std::string> map_ids() const;
  // Edge indices incident to `name`.
  const std::vector<std::size_t>& incident(const std::string& name) const;
  bool has_node(const std::string& name) const { return nodes_.count(name) != 0; }
  std::size_t component_count() const;

  nlohmann::json to_json() const;
  std::string to_dot() const;

 private:
  friend StitchedGraph stitch(std::span<const mapserver::WaypointGraph>, double);
  std::map<std::string, StitchedNode> nodes_;
  std::vector<StitchedEdge> edges_;
  std::map<std::string, std::vector<std::size_t>> adjacency_;
  std::vector<std::string> warnings_;
};

// Merges per-map waypoint graphs on exact waypoint names. Edge lengths are
// measured in each contributing map's frame; when two maps disagree by more
// than `tolerance` meters on an edge, or on the distance between any two
// waypoints they share, a warning is recorded. Throws ValidationError for a
// duplicate waypoint name within one map, an edge to an unknown waypoint or
// a zero-length edge.
StitchedGraph stitch(std::span<const mapserver::WaypointGraph> graphs,
                     double tolerance = kDefaultStitchTolerance);

struct RouteHop {
  std::string name;
  std::string map_id;  // map whose frame covers the hop into this node
};

struct Route {
  bool reachable = false;
  std::vector<RouteHop> hops;
  double length_m = 0;

  nlohmann::json to_json() const;
};

// Dijkstra; ties between equal-length paths go to the lexicographically
// smaller predecessor. Throws LookupError for unknown names. A disconnected
// pair gives reachable = false.
Route route(const StitchedGraph& g, const std::string& from, const std::string& to);

struct PathPoint {
  std::string name;
  std::string map_id;
  std::optional<pose::Vec3> position;  // application frame; empty when deferred
  bool deferred = false;
};

// Positions of the route's nodes in the application frame, for nodes the
// active map knows; the rest are deferred until their map becomes active.
// Throws ValidationError when a node cannot be reached from the active map
// by chaining shared waypoints.
std::vector<PathPoint> path_positions(const StitchedGraph& g, const Route& r,
                                      const std::string& active_map_id, const pose::Pose& p_a,
                                      const pose::Pose& p_r);

}  // namespace flame::nav

#endif  // FLAME_NAV_NAVGRAPH_HPP_
