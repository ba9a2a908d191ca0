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

#ifndef FLAME_TOOLS_API_HPP_
#define FLAME_TOOLS_API_HPP_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "flame/cells/coverer.hpp"
#include "flame/cells/region.hpp"
#include "flame/discovery/client.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/mapserver/map_file.hpp"
#include "flame/mapserver/service.hpp"
#include "flame/nav/navgraph.hpp"
#include "flame/net/udp.hpp"

// JSON operations behind `flame cover|zonefile|queryset` and the tools HTTP
// API. The CLI builds the same request objects, so both paths share one
// implementation. All functions throw ValidationError (or RangeError) for
// bad requests.
namespace flame::tools {

// A GeoJSON Polygon geometry, a Feature holding one, or a FeatureCollection
// whose first feature is one. Ring orientation does not matter.
std::unique_ptr<cells::Region> region_from_geojson(const nlohmann::json& geojson);

// {"region": <GeoJSON>} or {"cap": {"lat", "lng", "radius_m"}}.
std::unique_ptr<cells::Region> region_from_request(const nlohmann::json& request);

// Overrides from {"max_cells", "min_level", "max_level", "mode"}.
cells::CoveringParams covering_from_json(const nlohmann::json& j, cells::CoveringParams base);

// Request: region or cap, optional "covering" and "suffix".
// Reply: {"count", "cells": [{"token", "level", "domain"}], "geojson"}.
nlohmann::json cover(const nlohmann::json& request);

// Request: region or cap, exactly one of "mcname" (url) or "mns"
// (host[:port]), optional "covering" (registration defaults), "suffix",
// "ttl", "serial", "minimum". Reply: master-file text.
std::string zonefile(const nlohmann::json& request);

// Request: {"lat", "lng", "radius_m"} plus optional "suffix",
// "child_levels", "center_chain_level", "covering" (query defaults).
// Reply: {"count", "domains", "base": [tokens], "geojson": base cells}.
nlohmann::json queryset(const nlohmann::json& request);

// Routes POST /cover, /zonefile and /queryset. Zone text comes back as
// {"zone": "..."}.
// The map's region as a GeoJSON Polygon, usable as a "region" request field.
nlohmann::json region_geojson(const mapserver::MapFile& map);

// Every *.json map file directly inside `dir`, sorted by file name.
std::vector<mapserver::MapFile> load_map_dir(const std::string& dir);

struct DiscoveredGraphs {
  std::vector<mapserver::WaypointGraph> graphs;
  std::vector<std::string> urls;      // one per graph
  std::vector<std::string> warnings;  // unreachable servers, duplicate maps
};

// Discovers map servers around each location and fetches their public
// waypoint graphs. A server that fails is skipped with a warning; the same
// map_id seen twice keeps the first.
DiscoveredGraphs discover_graphs(discovery::DiscoveryClient& client,
                                 std::span<const geo::CoarseLocation> locations,
                                 const geo::QueryConfig& cfg,
                                 std::shared_ptr<mapserver::MapTransport> transport);

// Stitches and routes; {"route", "maps", "nodes", "components", "warnings"}.
nlohmann::json route_report(std::span<const mapserver::WaypointGraph> graphs,
                            const std::string& from, const std::string& to);

mapserver::HttpReply handle(std::string_view method, std::string_view path, std::string_view body);

// HTTP front end with CORS for browser clients.
class ToolsServer {
 public:
  ToolsServer(const net::Endpoint& listen, std::string allow_origin = "*");
  ~ToolsServer();
  ToolsServer(const ToolsServer&) = delete;
  ToolsServer& operator=(const ToolsServer&) = delete;

  const net::Endpoint& endpoint() const { return endpoint_; }
  std::string base_url() const { return "http://" + endpoint_.to_string(); }
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  net::Endpoint endpoint_;
  std::thread thread_;
};

}  // namespace flame::tools

#endif  // FLAME_TOOLS_API_HPP_
