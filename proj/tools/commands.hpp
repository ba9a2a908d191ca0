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

#ifndef FLAME_TOOLS_COMMANDS_HPP_
#define FLAME_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flame::cli {

struct Globals {
  std::string suffix;
  bool suffix_set = false;
  std::string resolver = "127.0.0.1:8053";
  std::string log_level = "info";
  std::optional<std::uint64_t> seed;
};

// Covering flags; unset ones keep the library defaults.
struct CoveringFlags {
  std::optional<int> max_cells;
  std::optional<int> min_level;
  std::optional<int> max_level;
  std::optional<std::string> mode;
};

struct CoverArgs {
  std::string region;  // GeoJSON text or a path to it
  std::string cap;     // lat,lng,radius_m
  CoveringFlags covering;
  std::string output = "json";
};

struct ZonefileArgs {
  std::string region;
  std::string cap;
  std::string map;  // take the region from a map file
  std::string mcname;
  std::string mns;
  CoveringFlags covering;
  std::optional<int> ttl;
  std::optional<int> serial;
  std::optional<int> minimum;
  std::string out;
};

struct QuerysetArgs {
  std::string at;
  std::optional<int> child_levels;
  std::optional<int> center_chain_level;
  CoveringFlags covering;
  std::string output = "json";
};

struct ServeDnsArgs {
  std::vector<std::string> zones;
  std::string listen = "127.0.0.1:8053";
  std::optional<std::uint32_t> negative_ttl;
  int threads = 2;
};

struct ServeMapArgs {
  std::string map;
  std::string listen = "127.0.0.1:8080";
};

struct ServeToolsArgs {
  std::string listen = "127.0.0.1:8090";
  std::string allow_origin = "*";
};

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string network;
  std::optional<int> steps;
  bool export_maps = false;
};

struct RouteArgs {
  std::string maps;
  std::vector<std::string> at;
  std::string from;
  std::string to;
  std::string dot;
  int timeout_ms = 2000;
};

// Each returns the process exit code; errors propagate as exceptions.
int cover(const Globals& g, const CoverArgs& a);
int zonefile(const Globals& g, const ZonefileArgs& a);
int queryset(const Globals& g, const QuerysetArgs& a);
int serve_dns(const Globals& g, const ServeDnsArgs& a);
int serve_map(const Globals& g, const ServeMapArgs& a);
int serve_tools(const Globals& g, const ServeToolsArgs& a);
int simulate(const Globals& g, const SimulateArgs& a);
int route(const Globals& g, const RouteArgs& a);

}  // namespace flame::cli

#endif  // FLAME_TOOLS_COMMANDS_HPP_
