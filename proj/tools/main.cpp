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

#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "flame/errors.hpp"

namespace {

using namespace flame::cli;

void add_covering(CLI::App* cmd, CoveringFlags& f) {
  cmd->add_option("--max-cells", f.max_cells, "Upper bound on covering cells")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-level", f.min_level, "Coarsest cell level")->check(CLI::Range(0, 30));
  cmd->add_option("--max-level", f.max_level, "Finest cell level")->check(CLI::Range(0, 30));
  cmd->add_option("--mode", f.mode, "interior or exterior covering")
      ->check(CLI::IsMember({"interior", "exterior"}));
}

// Usage and validation problems exit 2, anything else at runtime exits 1.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const flame::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const flame::RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const flame::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const flame::DegenerateGeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const flame::LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flame: geo-domain discovery, map servers and tooling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FLAME_VERSION);

  Globals g;
  app.add_option("--suffix", g.suffix, "Geo-domain suffix (default flame.test)");
  app.add_option("--resolver", g.resolver, "Root nameserver host:port")->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Override the scenario RNG seed");

  CoverArgs cover_args;
  auto* cover = app.add_subcommand("cover", "Cover a region with cells");
  auto* cover_region = cover->add_option("--region", cover_args.region, "GeoJSON polygon (inline or file)");
  auto* cover_cap = cover->add_option("--cap", cover_args.cap, "lat,lng,radius_m");
  cover_region->excludes(cover_cap);
  add_covering(cover, cover_args.covering);
  cover->add_option("--output", cover_args.output, "json, tokens or geojson")
      ->check(CLI::IsMember({"json", "tokens", "geojson"}));

  ZonefileArgs zone_args;
  auto* zone = app.add_subcommand("zonefile", "Render a zone file registering a region");
  zone->add_option("--region", zone_args.region, "GeoJSON polygon (inline or file)");
  zone->add_option("--cap", zone_args.cap, "lat,lng,radius_m");
  zone->add_option("--map", zone_args.map, "Use the region of this map file")->check(CLI::ExistingFile);
  auto* mcname = zone->add_option("--mcname", zone_args.mcname, "Map server URL");
  auto* mns = zone->add_option("--mns", zone_args.mns, "Delegated nameserver host[:port]");
  mcname->excludes(mns);
  add_covering(zone, zone_args.covering);
  zone->add_option("--ttl", zone_args.ttl, "Record TTL")->check(CLI::NonNegativeNumber);
  zone->add_option("--serial", zone_args.serial, "SOA serial")->check(CLI::NonNegativeNumber);
  zone->add_option("--minimum", zone_args.minimum, "SOA MINIMUM")->check(CLI::NonNegativeNumber);
  zone->add_option("--out", zone_args.out, "Write here instead of stdout");

  QuerysetArgs qs_args;
  auto* qs = app.add_subcommand("queryset", "Geo-domains queried for a coarse location");
  qs->add_option("--at", qs_args.at, "lat,lng,radius_m")->required();
  qs->add_option("--child-levels", qs_args.child_levels, "Levels below the base covering");
  qs->add_option("--center-chain-level", qs_args.center_chain_level,
                 "Level of the centre cell ancestor chain (-1 disables)");
  add_covering(qs, qs_args.covering);
  qs->add_option("--output", qs_args.output, "json or domains")
      ->check(CLI::IsMember({"json", "domains"}));

  ServeDnsArgs dns_args;
  auto* sdns = app.add_subcommand("serve-dns", "Authoritative nameserver for zone files");
  sdns->add_option("--zone", dns_args.zones, "Zone file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  sdns->add_option("--listen", dns_args.listen, "host:port, port 0 for any")->capture_default_str();
  sdns->add_option("--negative-ttl", dns_args.negative_ttl, "Cap on negative-answer TTLs");
  sdns->add_option("--threads", dns_args.threads, "Worker threads")->check(CLI::Range(1, 64));

  ServeMapArgs map_args;
  auto* smap = app.add_subcommand("serve-map", "Serve one map over HTTP");
  smap->add_option("--map", map_args.map, "Map file")->required()->check(CLI::ExistingFile);
  smap->add_option("--listen", map_args.listen, "host:port, port 0 for any")->capture_default_str();

  ServeToolsArgs tools_args;
  auto* stools = app.add_subcommand("serve-tools", "JSON tools API (/cover, /zonefile, /queryset)");
  stools->add_option("--listen", tools_args.listen, "host:port, port 0 for any")
      ->capture_default_str();
  stools->add_option("--allow-origin", tools_args.allow_origin, "CORS origin")
      ->capture_default_str();

  SimulateArgs sim_args;
  auto* simc = app.add_subcommand("simulate", "Run a scenario and write its report");
  simc->add_option("--scenario", sim_args.scenario, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  simc->add_option("--out", sim_args.out, "Output directory")->required();
  simc->add_option("--network", sim_args.network, "simulated or loopback")
      ->check(CLI::IsMember({"simulated", "loopback"}));
  simc->add_option("--steps", sim_args.steps, "Override the step count")->check(CLI::PositiveNumber);
  simc->add_flag("--export-maps", sim_args.export_maps, "Also write the map files to <out>/maps");

  RouteArgs route_args;
  auto* rt = app.add_subcommand("route", "Shortest waypoint route across maps");
  auto* rt_maps = rt->add_option("--maps", route_args.maps, "Directory of map files");
  auto* rt_at = rt->add_option("--at", route_args.at,
                               "Discover maps around lat,lng,radius_m (repeatable)");
  rt_maps->excludes(rt_at);
  rt->add_option("--from", route_args.from, "Start waypoint")->required();
  rt->add_option("--to", route_args.to, "Goal waypoint")->required();
  rt->add_option("--dot", route_args.dot, "Write the stitched graph as DOT");
  rt->add_option("--timeout-ms", route_args.timeout_ms, "DNS and HTTP timeout")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g.suffix_set = app.count("--suffix") > 0;

  auto logger = spdlog::stderr_color_mt("flame");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  return guarded([&] {
    if (*cover) return flame::cli::cover(g, cover_args);
    if (*zone) return flame::cli::zonefile(g, zone_args);
    if (*qs) return flame::cli::queryset(g, qs_args);
    if (*sdns) return flame::cli::serve_dns(g, dns_args);
    if (*smap) return flame::cli::serve_map(g, map_args);
    if (*stools) return flame::cli::serve_tools(g, tools_args);
    if (*simc) return flame::cli::simulate(g, sim_args);
    return flame::cli::route(g, route_args);
  });
}
