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

#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "flame/dns/nameserver.hpp"
#include "flame/dns/zone.hpp"
#include "flame/errors.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/mapserver/protocol.hpp"
#include "flame/mapserver/service.hpp"
#include "flame/nav/navgraph.hpp"
#include "flame/sim/harness.hpp"
#include "flame/sim/world.hpp"
#include "flame/tools/api.hpp"

namespace flame::cli {
namespace {

using nlohmann::json;

// Blocks the usual stop signals before any server thread starts, so only
// wait() sees them.
class Signals {
 public:
  Signals() {
    sigemptyset(&set_);
    for (int s : {SIGINT, SIGTERM, SIGHUP, SIGUSR1}) sigaddset(&set_, s);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
  }
  int wait() {
    int sig = 0;
    sigwait(&set_, &sig);
    return sig;
  }

 private:
  sigset_t set_;
};

void announce(json line) {
  line["event"] = "listening";
  std::cout << line.dump() << std::endl;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

// Inline GeoJSON or a path to a file holding it.
json read_geojson(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  const std::string text =
      first != std::string::npos && arg[first] == '{' ? arg : read_file(arg);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed GeoJSON: ") + e.what());
  }
}

// "lat,lng,radius_m"
json parse_cap(const std::string& arg, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(arg);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double d = 0;
    try {
      d = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || part.find_first_not_of(" ", used) != std::string::npos) {
      throw ValidationError(std::string(flag) + " wants lat,lng,radius_m; got \"" + arg + "\"");
    }
    v.push_back(d);
  }
  if (v.size() != 3) {
    throw ValidationError(std::string(flag) + " wants lat,lng,radius_m; got \"" + arg + "\"");
  }
  return {{"lat", v[0]}, {"lng", v[1]}, {"radius_m", v[2]}};
}

json covering_json(const CoveringFlags& f) {
  json c = json::object();
  if (f.max_cells) c["max_cells"] = *f.max_cells;
  if (f.min_level) c["min_level"] = *f.min_level;
  if (f.max_level) c["max_level"] = *f.max_level;
  if (f.mode) c["mode"] = *f.mode;
  return c;
}

std::string suffix_of(const Globals& g) {
  return g.suffix_set ? g.suffix : std::string(geo::kDefaultSuffix);
}

dns::ZoneSet load_zones(const std::vector<std::string>& files) {
  dns::ZoneSet zs;
  for (const auto& f : files) {
    auto z = dns::load_zone_file(f);
    for (const auto& w : z.warnings) spdlog::warn("{}: {}", f, w);
    zs.add(std::move(z));
  }
  return zs;
}

}  // namespace

int cover(const Globals& g, const CoverArgs& a) {
  json req{{"suffix", suffix_of(g)}, {"covering", covering_json(a.covering)}};
  if (!a.region.empty()) req["region"] = read_geojson(a.region);
  if (!a.cap.empty()) req["cap"] = parse_cap(a.cap, "--cap");
  const json reply = tools::cover(req);
  if (a.output == "tokens") {
    for (const auto& c : reply["cells"]) std::cout << c["token"].get<std::string>() << "\n";
  } else if (a.output == "geojson") {
    std::cout << reply["geojson"].dump(2) << "\n";
  } else {
    std::cout << reply.dump(2) << "\n";
  }
  return 0;
}

int zonefile(const Globals& g, const ZonefileArgs& a) {
  json req{{"suffix", suffix_of(g)}, {"covering", covering_json(a.covering)}};
  if (!a.region.empty()) req["region"] = read_geojson(a.region);
  if (!a.cap.empty()) req["cap"] = parse_cap(a.cap, "--cap");
  if (!a.map.empty()) {
    if (req.contains("region") || req.contains("cap")) {
      throw ValidationError("give only one of --region, --cap or --map");
    }
    req["region"] = tools::region_geojson(mapserver::load_map_file(a.map));
  }
  if (!a.mcname.empty()) req["mcname"] = a.mcname;
  if (!a.mns.empty()) req["mns"] = a.mns;
  if (a.ttl) req["ttl"] = *a.ttl;
  if (a.serial) req["serial"] = *a.serial;
  if (a.minimum) req["minimum"] = *a.minimum;
  write_text(a.out, tools::zonefile(req));
  return 0;
}

int queryset(const Globals& g, const QuerysetArgs& a) {
  json req = parse_cap(a.at, "--at");
  req["suffix"] = suffix_of(g);
  req["covering"] = covering_json(a.covering);
  if (a.child_levels) req["child_levels"] = *a.child_levels;
  if (a.center_chain_level) req["center_chain_level"] = *a.center_chain_level;
  const json reply = tools::queryset(req);
  if (a.output == "domains") {
    for (const auto& d : reply["domains"]) std::cout << d.get<std::string>() << "\n";
  } else {
    std::cout << reply.dump(2) << "\n";
  }
  return 0;
}

int serve_dns(const Globals&, const ServeDnsArgs& a) {
  dns::NameserverConfig cfg;
  cfg.listen = net::Endpoint::parse(a.listen, 8053);
  cfg.threads = a.threads;
  cfg.negative_ttl_cap = a.negative_ttl;
  auto zones = load_zones(a.zones);
  json origins = json::array();
  std::size_t records = 0;
  for (const auto& z : zones.zones()) {
    origins.push_back(z->origin());
    records += z->record_count();
  }
  Signals signals;
  dns::Nameserver server(std::move(zones), cfg);
  spdlog::info("nameserver on {} ({} records)", server.endpoint().to_string(), records);
  announce({{"service", "dns"},
            {"address", server.endpoint().to_string()},
            {"zones", origins},
            {"records", records}});
  for (;;) {
    const int sig = signals.wait();
    if (sig == SIGUSR1) {
      std::cout << json{{"event", "stats"}, {"stats", server.stats().to_json()}}.dump() << std::endl;
    } else if (sig == SIGHUP) {
      try {
        server.reload(load_zones(a.zones));
        spdlog::info("zones reloaded");
      } catch (const Error& e) {
        spdlog::error("reload failed, keeping the old zones: {}", e.what());
      }
    } else {
      break;
    }
  }
  server.stop();
  std::cout << json{{"event", "stopped"}, {"stats", server.stats().to_json()}}.dump() << std::endl;
  return 0;
}

int serve_map(const Globals&, const ServeMapArgs& a) {
  auto service = std::make_shared<const mapserver::MapService>(mapserver::load_map_file(a.map));
  Signals signals;
  mapserver::MapServer server(service, net::Endpoint::parse(a.listen, 8080));
  spdlog::info("map {} on {}", service->map().map_id, server.base_url());
  announce({{"service", "map"},
            {"address", server.endpoint().to_string()},
            {"url", server.base_url()},
            {"map_id", service->map().map_id}});
  while (true) {
    const int sig = signals.wait();
    if (sig == SIGINT || sig == SIGTERM) break;
  }
  server.stop();
  std::cout << json{{"event", "stopped"},
                    {"requests", service->requests()},
                    {"localizations", service->localizations()}}
                   .dump()
            << std::endl;
  return 0;
}

int serve_tools(const Globals&, const ServeToolsArgs& a) {
  Signals signals;
  tools::ToolsServer server(net::Endpoint::parse(a.listen, 8090), a.allow_origin);
  spdlog::info("tools API on {}", server.base_url());
  announce({{"service", "tools"},
            {"address", server.endpoint().to_string()},
            {"url", server.base_url()}});
  while (true) {
    const int sig = signals.wait();
    if (sig == SIGINT || sig == SIGTERM) break;
  }
  server.stop();
  return 0;
}

int simulate(const Globals& g, const SimulateArgs& a) {
  sim::WorldSpec spec = sim::load_world_spec(a.scenario);
  if (g.seed) spec.rng_seed = *g.seed;
  if (g.suffix_set) spec.suffix = g.suffix;
  if (!a.network.empty()) spec.network = a.network;
  if (a.steps) spec.steps = *a.steps;
  spec.validate();

  std::vector<json> events;
  sim::RunOptions opts;
  opts.event_sink = [&](const json& e) { events.push_back(e); };
  opts.progress = [](const sim::StepMetrics& s) {
    spdlog::debug("step {} total={} uncached={} active={}", s.step, s.geodomains_total,
                  s.geodomains_uncached, s.active.value_or("-"));
  };
  const auto metrics = sim::run(spec, opts);
  auto files = sim::report(metrics, spec, a.out, events);
  if (a.export_maps) {
    for (auto& p : sim::export_maps(sim::World(spec), (std::filesystem::path(a.out) / "maps").string())) {
      files.push_back(std::move(p));
    }
  }
  spdlog::info("wrote {} files to {}", files.size(), a.out);
  std::cout << json{{"out", a.out},
                    {"files", files},
                    {"config_hash", sim::config_hash(spec)},
                    {"aggregates", metrics.to_json()["aggregates"]}}
                   .dump(2)
            << "\n";
  return 0;
}

int route(const Globals& g, const RouteArgs& a) {
  if (a.maps.empty() == a.at.empty()) {
    throw ValidationError("give either --maps or at least one --at");
  }
  std::vector<mapserver::WaypointGraph> graphs;
  json sources = json::array();
  if (!a.maps.empty()) {
    for (const auto& m : tools::load_map_dir(a.maps)) {
      graphs.push_back(mapserver::waypoint_graph(m));
      sources.push_back(m.map_id);
    }
  } else {
    std::vector<geo::CoarseLocation> locations;
    for (const auto& at : a.at) {
      const json c = parse_cap(at, "--at");
      geo::CoarseLocation loc{{c["lat"].get<double>(), c["lng"].get<double>()},
                              c["radius_m"].get<double>()};
      loc.validate();
      locations.push_back(loc);
    }
    discovery::DiscoveryConfig dc;
    dc.resolvers = {net::Endpoint::parse(g.resolver, 53)};
    dc.timeout = std::chrono::milliseconds(a.timeout_ms);
    dc.validate();
    discovery::DiscoveryClient client(dc, std::make_shared<discovery::UdpTransport>());
    geo::QueryConfig qc;
    qc.suffix = suffix_of(g);
    auto found = tools::discover_graphs(
        client, locations, qc,
        std::make_shared<mapserver::HttpMapTransport>(std::chrono::milliseconds(a.timeout_ms)));
    for (const auto& w : found.warnings) spdlog::warn("{}", w);
    if (found.graphs.empty()) throw TransportError("discovery found no reachable map servers");
    graphs = std::move(found.graphs);
    for (const auto& u : found.urls) sources.push_back(u);
  }
  json report = tools::route_report(graphs, a.from, a.to);
  report["sources"] = sources;
  if (!a.dot.empty()) write_text(a.dot, nav::stitch(graphs).to_dot());
  std::cout << report.dump(2) << "\n";
  return report["route"]["reachable"].get<bool>() ? 0 : 1;
}

}  // namespace flame::cli
