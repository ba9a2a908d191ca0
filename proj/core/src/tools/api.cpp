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

#include "flame/tools/api.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "flame/dns/flame_record.hpp"
#include "flame/errors.hpp"
#include "flame/geo/geodomain.hpp"
#include "flame/geo/zone_records.hpp"

namespace flame::tools {
namespace {

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ValidationError(std::string("missing or non-numeric \"") + key + "\"");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw ValidationError(std::string("\"") + key + "\" must be finite");
  return v;
}

int integer(const nlohmann::json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ValidationError(std::string("\"") + key + "\" must be an integer");
  return j[key].get<int>();
}

std::string text(const nlohmann::json& j, const char* key, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ValidationError(std::string("\"") + key + "\" must be a string");
  return j[key].get<std::string>();
}

void need_object(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("request must be a JSON object");
}

}  // namespace

std::unique_ptr<cells::Region> region_from_geojson(const nlohmann::json& g) {
  if (!g.is_object()) throw ValidationError("GeoJSON must be an object");
  const std::string type = text(g, "type", "");
  if (type == "FeatureCollection") {
    if (!g.contains("features") || !g["features"].is_array() || g["features"].empty()) {
      throw ValidationError("FeatureCollection has no features");
    }
    return region_from_geojson(g["features"][0]);
  }
  if (type == "Feature") {
    if (!g.contains("geometry")) throw ValidationError("Feature has no geometry");
    return region_from_geojson(g["geometry"]);
  }
  if (type != "Polygon") {
    throw ValidationError("unsupported GeoJSON type \"" + type + "\"; need a Polygon");
  }
  const auto& coords = g.value("coordinates", nlohmann::json());
  if (!coords.is_array() || coords.empty() || !coords[0].is_array()) {
    throw ValidationError("Polygon needs coordinates [[[lng, lat], ...]]");
  }
  if (coords.size() > 1) throw ValidationError("Polygon holes are not supported");
  std::vector<cells::LatLng> ring;
  for (const auto& p : coords[0]) {
    if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ValidationError("bad position " + p.dump());
    }
    const double lng = p[0].get<double>(), lat = p[1].get<double>();
    if (!(std::abs(lat) <= 90) || !(std::abs(lng) <= 180)) {
      throw ValidationError("position out of range " + p.dump());
    }
    ring.emplace_back(lat, lng);
  }
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw ValidationError("Polygon ring needs at least three distinct vertices");
  return std::make_unique<cells::SphericalPolygon>(
      cells::SphericalPolygon::from_ring_any_orientation(std::move(ring)));
}

std::unique_ptr<cells::Region> region_from_request(const nlohmann::json& request) {
  need_object(request);
  const bool has_region = request.contains("region");
  const bool has_cap = request.contains("cap");
  if (has_region == has_cap) throw ValidationError("give exactly one of \"region\" or \"cap\"");
  if (has_region) return region_from_geojson(request["region"]);
  const auto& cap = request["cap"];
  if (!cap.is_object()) throw ValidationError("\"cap\" must be an object");
  const double lat = number(cap, "lat"), lng = number(cap, "lng"), r = number(cap, "radius_m");
  if (std::abs(lat) > 90 || std::abs(lng) > 180) throw ValidationError("cap center out of range");
  if (!(r > 0)) throw ValidationError("cap radius_m must be positive");
  return std::make_unique<cells::SphericalCap>(cells::LatLng(lat, lng), r);
}

cells::CoveringParams covering_from_json(const nlohmann::json& j, cells::CoveringParams p) {
  if (j.is_null()) return p;
  if (!j.is_object()) throw ValidationError("\"covering\" must be an object");
  p.max_cells = integer(j, "max_cells", p.max_cells);
  p.min_level = integer(j, "min_level", p.min_level);
  p.max_level = integer(j, "max_level", p.max_level);
  const std::string mode = text(j, "mode", p.mode == cells::CoverMode::kInterior ? "interior" : "exterior");
  if (mode == "interior") {
    p.mode = cells::CoverMode::kInterior;
  } else if (mode == "exterior") {
    p.mode = cells::CoverMode::kExterior;
  } else {
    throw ValidationError("covering mode must be interior or exterior");
  }
  p.validate();
  return p;
}

nlohmann::json cover(const nlohmann::json& request) {
  const auto region = region_from_request(request);
  const auto params = covering_from_json(request.value("covering", nlohmann::json()),
                                         cells::CoveringParams::registration_defaults());
  const std::string suffix = text(request, "suffix", std::string(geo::kDefaultSuffix));
  const auto cells = cells::cover(*region, params);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : cells) {
    list.push_back({{"token", c.to_token()},
                    {"level", c.level()},
                    {"domain", geo::cell_to_geodomain(c, suffix).to_string()}});
  }
  return {{"count", cells.size()},
          {"cells", list},
          {"geojson", nlohmann::json::parse(cells::cells_to_geojson(cells))}};
}

std::string zonefile(const nlohmann::json& request) {
  const auto region = region_from_request(request);
  const bool has_mc = request.contains("mcname");
  const bool has_mns = request.contains("mns");
  if (has_mc == has_mns) throw ValidationError("give exactly one of \"mcname\" or \"mns\"");
  dns::FlameRecord target;
  if (has_mc) {
    const std::string url = text(request, "mcname", "");
    if (!dns::parse_url(url)) throw ValidationError("mcname must be an http(s) url, got \"" + url + "\"");
    target = dns::FlameRecord::mcname(url);
  } else {
    const std::string hp = text(request, "mns", "");
    if (!dns::parse_host_port(hp)) throw ValidationError("mns must be host[:port], got \"" + hp + "\"");
    target = dns::FlameRecord::mns(hp);
  }
  const auto params = covering_from_json(request.value("covering", nlohmann::json()),
                                         cells::CoveringParams::registration_defaults());
  const std::string suffix = text(request, "suffix", std::string(geo::kDefaultSuffix));
  const int ttl = integer(request, "ttl", static_cast<int>(geo::kDefaultRecordTtl));
  if (ttl < 0) throw ValidationError("ttl must be non-negative");
  geo::SoaParams soa = geo::SoaParams::defaults_for(suffix);
  const int serial = integer(request, "serial", static_cast<int>(soa.serial));
  const int minimum = integer(request, "minimum", static_cast<int>(soa.minimum));
  if (serial < 0 || minimum < 0) throw ValidationError("serial and minimum must be non-negative");
  soa.serial = static_cast<std::uint32_t>(serial);
  soa.minimum = static_cast<std::uint32_t>(minimum);
  const auto records =
      geo::zone_records(*region, target, params, suffix, static_cast<std::uint32_t>(ttl));
  return geo::render_zone(suffix, soa, records, static_cast<std::uint32_t>(ttl));
}

nlohmann::json queryset(const nlohmann::json& request) {
  need_object(request);
  geo::CoarseLocation loc;
  const double lat = number(request, "lat"), lng = number(request, "lng");
  if (std::abs(lat) > 90 || std::abs(lng) > 180) throw ValidationError("location out of range");
  loc.center = cells::LatLng(lat, lng);
  loc.error_radius_m = number(request, "radius_m");
  geo::QueryConfig cfg;
  cfg.suffix = text(request, "suffix", cfg.suffix);
  cfg.child_levels = integer(request, "child_levels", cfg.child_levels);
  cfg.center_chain_level = integer(request, "center_chain_level", cfg.center_chain_level);
  cfg.covering = covering_from_json(request.value("covering", nlohmann::json()), cfg.covering);
  const auto cells = geo::query_cells(loc, cfg);
  const auto domains = geo::query_set(loc, cfg);
  nlohmann::json names = nlohmann::json::array();
  for (const auto& d : domains) names.push_back(d.to_string());
  nlohmann::json base = nlohmann::json::array();
  for (const auto& c : cells.base) base.push_back(c.to_token());
  return {{"count", domains.size()},
          {"domains", names},
          {"base", base},
          {"geojson", nlohmann::json::parse(cells::cells_to_geojson(cells.base))}};
}

nlohmann::json region_geojson(const mapserver::MapFile& map) {
  nlohmann::json ring = nlohmann::json::array();
  for (const auto& p : map.region) ring.push_back({p.lng(), p.lat()});
  if (!map.region.empty()) ring.push_back(ring.front());
  return {{"type", "Polygon"}, {"coordinates", {ring}}};
}

std::vector<mapserver::MapFile> load_map_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw ValidationError("not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw ValidationError("no map files (*.json) in " + dir);
  std::vector<mapserver::MapFile> maps;
  for (const auto& p : paths) maps.push_back(mapserver::load_map_file(p.string()));
  return maps;
}

DiscoveredGraphs discover_graphs(discovery::DiscoveryClient& client,
                                 std::span<const geo::CoarseLocation> locations,
                                 const geo::QueryConfig& cfg,
                                 std::shared_ptr<mapserver::MapTransport> transport) {
  DiscoveredGraphs out;
  std::set<std::string> seen_urls, seen_maps;
  for (const auto& loc : locations) {
    auto found = client.discover(loc, cfg);
    out.warnings.insert(out.warnings.end(), found.warnings.begin(), found.warnings.end());
    for (const auto& d : found.descriptors) {
      if (!seen_urls.insert(d.url).second) continue;
      try {
        auto g = mapserver::RemoteMap(transport, d.url).waypoints();
        if (!seen_maps.insert(g.map_id).second) {
          out.warnings.push_back("map " + g.map_id + " also served by " + d.url + "; ignored");
          continue;
        }
        out.graphs.push_back(std::move(g));
        out.urls.push_back(d.url);
      } catch (const Error& e) {
        out.warnings.push_back(d.url + ": " + e.what());
      }
    }
  }
  return out;
}

nlohmann::json route_report(std::span<const mapserver::WaypointGraph> graphs,
                            const std::string& from, const std::string& to) {
  const auto g = nav::stitch(graphs);
  const auto r = nav::route(g, from, to);
  return {{"route", r.to_json()},
          {"maps", g.map_ids()},
          {"nodes", g.nodes().size()},
          {"components", g.component_count()},
          {"warnings", g.warnings()}};
}

mapserver::HttpReply handle(std::string_view method, std::string_view path, std::string_view body) {
  if (path != "/cover" && path != "/zonefile" && path != "/queryset") {
    return mapserver::error_reply(404, "not_found", "no such endpoint");
  }
  if (method != "POST") return mapserver::error_reply(405, "method_not_allowed", "use POST");
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return mapserver::error_reply(400, "bad_json", e.what());
  }
  try {
    if (path == "/cover") return {200, cover(req).dump()};
    if (path == "/zonefile") return {200, nlohmann::json{{"zone", zonefile(req)}}.dump()};
    return {200, queryset(req).dump()};
  } catch (const Error& e) {
    return mapserver::error_reply(400, "bad_request", e.what());
  } catch (const nlohmann::json::exception& e) {
    return mapserver::error_reply(400, "bad_request", e.what());
  }
}

struct ToolsServer::Impl {
  httplib::Server server;
};

ToolsServer::ToolsServer(const net::Endpoint& listen, std::string allow_origin)
    : impl_(std::make_unique<Impl>()) {
  auto cors = [origin = std::move(allow_origin)](httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  };
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto handler = [cors](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    cors(res);
  };
  impl_->server.Options(".*", [cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    cors(res);
  });
  impl_->server.Post(".*", handler);
  impl_->server.Get(".*", handler);
  const std::string host = listen.host == "localhost" ? "127.0.0.1" : listen.host;
  int port = listen.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port <= 0) throw TransportError("cannot bind tools server to " + listen.to_string());
  endpoint_ = {host, static_cast<std::uint16_t>(port)};
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  spdlog::info("tools api listening on {}", endpoint_.to_string());
}

ToolsServer::~ToolsServer() { stop(); }

void ToolsServer::stop() {
  if (thread_.joinable()) {
    impl_->server.stop();
    thread_.join();
  }
}

}  // namespace flame::tools
