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

#include "flame/mapserver/map_file.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "flame/errors.hpp"

namespace flame::mapserver {
namespace {

pose::Vec3 vec_from(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(what + " must be [x, y, z]");
  pose::Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw ValidationError(what + " must be finite");
  return v;
}

nlohmann::json vec_json(const pose::Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

void MapFile::validate() const {
  if (map_id.empty()) throw ValidationError("map_id must be non-empty");
  if (!(confidence_sigma_m > 0) || !std::isfinite(confidence_sigma_m)) {
    throw ValidationError("confidence_sigma_m must be positive");
  }
  if (landmarks.size() < 3) throw ValidationError("a map needs at least 3 landmarks");
  std::set<std::string> ids;
  for (const auto& l : landmarks) {
    if (l.id.empty()) throw ValidationError("landmark id must be non-empty");
    if (!l.position.allFinite()) throw ValidationError("landmark " + l.id + " is not finite");
    if (!ids.insert(l.id).second) throw ValidationError("duplicate landmark id " + l.id);
  }
  std::set<std::string> names;
  for (const auto& w : waypoints) {
    if (w.name.empty()) throw ValidationError("waypoint name must be non-empty");
    if (!w.position.allFinite()) throw ValidationError("waypoint " + w.name + " is not finite");
    if (!names.insert(w.name).second) throw ValidationError("duplicate waypoint name " + w.name);
  }
  for (const auto& [a, b] : edges) {
    if (!names.count(a) || !names.count(b)) {
      throw ValidationError("edge " + a + " -- " + b + " references an unknown waypoint");
    }
    if (a == b) throw ValidationError("self edge on " + a);
  }
  region_polygon();
}

cells::SphericalPolygon MapFile::region_polygon() const {
  return cells::SphericalPolygon::from_ring_any_orientation(region);
}

nlohmann::json MapFile::to_json() const {
  nlohmann::json j;
  j["v"] = 1;
  j["map_id"] = map_id;
  j["frame_note"] = frame_note;
  j["confidence_sigma_m"] = confidence_sigma_m;
  j["region"] = nlohmann::json::array();
  for (const auto& ll : region) j["region"].push_back({ll.lat(), ll.lng()});
  j["landmarks"] = nlohmann::json::array();
  for (const auto& l : landmarks) {
    j["landmarks"].push_back({{"id", l.id}, {"position", vec_json(l.position)}});
  }
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : waypoints) {
    j["waypoints"].push_back({{"name", w.name}, {"position", vec_json(w.position)}, {"meta", w.meta}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges) j["edges"].push_back({a, b});
  return j;
}

MapFile MapFile::from_json(const nlohmann::json& j) {
  MapFile m;
  try {
    if (j.contains("v") && j.at("v") != 1) throw ValidationError("unsupported map file version");
    m.map_id = j.at("map_id").get<std::string>();
    m.frame_note = j.value("frame_note", "");
    m.confidence_sigma_m = j.value("confidence_sigma_m", 0.05);
    for (const auto& p : j.at("region")) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("region vertices are [lat, lng]");
      m.region.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    for (const auto& l : j.at("landmarks")) {
      m.landmarks.push_back({l.at("id").get<std::string>(), vec_from(l.at("position"), "landmark position")});
    }
    for (const auto& w : j.value("waypoints", nlohmann::json::array())) {
      Waypoint wp{w.at("name").get<std::string>(), vec_from(w.at("position"), "waypoint position"), {}};
      if (w.contains("meta")) wp.meta = w.at("meta").get<std::map<std::string, std::string>>();
      m.waypoints.push_back(std::move(wp));
    }
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("edges are [name, name] pairs");
      m.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("map file: ") + e.what());
  }
  m.validate();
  return m;
}

MapFile load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open map file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), static_cast<int>(e.byte));
  }
  return MapFile::from_json(j);
}

void save_map_file(const MapFile& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write map file " + path);
  out << map.to_json().dump(2) << "\n";
}

}  // namespace flame::mapserver
