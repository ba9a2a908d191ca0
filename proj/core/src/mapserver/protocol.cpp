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

#include "flame/mapserver/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "flame/errors.hpp"

namespace flame::mapserver {
namespace {

pose::Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("position must be [x, y, z]");
  pose::Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw ValidationError("position must be finite");
  return v;
}

nlohmann::json vec_json(const pose::Vec3& v) { return {v.x(), v.y(), v.z()}; }

void check_version(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  if (j.value("v", 0) != kProtocolVersion) throw ValidationError("unsupported protocol version");
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace

nlohmann::json LocationCues::to_json() const {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : observations) obs.push_back({{"id", o.landmark_id}, {"position", vec_json(o.position)}});
  return {{"v", kProtocolVersion},
          {"cue_type", kLandmarkCueType},
          {"timestamp", timestamp},
          {"observations", obs}};
}

LocationCues LocationCues::from_json(const nlohmann::json& j) {
  return guarded([&] {
    check_version(j);
    if (j.value("cue_type", std::string(kLandmarkCueType)) != kLandmarkCueType) {
      throw ValidationError("unsupported cue_type");
    }
    LocationCues c;
    c.timestamp = j.value("timestamp", 0.0);
    for (const auto& o : j.at("observations")) {
      Observation ob{o.at("id").get<std::string>(), vec_from(o.at("position"))};
      if (ob.landmark_id.empty()) throw ValidationError("observation id must be non-empty");
      c.observations.push_back(std::move(ob));
    }
    return c;
  });
}

nlohmann::json LocalizeResult::to_json() const {
  nlohmann::json j{{"v", kProtocolVersion},
                   {"status", ok ? "ok" : "localization_failed"},
                   {"confidence", confidence},
                   {"matched_count", matched_count}};
  if (ok) {
    j["pose"] = pose.to_json();
    j["rmsd_m"] = rmsd_m;
  } else {
    j["error"] = {{"code", error_code}, {"message", message}};
  }
  return j;
}

LocalizeResult LocalizeResult::from_json(const nlohmann::json& j) {
  return guarded([&] {
    check_version(j);
    LocalizeResult r;
    r.ok = j.at("status").get<std::string>() == "ok";
    r.confidence = j.at("confidence").get<double>();
    r.matched_count = j.at("matched_count").get<int>();
    if (r.ok) {
      r.pose = pose::Pose::from_json(j.at("pose"));
      r.rmsd_m = j.at("rmsd_m").get<double>();
    } else {
      r.error_code = j.at("error").at("code").get<std::string>();
      r.message = j.at("error").value("message", "");
    }
    return r;
  });
}

nlohmann::json CapabilitySet::to_json() const {
  return {{"v", kProtocolVersion},
          {"map_id", map_id},
          {"protocol", protocol},
          {"cue_types", cue_types},
          {"waypoints", waypoints}};
}

CapabilitySet CapabilitySet::from_json(const nlohmann::json& j) {
  return guarded([&] {
    check_version(j);
    CapabilitySet c;
    c.map_id = j.at("map_id").get<std::string>();
    c.protocol = j.at("protocol").get<int>();
    c.cue_types = j.at("cue_types").get<std::vector<std::string>>();
    c.waypoints = j.at("waypoints").get<bool>();
    return c;
  });
}

bool CapabilitySet::supports_any(const std::vector<std::string>& offered) const {
  return std::any_of(offered.begin(), offered.end(), [&](const std::string& t) {
    return std::find(cue_types.begin(), cue_types.end(), t) != cue_types.end();
  });
}

nlohmann::json WaypointGraph::to_json() const {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : waypoints) {
    wps.push_back({{"name", w.name}, {"position", vec_json(w.position)}, {"meta", w.meta}});
  }
  nlohmann::json es = nlohmann::json::array();
  for (const auto& [a, b] : edges) es.push_back({a, b});
  return {{"v", kProtocolVersion}, {"map_id", map_id}, {"waypoints", wps}, {"edges", es}};
}

WaypointGraph WaypointGraph::from_json(const nlohmann::json& j) {
  return guarded([&] {
    check_version(j);
    WaypointGraph g;
    g.map_id = j.at("map_id").get<std::string>();
    for (const auto& w : j.at("waypoints")) {
      Waypoint wp{w.at("name").get<std::string>(), vec_from(w.at("position")), {}};
      if (w.contains("meta")) wp.meta = w.at("meta").get<std::map<std::string, std::string>>();
      g.waypoints.push_back(std::move(wp));
    }
    for (const auto& e : j.at("edges")) {
      g.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    }
    return g;
  });
}

LocalizeResult localize(const LocationCues& cues, const MapFile& map) {
  std::unordered_map<std::string_view, const pose::Vec3*> by_id;
  for (const auto& l : map.landmarks) by_id.emplace(l.id, &l.position);
  std::vector<pose::PointPair> pairs;
  std::unordered_set<std::string_view> used;
  for (const auto& o : cues.observations) {
    const auto it = by_id.find(o.landmark_id);
    if (it == by_id.end() || !used.insert(o.landmark_id).second) continue;
    pairs.push_back({o.position, *it->second});
  }
  LocalizeResult r;
  r.matched_count = static_cast<int>(pairs.size());
  if (pairs.size() < 3) {
    r.error_code = "insufficient_matches";
    r.message = std::to_string(pairs.size()) + " landmark(s) matched, 3 required";
    return r;
  }
  try {
    const auto k = pose::kabsch(pairs);
    r.ok = true;
    r.pose = k.pose;
    r.rmsd_m = k.rmsd;
    r.confidence = std::clamp(std::exp(-k.rmsd / map.confidence_sigma_m), 0.0, 1.0);
  } catch (const DegenerateGeometryError& e) {
    r.error_code = "degenerate_geometry";
    r.message = e.what();
  }
  return r;
}

CapabilitySet capabilities(const MapFile& map) {
  CapabilitySet c;
  c.map_id = map.map_id;
  c.cue_types = {std::string(kLandmarkCueType)};
  c.waypoints = !map.waypoints.empty();
  return c;
}

WaypointGraph waypoint_graph(const MapFile& map) {
  return {map.map_id, map.waypoints, map.edges};
}

}  // namespace flame::mapserver
