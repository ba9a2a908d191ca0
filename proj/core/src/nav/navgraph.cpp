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

#include "flame/nav/navgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "flame/client/client.hpp"
#include "flame/errors.hpp"

namespace flame::nav {

std::vector<std::string> StitchedGraph::map_ids() const {
  std::set<std::string> ids;
  for (const auto& [name, n] : nodes_) {
    for (const auto& [m, p] : n.positions) ids.insert(m);
  }
  return {ids.begin(), ids.end()};
}

const std::vector<std::size_t>& StitchedGraph::incident(const std::string& name) const {
  static const std::vector<std::size_t> kNone;
  const auto it = adjacency_.find(name);
  return it == adjacency_.end() ? kNone : it->second;
}

std::size_t StitchedGraph::component_count() const {
  std::set<std::string> seen;
  std::size_t count = 0;
  for (const auto& [start, n] : nodes_) {
    if (seen.count(start)) continue;
    ++count;
    std::vector<std::string> stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      const std::string cur = stack.back();
      stack.pop_back();
      for (const std::size_t e : incident(cur)) {
        const std::string& other = edges_[e].a == cur ? edges_[e].b : edges_[e].a;
        if (seen.insert(other).second) stack.push_back(other);
      }
    }
  }
  return count;
}

nlohmann::json StitchedGraph::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [name, n] : nodes_) {
    nlohmann::json pos = nlohmann::json::object();
    for (const auto& [m, p] : n.positions) pos[m] = {p.x(), p.y(), p.z()};
    nodes.push_back({{"name", name}, {"positions", pos}, {"meta", n.meta}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}, {"per_map", e.per_map}});
  }
  return {{"nodes", nodes}, {"edges", edges}, {"warnings", warnings_}};
}

std::string StitchedGraph::to_dot() const {
  std::ostringstream out;
  out << "graph waypoints {\n";
  for (const auto& [name, n] : nodes_) {
    std::string maps;
    for (const auto& [m, p] : n.positions) maps += (maps.empty() ? "" : ",") + m;
    out << fmt::format("  \"{}\" [label=\"{}\\n[{}]\"];\n", name, name, maps);
  }
  for (const auto& e : edges_) {
    std::string maps;
    for (const auto& [m, w] : e.per_map) maps += (maps.empty() ? "" : ",") + m;
    out << fmt::format("  \"{}\" -- \"{}\" [label=\"{:.2f} m ({})\"];\n", e.a, e.b, e.weight, maps);
  }
  out << "}\n";
  return out.str();
}

StitchedGraph stitch(std::span<const mapserver::WaypointGraph> graphs, double tolerance) {
  // Sort inputs by map id so the result does not depend on input order.
  std::vector<const mapserver::WaypointGraph*> order;
  for (const auto& g : graphs) order.push_back(&g);
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) { return a->map_id < b->map_id; });

  StitchedGraph out;
  std::map<std::pair<std::string, std::string>, StitchedEdge> edges;
  std::set<std::string> seen_maps;
  for (const auto* g : order) {
    if (!seen_maps.insert(g->map_id).second) {
      throw ValidationError("map " + g->map_id + " given twice");
    }
    std::map<std::string, const mapserver::Waypoint*> local;
    for (const auto& w : g->waypoints) {
      if (!local.emplace(w.name, &w).second) {
        throw ValidationError("duplicate waypoint " + w.name + " in map " + g->map_id);
      }
      StitchedNode& n = out.nodes_[w.name];
      n.name = w.name;
      n.positions[g->map_id] = w.position;
      for (const auto& [k, v] : w.meta) n.meta.emplace(k, v);
    }
    for (const auto& [a0, b0] : g->edges) {
      const auto ia = local.find(a0);
      const auto ib = local.find(b0);
      if (ia == local.end() || ib == local.end()) {
        throw ValidationError("edge " + a0 + " -- " + b0 + " in map " + g->map_id +
                              " references an unknown waypoint");
      }
      const double len = (ia->second->position - ib->second->position).norm();
      if (!(len > 0)) throw ValidationError("zero-length edge " + a0 + " -- " + b0);
      const auto key = std::minmax(a0, b0);
      StitchedEdge& e = edges[{key.first, key.second}];
      e.a = key.first;
      e.b = key.second;
      e.per_map[g->map_id] = len;
    }
  }
  for (auto& [key, e] : edges) {
    double sum = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0;
    for (const auto& [m, w] : e.per_map) {
      sum += w;
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    e.weight = sum / static_cast<double>(e.per_map.size());
    if (hi - lo > tolerance) {
      out.warnings_.push_back(fmt::format("edge {} -- {}: lengths differ by {:.3f} m across maps",
                                          e.a, e.b, hi - lo));
    }
    out.adjacency_[e.a].push_back(out.edges_.size());
    out.adjacency_[e.b].push_back(out.edges_.size());
    out.edges_.push_back(e);
  }
  // Pairwise distances between waypoints shared by two maps.
  const auto ids = out.map_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      std::vector<const StitchedNode*> shared;
      for (const auto& [name, n] : out.nodes_) {
        if (n.positions.count(ids[i]) && n.positions.count(ids[j])) shared.push_back(&n);
      }
      for (std::size_t u = 0; u < shared.size(); ++u) {
        for (std::size_t v = u + 1; v < shared.size(); ++v) {
          const double di = (shared[u]->positions.at(ids[i]) - shared[v]->positions.at(ids[i])).norm();
          const double dj = (shared[u]->positions.at(ids[j]) - shared[v]->positions.at(ids[j])).norm();
          if (std::abs(di - dj) > tolerance &&
              !edges.count(std::minmax(shared[u]->name, shared[v]->name))) {
            out.warnings_.push_back(fmt::format(
                "{} and {}: {:.3f} m apart in {} but {:.3f} m in {}", shared[u]->name,
                shared[v]->name, di, ids[i], dj, ids[j]));
          }
        }
      }
    }
  }
  return out;
}

nlohmann::json Route::to_json() const {
  nlohmann::json hops_json = nlohmann::json::array();
  for (const auto& h : hops) hops_json.push_back({{"name", h.name}, {"map_id", h.map_id}});
  return {{"reachable", reachable}, {"length_m", length_m}, {"hops", hops_json}};
}

Route route(const StitchedGraph& g, const std::string& from, const std::string& to) {
  if (!g.has_node(from)) throw LookupError("unknown waypoint " + from);
  if (!g.has_node(to)) throw LookupError("unknown waypoint " + to);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::map<std::string, double> dist;
  std::map<std::string, std::pair<std::string, std::size_t>> pred;  // node -> (prev, edge)
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0;
  pq.emplace(0, from);
  std::set<std::string> done;
  while (!pq.empty()) {
    const auto [d, cur] = pq.top();
    pq.pop();
    if (!done.insert(cur).second) continue;
    if (cur == to) break;
    for (const std::size_t ei : g.incident(cur)) {
      const StitchedEdge& e = g.edges()[ei];
      const std::string& next = e.a == cur ? e.b : e.a;
      if (done.count(next)) continue;
      const double nd = d + e.weight;
      const auto it = dist.find(next);
      const double old = it == dist.end() ? kInf : it->second;
      if (nd < old || (nd == old && cur < pred.at(next).first)) {
        dist[next] = nd;
        pred[next] = {cur, ei};
        pq.emplace(nd, next);
      }
    }
  }
  Route r;
  if (!dist.count(to)) return r;
  r.reachable = true;
  r.length_m = dist.at(to);
  std::vector<std::pair<std::string, std::size_t>> back;  // (node, edge into it)
  for (std::string cur = to; cur != from; cur = pred.at(cur).first) {
    back.emplace_back(cur, pred.at(cur).second);
  }
  std::reverse(back.begin(), back.end());
  // Keep the same map across hops while the edges allow it.
  std::string current_map;
  if (!back.empty()) {
    current_map = g.edges()[back.front().second].per_map.begin()->first;
  } else {
    current_map = g.nodes().at(from).positions.begin()->first;
  }
  r.hops.push_back({from, current_map});
  for (const auto& [node, ei] : back) {
    const auto& per_map = g.edges()[ei].per_map;
    if (!per_map.count(current_map)) current_map = per_map.begin()->first;
    r.hops.push_back({node, current_map});
  }
  if (!back.empty()) r.hops.front().map_id = r.hops[1].map_id;
  return r;
}

std::vector<PathPoint> path_positions(const StitchedGraph& g, const Route& r,
                                      const std::string& active_map_id, const pose::Pose& p_a,
                                      const pose::Pose& p_r) {
  // Maps reachable from the active one by chaining shared waypoints.
  std::set<std::string> reachable{active_map_id};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [name, n] : g.nodes()) {
      const bool touches = std::any_of(n.positions.begin(), n.positions.end(),
                                       [&](const auto& kv) { return reachable.count(kv.first); });
      if (!touches) continue;
      for (const auto& [m, p] : n.positions) grew |= reachable.insert(m).second;
    }
  }
  std::vector<PathPoint> out;
  for (const RouteHop& h : r.hops) {
    const StitchedNode& n = g.nodes().at(h.name);
    PathPoint pt{h.name, h.map_id, std::nullopt, false};
    if (const auto it = n.positions.find(active_map_id); it != n.positions.end()) {
      pt.map_id = active_map_id;
      pt.position = client::waypoint_to_app_frame(p_a, p_r, it->second);
    } else if (std::any_of(n.positions.begin(), n.positions.end(),
                           [&](const auto& kv) { return reachable.count(kv.first); })) {
      pt.deferred = true;
    } else {
      throw ValidationError("waypoint " + h.name + " is not connected to map " + active_map_id);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace flame::nav
