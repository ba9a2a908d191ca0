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

#include "flame/cells/coverer.hpp"

#include <algorithm>
#include <deque>
#include <queue>

#include <nlohmann/json.hpp>

#include "flame/cells/cell.hpp"
#include "flame/errors.hpp"

namespace flame::cells {
namespace {

bool are_siblings(CellId a, CellId b, CellId c, CellId d) {
  if ((a.id() ^ b.id() ^ c.id()) != d.id()) return false;
  std::uint64_t mask = d.lsb() << 1;
  mask = ~(mask + (mask << 1));
  const std::uint64_t masked = d.id() & mask;
  return (a.id() & mask) == masked && (b.id() & mask) == masked &&
         (c.id() & mask) == masked && !d.is_face();
}

struct Candidate {
  Cell cell;
  bool is_terminal = false;
  int num_children = 0;
  Candidate* children[4] = {nullptr, nullptr, nullptr, nullptr};
};

struct QueueOrder {
  bool operator()(const std::pair<int, Candidate*>& x,
                  const std::pair<int, Candidate*>& y) const {
    return x.first < y.first;
  }
};

// One covering computation. Follows the reference best-first refinement
// step for step, including heap tie order, so results match exactly.
class Coverer {
 public:
  Coverer(const Region& region, int max_cells, int min_level, int max_level,
          bool interior)
      : region_(region),
        max_cells_(max_cells),
        min_level_(min_level),
        max_level_(max_level),
        interior_(interior) {}

  std::vector<CellId> run() {
    initial_candidates();
    while (!pq_.empty() &&
           (!interior_ || result_.size() < static_cast<std::size_t>(max_cells_))) {
      Candidate* c = pq_.top().second;
      pq_.pop();
      if (interior_ || c->cell.level() < min_level_ || c->num_children == 1 ||
          result_.size() + pq_.size() + c->num_children <=
              static_cast<std::size_t>(max_cells_)) {
        for (int i = 0; i < c->num_children; ++i) {
          if (interior_ && result_.size() >= static_cast<std::size_t>(max_cells_)) {
            continue;
          }
          add_candidate(c->children[i]);
        }
      } else {
        c->is_terminal = true;
        add_candidate(c);
      }
    }
    normalize_cells(&result_);
    if (min_level_ > 0) result_ = denormalize_cells(result_, min_level_);
    return std::move(result_);
  }

  // Bounding cells of the region reduced to at most `max_cells`.
  std::vector<CellId> fast_covering() {
    std::vector<CellId> cells = region_.cell_union_bound();
    normalize_covering(&cells);
    return cells;
  }

 private:
  Candidate* new_candidate(const Cell& cell) {
    if (!region_.may_intersect(cell)) return nullptr;
    bool terminal = false;
    if (cell.level() >= min_level_) {
      if (interior_) {
        if (region_.contains(cell)) {
          terminal = true;
        } else if (cell.level() + 1 > max_level_) {
          return nullptr;
        }
      } else if (cell.level() + 1 > max_level_ || region_.contains(cell)) {
        terminal = true;
      }
    }
    Candidate& c = arena_.emplace_back();
    c.cell = cell;
    c.is_terminal = terminal;
    return &c;
  }

  int expand_children(Candidate* candidate) {
    int num_terminals = 0;
    for (const Cell& child_cell : candidate->cell.subdivide()) {
      Candidate* child = new_candidate(child_cell);
      if (child == nullptr) continue;
      candidate->children[candidate->num_children++] = child;
      if (child->is_terminal) ++num_terminals;
    }
    return num_terminals;
  }

  void add_candidate(Candidate* c) {
    if (c == nullptr) return;
    if (c->is_terminal) {
      result_.push_back(c->cell.id());
      return;
    }
    const int num_terminals = expand_children(c);
    if (c->num_children == 0) return;
    if (!interior_ && num_terminals == 4 && c->cell.level() >= min_level_) {
      c->is_terminal = true;
      add_candidate(c);
      return;
    }
    // Larger cells first, then fewer children, then fewer terminals.
    const int priority =
        -((((c->cell.level() << 2) + c->num_children) << 2) + num_terminals);
    pq_.emplace(priority, c);
  }

  void initial_candidates() {
    Coverer tmp(region_, std::min(4, max_cells_), 0, max_level_, false);
    for (CellId id : tmp.fast_covering()) {
      add_candidate(new_candidate(Cell(id)));
    }
  }

  void normalize_covering(std::vector<CellId>* covering) const {
    if (max_level_ < kMaxLevel) {
      for (CellId& id : *covering) {
        if (id.level() > max_level_) id = id.parent(max_level_);
      }
    }
    normalize_cells(covering);
    while (covering->size() > static_cast<std::size_t>(max_cells_)) {
      int best_index = -1;
      int best_level = -1;
      for (std::size_t i = 0; i + 1 < covering->size(); ++i) {
        const int level =
            (*covering)[i].common_ancestor_level((*covering)[i + 1]);
        if (level > best_level) {
          best_level = level;
          best_index = static_cast<int>(i);
        }
      }
      if (best_level < min_level_) break;
      (*covering)[best_index] = (*covering)[best_index].parent(best_level);
      normalize_cells(covering);
    }
    if (min_level_ > 0) *covering = denormalize_cells(*covering, min_level_);
  }

  const Region& region_;
  const int max_cells_;
  const int min_level_;
  const int max_level_;
  const bool interior_;
  std::deque<Candidate> arena_;
  std::priority_queue<std::pair<int, Candidate*>,
                      std::vector<std::pair<int, Candidate*>>, QueueOrder>
      pq_;
  std::vector<CellId> result_;
};

}  // namespace

CoveringParams CoveringParams::query_defaults() {
  return {8, 0, 23, CoverMode::kInterior};
}

CoveringParams CoveringParams::registration_defaults() {
  return {64, 10, 24, CoverMode::kExterior};
}

void CoveringParams::validate() const {
  if (max_cells < 1) throw RangeError("max_cells must be at least 1");
  if (min_level < 0 || max_level > kMaxLevel || min_level > max_level) {
    throw RangeError("need 0 <= min_level <= max_level <= 30, got " +
                     std::to_string(min_level) + ".." +
                     std::to_string(max_level));
  }
}

std::vector<CellId> cover(const Region& region, const CoveringParams& params) {
  params.validate();
  const bool interior = params.mode == CoverMode::kInterior;
  Coverer coverer(region, params.max_cells, params.min_level, params.max_level,
                  interior);
  std::vector<CellId> out = coverer.run();
  if (!interior && out.size() > static_cast<std::size_t>(params.max_cells)) {
    throw RangeError("covering needs " + std::to_string(out.size()) +
                     " cells at min_level " + std::to_string(params.min_level) +
                     " but max_cells is " + std::to_string(params.max_cells));
  }
  return out;
}

void normalize_cells(std::vector<CellId>* cells) {
  std::vector<CellId>& ids = *cells;
  std::sort(ids.begin(), ids.end());
  std::size_t out = 0;
  for (CellId id : ids) {
    if (out > 0 && ids[out - 1].contains(id)) continue;
    while (out > 0 && id.contains(ids[out - 1])) --out;
    while (out >= 3 && are_siblings(ids[out - 3], ids[out - 2], ids[out - 1], id)) {
      id = id.parent();
      out -= 3;
    }
    ids[out++] = id;
  }
  ids.resize(out);
}

std::vector<CellId> denormalize_cells(std::span<const CellId> cells,
                                      int min_level) {
  std::vector<CellId> out;
  out.reserve(cells.size());
  for (CellId id : cells) {
    if (id.level() >= min_level) {
      out.push_back(id);
      continue;
    }
    for (CellId c = id.child_begin(min_level), end = id.child_end(min_level);
         c != end; c = c.next()) {
      out.push_back(c);
    }
  }
  return out;
}

std::string cells_to_geojson(std::span<const CellId> cells) {
  nlohmann::json features = nlohmann::json::array();
  for (CellId id : cells) {
    const Cell cell(id);
    nlohmann::json ring = nlohmann::json::array();
    for (int k = 0; k <= 4; ++k) {
      const LatLng ll = LatLng::from_point(cell.vertex(k & 3));
      ring.push_back({ll.lng(), ll.lat()});
    }
    features.push_back({
        {"type", "Feature"},
        {"properties", {{"token", id.to_token()}, {"level", id.level()}}},
        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
    });
  }
  return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}
      .dump();
}

}  // namespace flame::cells
