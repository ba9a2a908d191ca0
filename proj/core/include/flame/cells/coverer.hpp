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

#ifndef FLAME_CELLS_COVERER_HPP_
#define FLAME_CELLS_COVERER_HPP_

#include <span>
#include <string>
#include <vector>

#include "flame/cells/cell_id.hpp"
#include "flame/cells/region.hpp"

namespace flame::cells {

enum class CoverMode { kInterior, kExterior };

struct CoveringParams {
  int max_cells = 8;
  int min_level = 0;
  int max_level = kMaxLevel;
  CoverMode mode = CoverMode::kExterior;

  // Device-side query covering: 8 cells, levels 0..23, interior.
  static CoveringParams query_defaults();
  // Map registration covering: 64 cells, levels 10..24, exterior.
  static CoveringParams registration_defaults();

  // Throws RangeError unless max_cells >= 1 and
  // 0 <= min_level <= max_level <= 30.
  void validate() const;

  friend bool operator==(const CoveringParams&, const CoveringParams&) =
      default;
};

// Approximates `region` by at most params.max_cells cells with disjoint
// interiors, sorted by id. Exterior coverings contain the region; interior
// coverings are contained by it and may be empty. Output is bit-compatible
// with the S2 RegionCoverer for the same region and parameters.
//
// Throws RangeError when an exterior covering needs more than max_cells
// cells because min_level forbids coarser ones.
std::vector<CellId> cover(const Region& region, const CoveringParams& params);

// Sorts, removes cells contained by others and replaces complete sibling
// groups by their parent.
void normalize_cells(std::vector<CellId>* cells);
// Replaces every cell above `min_level` by its descendants at min_level.
std::vector<CellId> denormalize_cells(std::span<const CellId> cells,
                                      int min_level);

// GeoJSON FeatureCollection; one Polygon feature per cell with its four
// vertices (closed ring, counter-clockwise) and token/level properties.
std::string cells_to_geojson(std::span<const CellId> cells);

}  // namespace flame::cells

#endif  // FLAME_CELLS_COVERER_HPP_
