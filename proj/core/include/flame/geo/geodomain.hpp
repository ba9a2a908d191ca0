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

#ifndef FLAME_GEO_GEODOMAIN_HPP_
#define FLAME_GEO_GEODOMAIN_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flame/cells/cell_id.hpp"
#include "flame/cells/coverer.hpp"
#include "flame/cells/latlng.hpp"

namespace flame::geo {

inline constexpr std::string_view kDefaultSuffix = "flame.test";

// DNS name for a cell: one label per child digit, deepest first, then the
// face digit, then the suffix. Face 5 path [3,1] under "loc" is
// "1.3.5.loc".
class GeoDomain {
 public:
  // Throws ValidationError for an empty or malformed suffix.
  GeoDomain(cells::CellId cell, std::string_view suffix);

  // Parses a rendered name. The cell labels are the leading single-digit
  // labels; everything after them is the suffix, which must match
  // `expected_suffix` when given. Throws ParseError whose position() is the
  // offending label index (0 = leftmost).
  static GeoDomain parse(std::string_view name,
                         std::optional<std::string_view> expected_suffix = {});

  cells::CellId cell() const { return cell_; }
  const std::string& suffix() const { return suffix_; }
  int level() const { return cell_.level(); }
  // Digit labels, leftmost (deepest) first; the last one is the face.
  std::vector<std::string> labels() const;
  std::string to_string() const;

  friend bool operator==(const GeoDomain&, const GeoDomain&) = default;

 private:
  cells::CellId cell_;
  std::string suffix_;
};

GeoDomain cell_to_geodomain(cells::CellId cell, std::string_view suffix);
cells::CellId geodomain_to_cell(const GeoDomain& domain);

// Strict ancestors, deepest first, down to the face domain.
std::vector<GeoDomain> parent_domains(const GeoDomain& domain);

// Device position estimate with its 95% error radius.
struct CoarseLocation {
  cells::LatLng center;
  double error_radius_m = 0;

  void validate() const;  // radius must be finite and > 0
};

struct QueryConfig {
  cells::CoveringParams covering = cells::CoveringParams::query_defaults();
  // Extra descendant levels of each base cell to query (0..3).
  int child_levels = 0;
  // Also query every ancestor of the cell at this level holding the
  // location center; -1 disables. Keeps discovery sound when the base
  // cells are coarser than the registered cells around the center.
  int center_chain_level = 24;
  std::string suffix = std::string(kDefaultSuffix);

  void validate() const;
};

struct QueryCells {
  std::vector<cells::CellId> base;  // covering (or fallback) cells
  // Deduplicated cells to query, by level descending then raw id.
  std::vector<cells::CellId> all;
};

QueryCells query_cells(const CoarseLocation& loc, const QueryConfig& cfg);
std::vector<GeoDomain> query_set(const CoarseLocation& loc,
                                 const QueryConfig& cfg);

}  // namespace flame::geo

#endif  // FLAME_GEO_GEODOMAIN_HPP_
