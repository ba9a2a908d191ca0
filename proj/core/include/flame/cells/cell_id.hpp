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

#ifndef FLAME_CELLS_CELL_ID_HPP_
#define FLAME_CELLS_CELL_ID_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flame/cells/coords.hpp"
#include "flame/cells/latlng.hpp"

namespace flame::cells {

// 64-bit hierarchical cell identifier.
//
// Layout (most significant bit first): 3 face bits, then 2 bits per level
// giving the child position along the Hilbert curve, then a single 1 bit
// marking the level, then zero padding. A face cell is therefore
// face << 61 | 1 << 60 and a leaf (level 30) cell ends in binary 1.
//
// Levels outside [0, 30] and non-existent ancestors raise RangeError.
class CellId {
 public:
  static constexpr int kFaceBits = 3;
  static constexpr int kPosBits = 2 * kMaxLevel + 1;

  constexpr CellId() = default;
  constexpr explicit CellId(std::uint64_t id) : id_(id) {}

  static CellId from_face(int face);
  static CellId from_face_ij(int face, int i, int j);
  // Face ij coordinates that may lie just outside the face; the cell is
  // looked up on whichever face the point wraps onto.
  static CellId from_face_ij_wrap(int face, int i, int j);
  static CellId from_point(const Point& p);
  static CellId from_latlng(const LatLng& ll, int level);
  // `path` holds one child position (0..3) per level below the face.
  static CellId from_face_path(int face, std::span<const int> path);
  static std::optional<CellId> from_token(std::string_view token);

  static constexpr std::uint64_t lsb_for_level(int level) {
    return std::uint64_t{1} << (2 * (kMaxLevel - level));
  }
  static constexpr int size_ij(int level) { return 1 << (kMaxLevel - level); }

  constexpr std::uint64_t id() const { return id_; }
  bool is_valid() const;
  int face() const { return static_cast<int>(id_ >> kPosBits); }
  int level() const;
  constexpr std::uint64_t lsb() const { return id_ & (~id_ + 1); }
  bool is_leaf() const { return (id_ & 1) != 0; }
  bool is_face() const { return (id_ & (lsb_for_level(0) - 1)) == 0; }

  // Child position (0..3) of this cell's ancestor at `level` within its
  // parent; `level` in [1, level()].
  int child_position(int level) const;
  // Child positions from level 1 down to level().
  std::vector<int> path() const;

  CellId parent() const;
  CellId parent(int level) const;
  CellId child(int position) const;
  std::array<CellId, 4> children() const;

  CellId range_min() const { return CellId(id_ - (lsb() - 1)); }
  CellId range_max() const { return CellId(id_ + (lsb() - 1)); }
  CellId child_begin() const;
  CellId child_begin(int level) const;
  CellId child_end(int level) const;
  CellId next() const { return CellId(id_ + (lsb() << 1)); }
  CellId prev() const { return CellId(id_ - (lsb() << 1)); }

  bool contains(CellId other) const;
  bool intersects(CellId other) const;
  // Level of the lowest common ancestor, or -1 when on different faces.
  int common_ancestor_level(CellId other) const;

  int to_face_ij_orientation(int* pi, int* pj, int* orientation) const;
  // Center in (si,ti) coordinates, units of half a leaf cell.
  int center_siti(int* psi, int* pti) const;
  // Cell center projected onto the unit sphere (not normalized).
  Point center_point() const;
  LatLng center_latlng() const;

  // The cells at `level` (< level()) sharing the vertex closest to this
  // cell: 4 cells, or 3 at a cube corner.
  void append_vertex_neighbors(int level, std::vector<CellId>* output) const;

  // Lowercase hex with trailing zero digits removed ("X" for id 0).
  std::string to_token() const;
  std::string to_string() const;

  friend constexpr auto operator<=>(CellId, CellId) = default;

 private:
  CellId parent_unchecked(int level) const {
    const std::uint64_t new_lsb = lsb_for_level(level);
    return CellId((id_ & (~new_lsb + 1)) | new_lsb);
  }

  std::uint64_t id_ = 0;
};

}  // namespace flame::cells

template <>
struct std::hash<flame::cells::CellId> {
  std::size_t operator()(flame::cells::CellId c) const noexcept {
    return std::hash<std::uint64_t>{}(c.id());
  }
};

#endif  // FLAME_CELLS_CELL_ID_HPP_
