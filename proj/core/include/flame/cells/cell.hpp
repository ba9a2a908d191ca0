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

#ifndef FLAME_CELLS_CELL_HPP_
#define FLAME_CELLS_CELL_HPP_

#include <array>

#include "flame/cells/cell_id.hpp"

namespace flame::cells {

// A CellId together with its (u,v) bounds on the face, for geometric tests.
class Cell {
 public:
  Cell() = default;
  explicit Cell(CellId id);

  CellId id() const { return id_; }
  int face() const { return face_; }
  int level() const { return level_; }
  int orientation() const { return orientation_; }

  // Corner k in counter-clockwise order starting at (u_lo, v_lo).
  Point vertex_raw(int k) const;
  Point vertex(int k) const { return vertex_raw(k).normalized(); }
  std::array<Point, 4> vertices() const;

  // Inward-facing normal (not unit length) of the edge from vertex k to
  // vertex k+1.
  Point edge_raw(int k) const;

  Point center() const { return id_.center_point().normalized(); }

  // Point-in-cell, inclusive of the boundary.
  bool contains(const Point& p) const;

  std::array<Cell, 4> subdivide() const;

  double u_lo() const { return uv_[0][0]; }
  double u_hi() const { return uv_[0][1]; }
  double v_lo() const { return uv_[1][0]; }
  double v_hi() const { return uv_[1][1]; }

 private:
  CellId id_;
  int face_ = 0;
  int level_ = 0;
  int orientation_ = 0;
  double uv_[2][2] = {{0, 0}, {0, 0}};  // [axis][lo/hi]
};

}  // namespace flame::cells

#endif  // FLAME_CELLS_CELL_HPP_
