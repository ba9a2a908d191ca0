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

#include "flame/cells/cell.hpp"

namespace flame::cells {

Cell::Cell(CellId id) : id_(id) {
  int i, j, orientation;
  face_ = id.to_face_ij_orientation(&i, &j, &orientation);
  orientation_ = orientation;
  level_ = id.level();
  const int size = CellId::size_ij(level_);
  const int ij[2] = {i, j};
  for (int d = 0; d < 2; ++d) {
    const int lo = ij[d] & -size;
    const int hi = lo + size;
    uv_[d][0] = st_to_uv(ij_to_st_min(lo));
    uv_[d][1] = st_to_uv(ij_to_st_min(hi));
  }
}

Point Cell::vertex_raw(int k) const {
  // k: 0 = (lo,lo), 1 = (hi,lo), 2 = (hi,hi), 3 = (lo,hi).
  const int j = (k >> 1) & 1;
  const int i = j ^ (k & 1);
  return face_uv_to_xyz(face_, uv_[0][i], uv_[1][j]);
}

std::array<Point, 4> Cell::vertices() const {
  return {vertex(0), vertex(1), vertex(2), vertex(3)};
}

Point Cell::edge_raw(int k) const {
  switch (k) {
    case 0: return v_norm(face_, uv_[1][0]);    // bottom
    case 1: return u_norm(face_, uv_[0][1]);    // right
    case 2: return -v_norm(face_, uv_[1][1]);   // top
    default: return -u_norm(face_, uv_[0][0]);  // left
  }
}

bool Cell::contains(const Point& p) const {
  double u, v;
  if (!face_xyz_to_uv(face_, p, &u, &v)) return false;
  // Expanded by DBL_EPSILON so CellId::from_point(p)'s cell always
  // contains p despite (u,v) -> (s,t) rounding.
  return u >= uv_[0][0] - DBL_EPSILON && u <= uv_[0][1] + DBL_EPSILON &&
         v >= uv_[1][0] - DBL_EPSILON && v <= uv_[1][1] + DBL_EPSILON;
}

std::array<Cell, 4> Cell::subdivide() const {
  std::array<Cell, 4> children;
  int si, ti;
  id_.center_siti(&si, &ti);
  const double mid[2] = {st_to_uv(siti_to_st(si)), st_to_uv(siti_to_st(ti))};
  CellId id = id_.child_begin();
  for (int pos = 0; pos < 4; ++pos, id = id.next()) {
    Cell& child = children[pos];
    child.face_ = face_;
    child.level_ = level_ + 1;
    child.orientation_ = orientation_ ^ kPosToOrientation[pos];
    child.id_ = id;
    const int ij = kPosToIJ[orientation_][pos];
    const int i = ij >> 1;
    const int j = ij & 1;
    child.uv_[0][i] = uv_[0][i];
    child.uv_[0][1 - i] = mid[0];
    child.uv_[1][j] = uv_[1][j];
    child.uv_[1][1 - j] = mid[1];
  }
  return children;
}

}  // namespace flame::cells
