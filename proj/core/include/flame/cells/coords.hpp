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

// Cube-face projection shared by CellId and Cell.
//
// A point on the unit sphere is projected onto one of six cube faces, giving
// (u,v) in [-1,1]. A quadratic transform maps (u,v) to (s,t) in [0,1] so that
// cells at the same level have similar areas, and (s,t) is discretized into
// 30-bit (i,j) leaf coordinates. The arithmetic here intentionally follows the
// S2 geometry library so that cell ids are bit-compatible with it.

#ifndef FLAME_CELLS_COORDS_HPP_
#define FLAME_CELLS_COORDS_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>

namespace flame::cells {

using Point = Eigen::Vector3d;

inline constexpr int kMaxLevel = 30;
inline constexpr int kNumFaces = 6;
inline constexpr int kLimitIJ = 1 << kMaxLevel;
inline constexpr std::uint32_t kMaxSiTi = 1u << (kMaxLevel + 1);

// Hilbert curve orientation bits.
inline constexpr int kSwapMask = 0x01;
inline constexpr int kInvertMask = 0x02;

// kIJtoPos[orientation][ij] -> child position along the curve.
inline constexpr int kIJtoPos[4][4] = {
    {0, 1, 3, 2},  // canonical order
    {0, 3, 1, 2},  // axes swapped
    {2, 3, 1, 0},  // bits inverted
    {2, 1, 3, 0},  // swapped & inverted
};

// kPosToIJ[orientation][pos] -> ij index of the child at that position.
inline constexpr int kPosToIJ[4][4] = {
    {0, 1, 3, 2},
    {0, 2, 3, 1},
    {3, 2, 0, 1},
    {3, 1, 0, 2},
};

// Orientation change applied when descending into the child at `pos`.
inline constexpr int kPosToOrientation[4] = {kSwapMask, 0, 0,
                                             kInvertMask | kSwapMask};

inline double st_to_uv(double s) {
  if (s >= 0.5) return (1 / 3.) * (4 * s * s - 1);
  return (1 / 3.) * (1 - 4 * (1 - s) * (1 - s));
}

inline double uv_to_st(double u) {
  if (u >= 0) return 0.5 * std::sqrt(1 + 3 * u);
  return 1 - 0.5 * std::sqrt(1 - 3 * u);
}

inline int st_to_ij(double s) {
  return std::max(
      0, std::min(kLimitIJ - 1,
                  static_cast<int>(std::lrint(kLimitIJ * s - 0.5))));
}

inline double ij_to_st_min(int i) { return (1.0 / kLimitIJ) * i; }

inline double siti_to_st(std::uint32_t si) { return (1.0 / kMaxSiTi) * si; }

inline Point face_uv_to_xyz(int face, double u, double v) {
  switch (face) {
    case 0: return Point(1, u, v);
    case 1: return Point(-u, 1, v);
    case 2: return Point(-u, -v, 1);
    case 3: return Point(-1, -v, -u);
    case 4: return Point(v, -1, -u);
    default: return Point(v, u, -1);
  }
}

inline void valid_face_xyz_to_uv(int face, const Point& p, double* pu,
                                 double* pv) {
  switch (face) {
    case 0: *pu = p[1] / p[0]; *pv = p[2] / p[0]; break;
    case 1: *pu = -p[0] / p[1]; *pv = p[2] / p[1]; break;
    case 2: *pu = -p[0] / p[2]; *pv = -p[1] / p[2]; break;
    case 3: *pu = p[2] / p[0]; *pv = p[1] / p[0]; break;
    case 4: *pu = p[2] / p[1]; *pv = -p[0] / p[1]; break;
    default: *pu = -p[1] / p[2]; *pv = -p[0] / p[2]; break;
  }
}

inline int largest_abs_component(const Point& p) {
  const Point a = p.cwiseAbs();
  return a[0] > a[1] ? (a[0] > a[2] ? 0 : 2) : (a[1] > a[2] ? 1 : 2);
}

inline int face_of(const Point& p) {
  int face = largest_abs_component(p);
  if (p[face] < 0) face += 3;
  return face;
}

inline int xyz_to_face_uv(const Point& p, double* pu, double* pv) {
  const int face = face_of(p);
  valid_face_xyz_to_uv(face, p, pu, pv);
  return face;
}

// Returns false when `p` is not on the positive side of `face`.
inline bool face_xyz_to_uv(int face, const Point& p, double* pu, double* pv) {
  if (face < 3) {
    if (p[face] <= 0) return false;
  } else {
    if (p[face - 3] >= 0) return false;
  }
  valid_face_xyz_to_uv(face, p, pu, pv);
  return true;
}

// Normals (not unit length) of the great circles u = const and v = const.
inline Point u_norm(int face, double u) {
  switch (face) {
    case 0: return Point(u, -1, 0);
    case 1: return Point(1, u, 0);
    case 2: return Point(1, 0, u);
    case 3: return Point(-u, 0, 1);
    case 4: return Point(0, -u, 1);
    default: return Point(0, -1, -u);
  }
}

inline Point v_norm(int face, double v) {
  switch (face) {
    case 0: return Point(-v, 0, 1);
    case 1: return Point(0, -v, 1);
    case 2: return Point(0, -1, -v);
    case 3: return Point(v, -1, 0);
    case 4: return Point(1, v, 0);
    default: return Point(1, 0, v);
  }
}

// Level-independent metric constants for the quadratic projection.
inline constexpr double kMinWidthDeriv = 2 * 1.41421356237309504880 / 3;

// Largest level whose cells all have min width >= `value` (radians).
inline int level_for_min_width(double value) {
  if (value <= 0) return kMaxLevel;
  const int level = std::ilogb(kMinWidthDeriv / value);
  return std::max(0, std::min(kMaxLevel, level));
}

}  // namespace flame::cells

#endif  // FLAME_CELLS_COORDS_HPP_
