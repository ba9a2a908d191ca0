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

#include "flame/cells/region.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "flame/errors.hpp"

namespace flame::cells {
namespace {

int sign_of(const Point& a, const Point& b, const Point& c) {
  const double det = a.cross(b).dot(c);
  return (det > 0) - (det < 0);
}

// Uncertainty in (u,v) of clipped edges, matching the S2 shape index.
constexpr double kFaceClipErrorUVCoord =
    9.0 * (1.0 / std::numbers::sqrt2) * DBL_EPSILON;
constexpr double kEdgeClipErrorUVCoord = 2.25 * DBL_EPSILON;
constexpr double kCellPadding =
    2 * (kFaceClipErrorUVCoord + kEdgeClipErrorUVCoord);

// Smallest cell on `face` whose padded bound still holds every (u,v) point
// of `u_lo..v_hi`; the face cell when the rectangle spans an axis.
CellId shrink_to_fit(int face, double u_lo, double u_hi, double v_lo,
                     double v_hi) {
  const CellId face_id = CellId::from_face(face);
  if ((u_lo <= 0 && 0 <= u_hi) || (v_lo <= 0 && 0 <= v_hi)) return face_id;
  const double pad = kCellPadding + 1.5 * DBL_EPSILON;
  const double lo[2] = {u_lo - pad, v_lo - pad};
  const double hi[2] = {u_hi + pad, v_hi + pad};
  int ij_min[2];
  int ij_xor[2];
  for (int d = 0; d < 2; ++d) {
    ij_min[d] = std::max(0, st_to_ij(uv_to_st(lo[d])));
    const int ij_max = std::min(kLimitIJ - 1, st_to_ij(uv_to_st(hi[d])));
    ij_xor[d] = ij_min[d] ^ ij_max;
  }
  const unsigned level_msb =
      (static_cast<unsigned>(ij_xor[0] | ij_xor[1]) << 1) + 1;
  const int level = kMaxLevel - (31 - std::countl_zero(level_msb));
  if (level <= 0) return face_id;
  return CellId::from_face_ij(face, ij_min[0], ij_min[1]).parent(level);
}

}  // namespace

int crossing_sign(const Point& a, const Point& b, const Point& c,
                  const Point& d) {
  if (a == c || a == d || b == c || b == d) return 0;
  const int acb = -sign_of(a, b, c);
  const int bda = sign_of(a, b, d);
  if (acb == 0 || bda == 0) return 0;
  if (acb != bda) return -1;
  const int cbd = -sign_of(c, d, b);
  if (cbd == 0) return 0;
  if (cbd != acb) return -1;
  const int dac = sign_of(c, d, a);
  if (dac == 0) return 0;
  return dac == acb ? 1 : -1;
}

// ---------------------------------------------------------------------------
// SphericalCap

SphericalCap::SphericalCap(const LatLng& center, double radius_m)
    : center_(center.to_point()), center_ll_(center) {
  if (!(radius_m > 0) || !std::isfinite(radius_m)) {
    throw ValidationError("cap radius must be a positive number of meters");
  }
  const double angle = std::min(std::numbers::pi, meters_to_radians(radius_m));
  const double chord = 2 * std::sin(0.5 * angle);
  chord2_ = chord * chord;
}

SphericalCap::SphericalCap(const Point& center, double chord2, int)
    : center_(center), center_ll_(LatLng::from_point(center)), chord2_(chord2) {}

SphericalCap SphericalCap::from_point_angle(const Point& center,
                                            double radians) {
  if (!(radians > 0)) throw ValidationError("cap angle must be positive");
  const double chord = 2 * std::sin(0.5 * std::min(std::numbers::pi, radians));
  return SphericalCap(center, chord * chord, 0);
}

double SphericalCap::radius_radians() const {
  return 2 * std::asin(0.5 * std::sqrt(chord2_));
}

bool SphericalCap::contains(const Point& p) const {
  return std::min(4.0, (center_ - p).squaredNorm()) <= chord2_;
}

SphericalCap SphericalCap::complement() const {
  if (is_full()) return SphericalCap(-center_, -1, 0);
  if (is_empty()) return SphericalCap(-center_, 4, 0);
  return SphericalCap(-center_, std::min(4.0, 4 - chord2_), 0);
}

bool SphericalCap::contains(const Cell& cell) const {
  const std::array<Point, 4> v = cell.vertices();
  for (const Point& p : v) {
    if (!contains(p)) return false;
  }
  // Slightly conservative: the complement may touch the cell boundary.
  const SphericalCap comp = complement();
  for (const Point& p : v) {
    if (comp.contains(p)) return false;
  }
  return !comp.intersects(cell, v);
}

bool SphericalCap::may_intersect(const Cell& cell) const {
  const std::array<Point, 4> v = cell.vertices();
  for (const Point& p : v) {
    if (contains(p)) return true;
  }
  return intersects(cell, v);
}

bool SphericalCap::intersects(const Cell& cell,
                              const std::array<Point, 4>& v) const {
  // A hemisphere-or-larger cap that holds no cell vertex misses the cell:
  // both the cell and the cap complement are convex.
  if (chord2_ >= 2) return false;
  if (is_empty()) return false;
  if (cell.contains(center_)) return true;
  // Only an edge interior can reach into the cap now.
  const double sin2_angle = chord2_ * (1 - 0.25 * chord2_);
  for (int k = 0; k < 4; ++k) {
    const Point edge = cell.edge_raw(k);
    const double dot = center_.dot(edge);
    if (dot > 0) continue;  // the opposite edge decides
    if (dot * dot > sin2_angle * edge.squaredNorm()) return false;
    const Point dir = edge.cross(center_);
    if (dir.dot(v[k]) < 0 && dir.dot(v[(k + 1) & 3]) > 0) return true;
  }
  return false;
}

std::vector<CellId> SphericalCap::cell_union_bound() const {
  std::vector<CellId> out;
  // Deepest level at which the cap spans at most one cell vertex.
  const int level = level_for_min_width(radius_radians()) - 1;
  if (level < 0) {
    for (int face = 0; face < kNumFaces; ++face) {
      out.push_back(CellId::from_face(face));
    }
  } else {
    CellId::from_point(center_).append_vertex_neighbors(level, &out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SphericalPolygon

SphericalPolygon::SphericalPolygon(std::vector<LatLng> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw ValidationError("polygon needs at least 3 vertices");
  }
  points_.reserve(vertices_.size());
  for (const LatLng& ll : vertices_) {
    if (!std::isfinite(ll.lat()) || !std::isfinite(ll.lng())) {
      throw ValidationError("polygon vertex is not finite");
    }
    points_.push_back(ll.to_point());
  }
  init();
}

SphericalPolygon::SphericalPolygon(std::vector<LatLng> vertices,
                                   std::vector<Point> points)
    : vertices_(std::move(vertices)), points_(std::move(points)) {
  init();
}

void SphericalPolygon::init() {
  const std::size_t n = points_.size();
  Point sum = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (points_[i] == points_[(i + 1) % n]) {
      throw ValidationError("polygon has repeated consecutive vertices");
    }
    sum += points_[i];
  }
  if (sum.norm() < 1e-12) throw ValidationError("polygon is degenerate");
  centroid_ = sum.normalized();
  for (const Point& p : points_) {
    if (p.dot(centroid_) <= 1e-9) {
      throw ValidationError("polygon must fit within a hemisphere");
    }
  }
  const Point ref = std::abs(centroid_.z()) < 0.9 ? Point(0, 0, 1)
                                                  : Point(1, 0, 0);
  axis_x_ = ref.cross(centroid_).normalized();
  axis_y_ = centroid_.cross(axis_x_);

  plane_.resize(n);
  for (std::size_t i = 0; i < n; ++i) project(points_[i], &plane_[i]);

  double area2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Plane& a = plane_[i];
    const Plane& b = plane_[(i + 1) % n];
    area2 += a.x * b.y - b.x * a.y;
  }
  if (area2 == 0) throw ValidationError("polygon has zero area");
  if (area2 < 0) throw ValidationError("polygon is clockwise");

  // Simple-loop check over non-adjacent edge pairs.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (crossing_sign(points_[i], points_[(i + 1) % n], points_[j],
                        points_[(j + 1) % n]) >= 0) {
        throw ValidationError("polygon edges " + std::to_string(i) + " and " +
                              std::to_string(j) + " intersect");
      }
    }
  }
}

SphericalPolygon SphericalPolygon::from_ring_any_orientation(
    std::vector<LatLng> ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  try {
    return SphericalPolygon(ring);
  } catch (const ValidationError& e) {
    if (std::string_view(e.what()) != "polygon is clockwise") throw;
  }
  std::reverse(ring.begin(), ring.end());
  return SphericalPolygon(std::move(ring));
}

SphericalPolygon SphericalPolygon::from_cell(CellId id) {
  // Exact vertices, so the loop edges coincide with the cell edges.
  const Cell cell(id);
  std::vector<LatLng> ring;
  std::vector<Point> points;
  for (const Point& v : cell.vertices()) {
    ring.push_back(LatLng::from_point(v));
    points.push_back(v);
  }
  return SphericalPolygon(std::move(ring), std::move(points));
}

bool SphericalPolygon::project(const Point& p, Plane* out) const {
  const double d = p.dot(centroid_);
  if (d <= 0) return false;
  const Point q = p / d;
  out->x = q.dot(axis_x_);
  out->y = q.dot(axis_y_);
  return true;
}

bool SphericalPolygon::contains(const Point& p) const {
  Plane q;
  if (!project(p, &q)) return false;
  bool inside = false;
  const std::size_t n = plane_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Plane& a = plane_[i];
    const Plane& b = plane_[j];
    if ((a.y > q.y) != (b.y > q.y)) {
      const double x = (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x;
      if (q.x < x) inside = !inside;
    }
  }
  return inside;
}

bool SphericalPolygon::is_vertex(const Point& p) const {
  return std::find(points_.begin(), points_.end(), p) != points_.end();
}

bool SphericalPolygon::boundaries_interact(
    const Cell& cell, const std::array<Point, 4>& cv) const {
  for (const Point& p : points_) {
    if (std::find(cv.begin(), cv.end(), p) != cv.end()) continue;
    if (cell.contains(p)) return true;
  }
  const std::size_t n = points_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = points_[i];
    const Point& b = points_[(i + 1) % n];
    for (int k = 0; k < 4; ++k) {
      const Point& c = cv[k];
      const Point& d = cv[(k + 1) & 3];
      // Edges meeting at a shared vertex touch without entering.
      if (a == c || a == d || b == c || b == d) continue;
      if (crossing_sign(a, b, c, d) >= 0) return true;
    }
  }
  return false;
}

bool SphericalPolygon::contains(const Cell& cell) const {
  const std::array<Point, 4> cv = cell.vertices();
  for (const Point& p : cv) {
    if (!is_vertex(p) && !contains(p)) return false;
  }
  if (boundaries_interact(cell, cv)) return false;
  return contains(cell.center());
}

bool SphericalPolygon::may_intersect(const Cell& cell) const {
  const std::array<Point, 4> cv = cell.vertices();
  for (const Point& p : cv) {
    if (!is_vertex(p) && contains(p)) return true;
  }
  if (boundaries_interact(cell, cv)) return true;
  // Boundaries do not cross, so either one region holds the other or
  // they are disjoint.
  return contains(cell.center());
}

std::vector<CellId> SphericalPolygon::cell_union_bound() const {
  const int face = face_of(points_.front());
  bool one_face = true;
  double u_lo = 2, u_hi = -2, v_lo = 2, v_hi = -2;
  for (const Point& p : points_) {
    if (face_of(p) != face) {
      one_face = false;
      break;
    }
    double u, v;
    valid_face_xyz_to_uv(face, p, &u, &v);
    if (std::abs(u) > 1 - kCellPadding || std::abs(v) > 1 - kCellPadding) {
      one_face = false;
      break;
    }
    u_lo = std::min(u_lo, u);
    u_hi = std::max(u_hi, u);
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
  }
  if (one_face) return {shrink_to_fit(face, u_lo, u_hi, v_lo, v_hi)};

  // Geodesic edges inside a hemisphere stay within the cap through the
  // farthest vertex, so a vertex-bounding cap bounds the whole loop.
  double max_angle = 0;
  for (const Point& p : points_) {
    max_angle = std::max(
        max_angle, std::atan2(centroid_.cross(p).norm(), centroid_.dot(p)));
  }
  return SphericalCap::from_point_angle(centroid_, max_angle * (1 + 1e-9) + 1e-15)
      .cell_union_bound();
}

}  // namespace flame::cells
