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

#ifndef FLAME_CELLS_REGION_HPP_
#define FLAME_CELLS_REGION_HPP_

#include <vector>

#include "flame/cells/cell.hpp"
#include "flame/cells/latlng.hpp"

namespace flame::cells {

// Geometry the coverer can approximate with cells.
class Region {
 public:
  virtual ~Region() = default;

  virtual bool contains(const Point& p) const = 0;
  // True only if the whole cell lies inside the region.
  virtual bool contains(const Cell& cell) const = 0;
  // False only if the cell and region are certainly disjoint.
  virtual bool may_intersect(const Cell& cell) const = 0;
  // A small (<= 6) set of cells whose union contains the region.
  virtual std::vector<CellId> cell_union_bound() const = 0;
};

// Disc on the sphere: all points within an angular radius of a center.
class SphericalCap final : public Region {
 public:
  // radius_m > 0; converted with kEarthRadiusMeters, capped at pi radians.
  SphericalCap(const LatLng& center, double radius_m);
  static SphericalCap from_point_angle(const Point& center, double radians);

  const LatLng& center() const { return center_ll_; }
  const Point& center_point() const { return center_; }
  double radius_m() const { return radians_to_meters(radius_radians()); }
  double radius_radians() const;
  // Squared chord length between the center and the boundary.
  double chord2() const { return chord2_; }

  bool contains(const Point& p) const override;
  bool contains(const Cell& cell) const override;
  bool may_intersect(const Cell& cell) const override;
  std::vector<CellId> cell_union_bound() const override;

 private:
  SphericalCap(const Point& center, double chord2, int);
  // Intersection test ignoring the cell vertices (already checked).
  bool intersects(const Cell& cell, const std::array<Point, 4>& v) const;
  SphericalCap complement() const;
  bool is_full() const { return chord2_ >= 4; }
  bool is_empty() const { return chord2_ < 0; }

  Point center_;
  LatLng center_ll_;
  double chord2_ = 0;
};

// Simple loop with geodesic edges; the interior lies to the left of the
// counter-clockwise boundary. Restricted to loops that fit in an open
// hemisphere, which covers every building- or campus-sized region.
class SphericalPolygon final : public Region {
 public:
  // Throws ValidationError when there are fewer than 3 distinct vertices,
  // the loop self-intersects, is clockwise, or spans a hemisphere.
  explicit SphericalPolygon(std::vector<LatLng> vertices);
  // Accepts either winding and reverses clockwise rings (GeoJSON input).
  static SphericalPolygon from_ring_any_orientation(std::vector<LatLng> ring);
  // The quadrilateral of a cell, as a polygon.
  static SphericalPolygon from_cell(CellId id);

  const std::vector<LatLng>& vertices() const { return vertices_; }
  const std::vector<Point>& points() const { return points_; }

  bool contains(const Point& p) const override;
  bool contains(const Cell& cell) const override;
  bool may_intersect(const Cell& cell) const override;
  std::vector<CellId> cell_union_bound() const override;

 private:
  struct Plane {
    double x, y;
  };
  SphericalPolygon(std::vector<LatLng> vertices, std::vector<Point> points);
  void init();
  bool is_vertex(const Point& p) const;
  // Gnomonic projection about the centroid; geodesics map to lines.
  bool project(const Point& p, Plane* out) const;
  // Boundary interaction that is not a shared vertex or a shared edge.
  bool boundaries_interact(const Cell& cell,
                           const std::array<Point, 4>& cv) const;

  std::vector<LatLng> vertices_;
  std::vector<Point> points_;
  std::vector<Plane> plane_;
  Point centroid_;
  Point axis_x_, axis_y_;
};

// +1 if the edges AB and CD cross at a point interior to both, -1 if they
// do not cross, 0 if any two vertices coincide or the test is degenerate.
int crossing_sign(const Point& a, const Point& b, const Point& c,
                  const Point& d);

}  // namespace flame::cells

#endif  // FLAME_CELLS_REGION_HPP_
