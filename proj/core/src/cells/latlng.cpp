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

#include "flame/cells/latlng.hpp"

#include <cmath>

namespace flame::cells {

LatLng::LatLng(double lat_deg, double lng_deg) : lat_(lat_deg), lng_(lng_deg) {
  if (lat_ > 90) lat_ = 90;
  if (lat_ < -90) lat_ = -90;
  if (lng_ > 180 || lng_ < -180) lng_ = std::remainder(lng_, 360.0);
}

LatLng LatLng::from_point(const Point& p) {
  const double lat = std::atan2(p.z(), std::sqrt(p.x() * p.x() + p.y() * p.y()));
  const double lng = std::atan2(p.y(), p.x());
  return LatLng(lat * (180 / std::numbers::pi), lng * (180 / std::numbers::pi));
}

Point LatLng::to_point() const {
  const double phi = lat_radians();
  const double theta = lng_radians();
  const double cosphi = std::cos(phi);
  return Point(std::cos(theta) * cosphi, std::sin(theta) * cosphi,
               std::sin(phi));
}

double LatLng::distance_m(const LatLng& other) const {
  const Point a = to_point();
  const Point b = other.to_point();
  return radians_to_meters(std::atan2(a.cross(b).norm(), a.dot(b)));
}

}  // namespace flame::cells
