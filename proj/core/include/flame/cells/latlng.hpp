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

#ifndef FLAME_CELLS_LATLNG_HPP_
#define FLAME_CELLS_LATLNG_HPP_

#include <cmath>
#include <numbers>

#include "flame/cells/coords.hpp"

namespace flame::cells {

// Mean Earth radius used for every meters <-> radians conversion.
inline constexpr double kEarthRadiusMeters = 6371000.0;

inline double meters_to_radians(double meters) {
  return meters / kEarthRadiusMeters;
}
inline double radians_to_meters(double radians) {
  return radians * kEarthRadiusMeters;
}

// Geographic coordinate in degrees. Latitude is clamped to [-90, 90] and
// longitude wrapped into [-180, 180] on construction.
class LatLng {
 public:
  LatLng() = default;
  LatLng(double lat_deg, double lng_deg);

  static LatLng from_point(const Point& p);

  double lat() const { return lat_; }
  double lng() const { return lng_; }
  double lat_radians() const { return (std::numbers::pi / 180) * lat_; }
  double lng_radians() const { return (std::numbers::pi / 180) * lng_; }

  // Unit vector on the sphere.
  Point to_point() const;

  // Great-circle distance, meters.
  double distance_m(const LatLng& other) const;

  friend bool operator==(const LatLng&, const LatLng&) = default;

 private:
  double lat_ = 0;
  double lng_ = 0;
};

}  // namespace flame::cells

#endif  // FLAME_CELLS_LATLNG_HPP_
