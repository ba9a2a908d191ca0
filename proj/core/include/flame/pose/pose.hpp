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

#ifndef FLAME_POSE_POSE_HPP_
#define FLAME_POSE_POSE_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

namespace flame::pose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Rigid transform mapping body-frame points into the reference frame:
// p_ref = R * p_body + t.
class Pose {
 public:
  Pose() = default;  // identity
  // Normalizes `q`. Throws ValidationError for a zero or non-finite
  // quaternion or a non-finite translation.
  Pose(const Quat& q, const Vec3& t);
  // Throws ValidationError unless `r` is a rotation (orthonormal, det +1)
  // within 1e-6.
  static Pose from_matrix(const Mat3& r, const Vec3& t);
  static Pose from_axis_angle(const Vec3& axis, double radians, const Vec3& t = Vec3::Zero());
  static Pose from_yaw(double radians, const Vec3& t = Vec3::Zero());

  const Quat& rotation() const { return q_; }
  const Vec3& translation() const { return t_; }
  Mat3 rotation_matrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  // {"q": [w, x, y, z], "t": [x, y, z]}
  nlohmann::json to_json() const;
  static Pose from_json(const nlohmann::json& j);

 private:
  Quat q_ = Quat::Identity();
  Vec3 t_ = Vec3::Zero();
};

Pose compose(const Pose& a, const Pose& b);  // a after b
Pose inverse(const Pose& a);
Vec3 transform_point(const Pose& a, const Vec3& p);

// Geodesic angle between two orientations, radians in [0, pi].
double rotation_angle(const Quat& a, const Quat& b);

// Magnitude of the translation between two poses in the same frame.
double relative_displacement(const Pose& a, const Pose& b);

struct PointPair {
  Vec3 p;  // frame A
  Vec3 q;  // frame B
};

struct KabschResult {
  Pose pose;    // maps frame A into frame B
  double rmsd;  // sqrt(mean |q - pose(p)|^2)
};

// Least-squares proper rigid transform with q ~ pose(p). Throws
// DegenerateGeometryError for fewer than 3 pairs or when the A-side points
// are coincident or collinear.
KabschResult kabsch(std::span<const PointPair> pairs);

struct TimedPose {
  double t = 0;
  Pose pose;
};

struct RpeSample {
  double translational_m = 0;
  double rotational_deg = 0;
};

// Per-step position distance and orientation difference of two
// time-aligned trajectories. Throws ValidationError on length mismatch.
std::vector<RpeSample> rpe(std::span<const Pose> ref, std::span<const Pose> est);

// Rigid transform taking `est` positions onto `ref` positions (Kabsch);
// applying it to every est pose removes a common frame offset.
Pose align_trajectories(std::span<const Pose> ref, std::span<const Pose> est);

// One pose per line, {"time": seconds, "q": [...], "t": [...]}; "t" is
// already the translation, hence "time" for the timestamp.
std::string to_json_lines(std::span<const TimedPose> trajectory);
std::vector<TimedPose> from_json_lines(const std::string& text);

}  // namespace flame::pose

#endif  // FLAME_POSE_POSE_HPP_
