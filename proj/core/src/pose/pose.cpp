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

#include "flame/pose/pose.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "flame/errors.hpp"

namespace flame::pose {

Pose::Pose(const Quat& q, const Vec3& t) : q_(q), t_(t) {
  const double n = q_.norm();
  if (!std::isfinite(n) || n < 1e-12) throw ValidationError("rotation quaternion must be non-zero and finite");
  if (!t_.allFinite()) throw ValidationError("translation must be finite");
  q_.coeffs() /= n;
  // Keep w >= 0 so equal rotations serialize identically.
  if (q_.w() < 0) q_.coeffs() = -q_.coeffs();
}

Pose Pose::from_matrix(const Mat3& r, const Vec3& t) {
  if (!r.allFinite() || (r * r.transpose() - Mat3::Identity()).norm() > 1e-6 ||
      std::abs(r.determinant() - 1) > 1e-6) {
    throw ValidationError("matrix is not a proper rotation");
  }
  return Pose(Quat(r), t);
}

Pose Pose::from_axis_angle(const Vec3& axis, double radians, const Vec3& t) {
  if (!(axis.norm() > 0)) throw ValidationError("rotation axis must be non-zero");
  return Pose(Quat(Eigen::AngleAxisd(radians, axis.normalized())), t);
}

Pose Pose::from_yaw(double radians, const Vec3& t) {
  return from_axis_angle(Vec3::UnitZ(), radians, t);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

nlohmann::json Pose::to_json() const {
  return {{"q", {q_.w(), q_.x(), q_.y(), q_.z()}}, {"t", {t_.x(), t_.y(), t_.z()}}};
}

Pose Pose::from_json(const nlohmann::json& j) {
  try {
    const auto& q = j.at("q");
    const auto& t = j.at("t");
    if (!q.is_array() || q.size() != 4 || !t.is_array() || t.size() != 3) {
      throw ValidationError("pose needs q[4] and t[3]");
    }
    return Pose(Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()),
                Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad pose JSON: ") + e.what());
  }
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Pose inverse(const Pose& a) {
  const Quat qi = a.rotation().conjugate();
  return Pose(qi, -(qi * a.translation()));
}

Vec3 transform_point(const Pose& a, const Vec3& p) {
  return a.rotation() * p + a.translation();
}

double rotation_angle(const Quat& a, const Quat& b) {
  const Quat d = a.conjugate() * b;
  return 2 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

double relative_displacement(const Pose& a, const Pose& b) {
  return (a.translation() - b.translation()).norm();
}

KabschResult kabsch(std::span<const PointPair> pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) throw DegenerateGeometryError("kabsch needs at least 3 point pairs");
  Vec3 pc = Vec3::Zero();
  Vec3 qc = Vec3::Zero();
  for (const auto& pr : pairs) {
    if (!pr.p.allFinite() || !pr.q.allFinite()) {
      throw ValidationError("kabsch: non-finite point");
    }
    pc += pr.p;
    qc += pr.q;
  }
  pc /= static_cast<double>(n);
  qc /= static_cast<double>(n);

  Mat3 h = Mat3::Zero();
  Mat3 spread = Mat3::Zero();
  for (const auto& pr : pairs) {
    const Vec3 dp = pr.p - pc;
    h += dp * (pr.q - qc).transpose();
    spread += dp * dp.transpose();
  }
  // Rank check on the A side: the rotation is undetermined about the line
  // through collinear points.
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(spread);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 1e-18) || ev(1) <= 1e-10 * ev(2)) {
    throw DegenerateGeometryError("kabsch: points are coincident or collinear");
  }

  const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  const double d = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Mat3 r = v * Eigen::DiagonalMatrix<double, 3>(1, 1, d) * u.transpose();
  const Vec3 t = qc - r * pc;

  KabschResult out{Pose(Quat(r), t), 0};
  double ss = 0;
  for (const auto& pr : pairs) ss += (pr.q - transform_point(out.pose, pr.p)).squaredNorm();
  out.rmsd = std::sqrt(ss / static_cast<double>(n));
  return out;
}

std::vector<RpeSample> rpe(std::span<const Pose> ref, std::span<const Pose> est) {
  if (ref.size() != est.size()) {
    throw ValidationError("rpe: trajectories have different lengths (" +
                          std::to_string(ref.size()) + " vs " + std::to_string(est.size()) + ")");
  }
  std::vector<RpeSample> out;
  out.reserve(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    out.push_back({relative_displacement(ref[i], est[i]),
                   rotation_angle(ref[i].rotation(), est[i].rotation()) * 180.0 / M_PI});
  }
  return out;
}

Pose align_trajectories(std::span<const Pose> ref, std::span<const Pose> est) {
  if (ref.size() != est.size()) throw ValidationError("align: trajectories have different lengths");
  std::vector<PointPair> pairs;
  pairs.reserve(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    pairs.push_back({est[i].translation(), ref[i].translation()});
  }
  return kabsch(pairs).pose;
}

std::string to_json_lines(std::span<const TimedPose> trajectory) {
  std::string out;
  for (const auto& tp : trajectory) {
    nlohmann::json j = tp.pose.to_json();
    j["time"] = tp.t;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TimedPose> from_json_lines(const std::string& text) {
  std::vector<TimedPose> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("time").get<double>(), Pose::from_json(j)});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("trajectory line: ") + e.what(), lineno);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

}  // namespace flame::pose
