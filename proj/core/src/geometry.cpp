#include "vlia/geometry.hpp"

#include <cmath>

#include "vlia/errors.hpp"
#include "vlia/rng.hpp"

namespace vlia {

void Pose::validate() const {
  const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (err.norm() > 1e-6) throw ValidationError("rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw ValidationError("rotation determinant is not +1");
  if (!position.allFinite()) throw ValidationError("pose position is not finite");
}

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.position = -(out.rotation * position);
  return out;
}

Pose Pose::compose(const Pose& other) const {
  Pose out;
  out.rotation = rotation * other.rotation;
  out.position = rotation * other.position + position;
  return out;
}

Eigen::Vector3d Pose::apply(const Eigen::Vector3d& p) const {
  return rotation * p + position;
}

Rot6D encode_rot6d(const Eigen::Matrix3d& rotation) {
  Rot6D v;
  v.values = {rotation(0, 0), rotation(1, 0), rotation(2, 0),
              rotation(0, 1), rotation(1, 1), rotation(2, 1)};
  return v;
}

Eigen::Matrix3d decode_rot6d(const Rot6D& v) {
  Eigen::Vector3d c1(v.values[0], v.values[1], v.values[2]);
  Eigen::Vector3d c2(v.values[3], v.values[4], v.values[5]);
  const double n1 = c1.norm();
  if (n1 < 1e-9) throw ValidationError("rot6d: first column is degenerate");
  c1 /= n1;
  c2 -= c1.dot(c2) * c1;
  const double n2 = c2.norm();
  if (n2 < 1e-9) throw ValidationError("rot6d: columns are parallel");
  c2 /= n2;
  Eigen::Matrix3d out;
  out.col(0) = c1;
  out.col(1) = c2;
  out.col(2) = c1.cross(c2);
  return out;
}

double rotation_geodesic(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double tr = (a.transpose() * b).trace();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Eigen::Matrix3d rotation_slerp(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, double t) {
  const Eigen::Matrix3d rel = a.transpose() * b;
  const Eigen::AngleAxisd aa(rel);
  return a * Eigen::AngleAxisd(t * aa.angle(), aa.axis()).toRotationMatrix();
}

std::vector<Pose> align_to_first_frame(const std::vector<Pose>& poses,
                                       const std::vector<Pose>& camera_poses) {
  if (poses.empty() || camera_poses.empty())
    throw ValidationError("align_to_first_frame: empty pose list");
  if (poses.size() != camera_poses.size())
    throw ValidationError("align_to_first_frame: length mismatch");
  for (const Pose& p : poses) p.validate();
  for (const Pose& p : camera_poses) p.validate();

  const Pose ref_inv = camera_poses.front().inverse();
  std::vector<Pose> out;
  out.reserve(poses.size());
  for (const Pose& p : poses) out.push_back(ref_inv.compose(p));
  return out;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  // Shoemake's uniform quaternion sampling.
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double two_pi = 2.0 * M_PI;
  Eigen::Quaterniond q(std::sqrt(u1) * std::cos(two_pi * u3),
                       std::sqrt(1.0 - u1) * std::sin(two_pi * u2),
                       std::sqrt(1.0 - u1) * std::cos(two_pi * u2),
                       std::sqrt(u1) * std::sin(two_pi * u3));
  return q.toRotationMatrix();
}

}  // namespace vlia
