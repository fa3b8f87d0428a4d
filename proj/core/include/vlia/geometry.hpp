#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace vlia {

/// Rigid transform. Rotation must be orthonormal with det +1 (checked by
/// validate()).
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static Pose identity() { return Pose{}; }

  /// Throws ValidationError if the rotation is not orthonormal (1e-6) or has
  /// negative determinant.
  void validate() const;

  Pose inverse() const;
  Pose compose(const Pose& other) const;  // this ∘ other
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;
};

/// Continuous 6D rotation representation: the first two columns of a rotation
/// matrix, column-major (r00 r10 r20 r01 r11 r21).
struct Rot6D {
  std::array<double, 6> values{};
};

Rot6D encode_rot6d(const Eigen::Matrix3d& rotation);

/// Gram-Schmidt reconstruction: normalize c1, orthogonalize+normalize c2,
/// c3 = c1 x c2. Throws ValidationError when the two columns are (near)
/// parallel or degenerate.
Eigen::Matrix3d decode_rot6d(const Rot6D& v);

/// Geodesic angle between two rotations, radians.
double rotation_geodesic(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Shortest-path interpolation on SO(3): R(t) = a * exp(t * log(aᵀ b)).
Eigen::Matrix3d rotation_slerp(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, double t);

/// Re-expresses world poses in the frame of camera_poses[0]. The first camera
/// pose maps to the identity pose. Both lists must be non-empty and of equal
/// length; every rotation is validated.
std::vector<Pose> align_to_first_frame(const std::vector<Pose>& poses,
                                       const std::vector<Pose>& camera_poses);

/// Uniform random rotation from an RNG-supplied unit quaternion.
Eigen::Matrix3d random_rotation(class Rng& rng);

}  // namespace vlia
