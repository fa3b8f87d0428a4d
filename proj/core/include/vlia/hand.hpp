#pragma once

#include <Eigen/Dense>
#include <array>

#include "vlia/geometry.hpp"

namespace vlia {

// Canonical 48-dim action layout: per hand [fingertips 5x3, wrist position 3,
// wrist rot6d 6] = 24 values, left hand first.
inline constexpr int kActionDim = 48;
inline constexpr int kHandBlock = 24;
inline constexpr int kFingertipOffset = 0;   // within a hand block
inline constexpr int kWristPosOffset = 15;   // within a hand block
inline constexpr int kWristRotOffset = 18;   // within a hand block
inline constexpr int kRobotDim = 14;         // bimanual 7-DoF, zero-padded to 48

/// Two-link planar finger chain per finger, composed with a wrist pose.
/// Finger f fans out in the wrist xy-plane along a fixed unit direction and
/// bends in the plane spanned by that direction and -z.
struct HandChain {
  Pose wrist;
  std::array<std::array<double, 2>, 5> joint_angles{};  // radians, [finger][joint]

  static constexpr std::array<std::array<double, 2>, 5> kBoneLengths = {{
      {0.040, 0.030},  // thumb
      {0.045, 0.035},  // index
      {0.050, 0.038},  // middle
      {0.046, 0.035},  // ring
      {0.038, 0.030},  // little
  }};
  static constexpr std::array<double, 5> kFanAnglesDeg = {-40.0, -15.0, 0.0, 15.0, 35.0};
};

/// Fingertip positions (5x3, one row per finger) in the world frame.
/// Deterministic; the wrist pose is validated.
Eigen::Matrix<double, 5, 3> hand_fk(const HandChain& chain);

/// Rest configuration (all joint angles zero, identity wrist). Frozen golden
/// constants; the rest-pose unit test asserts hand_fk reproduces them.
Eigen::Matrix<double, 5, 3> hand_rest_fingertips();

struct HandState {
  Eigen::Matrix<double, 5, 3> fingertips = Eigen::Matrix<double, 5, 3>::Zero();
  Eigen::Vector3d wrist_position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d wrist_rotation = Eigen::Matrix3d::Identity();
};

/// Canonical packing, left hand then right. Throws ValidationError on
/// non-finite entries. unpack_action is the exact inverse.
Eigen::Matrix<double, kActionDim, 1> pack_action(const HandState& left, const HandState& right);
std::pair<HandState, HandState> unpack_action(const Eigen::Matrix<double, kActionDim, 1>& action);

}  // namespace vlia
