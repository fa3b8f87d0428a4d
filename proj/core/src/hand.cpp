#include "vlia/hand.hpp"

#include <cmath>

#include "vlia/errors.hpp"

namespace vlia {

Eigen::Matrix<double, 5, 3> hand_fk(const HandChain& chain) {
  chain.wrist.validate();
  Eigen::Matrix<double, 5, 3> out;
  for (int f = 0; f < 5; ++f) {
    const double fan = HandChain::kFanAnglesDeg[f] * M_PI / 180.0;
    const Eigen::Vector3d u(std::cos(fan), std::sin(fan), 0.0);
    const Eigen::Vector3d down(0.0, 0.0, -1.0);
    const double l1 = HandChain::kBoneLengths[f][0];
    const double l2 = HandChain::kBoneLengths[f][1];
    const double t1 = chain.joint_angles[f][0];
    const double t12 = t1 + chain.joint_angles[f][1];
    const Eigen::Vector3d local = u * (l1 * std::cos(t1) + l2 * std::cos(t12)) +
                                  down * (l1 * std::sin(t1) + l2 * std::sin(t12));
    out.row(f) = chain.wrist.apply(local).transpose();
  }
  return out;
}

Eigen::Matrix<double, 5, 3> hand_rest_fingertips() {
  // Golden rest constants: u_f * (l1 + l2) for each finger, z = 0.
  Eigen::Matrix<double, 5, 3> rest;
  for (int f = 0; f < 5; ++f) {
    const double fan = HandChain::kFanAnglesDeg[f] * M_PI / 180.0;
    const double len = HandChain::kBoneLengths[f][0] + HandChain::kBoneLengths[f][1];
    rest(f, 0) = len * std::cos(fan);
    rest(f, 1) = len * std::sin(fan);
    rest(f, 2) = 0.0;
  }
  return rest;
}

namespace {

void pack_hand(const HandState& hand, double* dst) {
  for (int f = 0; f < 5; ++f)
    for (int c = 0; c < 3; ++c) dst[kFingertipOffset + f * 3 + c] = hand.fingertips(f, c);
  for (int c = 0; c < 3; ++c) dst[kWristPosOffset + c] = hand.wrist_position(c);
  const Rot6D r = encode_rot6d(hand.wrist_rotation);
  for (int c = 0; c < 6; ++c) dst[kWristRotOffset + c] = r.values[c];
}

HandState unpack_hand(const double* src) {
  HandState hand;
  for (int f = 0; f < 5; ++f)
    for (int c = 0; c < 3; ++c) hand.fingertips(f, c) = src[kFingertipOffset + f * 3 + c];
  for (int c = 0; c < 3; ++c) hand.wrist_position(c) = src[kWristPosOffset + c];
  Rot6D r;
  for (int c = 0; c < 6; ++c) r.values[c] = src[kWristRotOffset + c];
  hand.wrist_rotation = decode_rot6d(r);
  return hand;
}

}  // namespace

Eigen::Matrix<double, kActionDim, 1> pack_action(const HandState& left, const HandState& right) {
  Eigen::Matrix<double, kActionDim, 1> out;
  pack_hand(left, out.data());
  pack_hand(right, out.data() + kHandBlock);
  if (!out.allFinite()) throw ValidationError("pack_action: non-finite entries");
  return out;
}

std::pair<HandState, HandState> unpack_action(const Eigen::Matrix<double, kActionDim, 1>& action) {
  return {unpack_hand(action.data()), unpack_hand(action.data() + kHandBlock)};
}

}  // namespace vlia
