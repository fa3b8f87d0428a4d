#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vlia/episode.hpp"
#include "vlia/rng.hpp"
#include "vlia/synthgym.hpp"

namespace vlia {

struct GazeFilterConfig {
  double min_confidence = 0.5;  // c_min
  double max_speed = 0.1;       // v_max, normalized units per frame at 30 fps
};

/// Masks saccades and low-confidence samples. A frame keeps its mask only if
/// its confidence reaches c_min and at least one of its two inter-frame gaze
/// speeds stays within v_max (so an isolated jump frame is masked while its
/// neighbors survive). Masks are monotone: a 0 never becomes 1. Coordinates
/// are left untouched.
std::vector<uint8_t> filter_gaze(const Eigen::MatrixXd& gaze_xy,
                                 const Eigen::VectorXd& confidence,
                                 const std::vector<uint8_t>& mask_in,
                                 const GazeFilterConfig& cfg = {});

/// Centered moving average over position dimensions, used to smooth scripted
/// hand trajectories; rotation slices are excluded by the caller.
Eigen::MatrixXd smooth_moving_average(const Eigen::MatrixXd& series, int window = 5);

struct TimedFrame {
  double timestamp = 0.0;  // seconds
  Image image;
  Eigen::VectorXd state;   // 48
  Eigen::VectorXd action;  // 48
  Eigen::Vector2d gaze = Eigen::Vector2d::Zero();
  double gaze_confidence = 0.0;
  uint8_t gaze_mask = 0;
  uint8_t hand_left = 0;
  uint8_t hand_right = 0;
};

/// Resamples onto the uniform 30 fps grid spanning the input time range.
/// Vector quantities interpolate linearly, the rot6d slices of state/action
/// interpolate on the rotation manifold, masks AND across the bracketing
/// samples, images copy from the nearest input frame. Needs >= 2 frames with
/// strictly increasing timestamps.
std::vector<TimedFrame> resample_30fps(const std::vector<TimedFrame>& frames);

struct AugmentConfig {
  double min_scale = 0.7;
  double max_scale = 1.0;
  double flip_prob = 0.5;
  double brightness_delta = 0.1;   // additive, +/-
  double contrast_delta = 0.2;     // multiplicative around 0.5, +/-
};

/// One concrete augmentation draw; augment() samples these from an RNG and
/// identity() leaves the frame untouched.
struct AugmentParams {
  double crop_x = 0.0;
  double crop_y = 0.0;
  double crop_scale = 1.0;
  bool flip = false;
  double brightness = 0.0;
  double contrast = 1.0;

  static AugmentParams identity() { return {}; }
};

AugmentParams draw_augment_params(Rng& rng, const AugmentConfig& cfg = {});

/// Applies the affine crop-and-resize, optional horizontal flip and photometric
/// jitter. The gaze coordinate is mapped by exactly the same affine transform;
/// a gaze mapped outside [0,1]^2 forces its mask to 0. On flip the left/right
/// hand blocks of state/action (and the hand masks) are swapped and x
/// components mirrored.
synthgym::Frame augment_with(const synthgym::Frame& frame, const AugmentParams& params);
synthgym::Frame augment(const synthgym::Frame& frame, Rng& rng, const AugmentConfig& cfg = {});

/// Maps a gaze point through the same affine transform augment_with applies
/// to the image. Returns false when the point leaves [0,1]^2.
bool map_gaze(const AugmentParams& params, double x_in, double y_in, double& x_out, double& y_out);

/// Horizontal-mirror of a 48-dim state/action vector: swaps hand blocks,
/// mirrors x components and conjugates rot6d slices. Applied per chunk row
/// when an augmentation flips the image.
Eigen::VectorXd flip_action_layout(const Eigen::VectorXd& v);

struct NormStats {
  Eigen::VectorXd state_mean, state_std;
  Eigen::VectorXd action_mean, action_std;
  double clip = 10.0;  // z-score clamp bound

  static constexpr double kSigmaFloor = 1e-6;
};

/// Joint statistics over the whole corpus (human and robot episodes alike);
/// constant dimensions keep the sigma floor. Throws on an empty corpus.
NormStats compute_norm_stats(const std::vector<Episode>& episodes);

Eigen::VectorXd normalize_state(const NormStats& stats, const Eigen::VectorXd& state);
Eigen::VectorXd normalize_action(const NormStats& stats, const Eigen::VectorXd& action);
Eigen::VectorXd denormalize_action(const NormStats& stats, const Eigen::VectorXd& normalized);

}  // namespace vlia
