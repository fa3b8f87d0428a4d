#include "vlia/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "vlia/errors.hpp"
#include "vlia/geometry.hpp"

namespace vlia {

namespace {

constexpr int kRotSlices[2] = {kWristRotOffset, kHandBlock + kWristRotOffset};

}  // namespace

std::vector<uint8_t> filter_gaze(const Eigen::MatrixXd& gaze_xy,
                                 const Eigen::VectorXd& confidence,
                                 const std::vector<uint8_t>& mask_in,
                                 const GazeFilterConfig& cfg) {
  const int n = static_cast<int>(gaze_xy.rows());
  if (confidence.size() != n || static_cast<int>(mask_in.size()) != n)
    throw ValidationError("filter_gaze: length mismatch");
  std::vector<uint8_t> mask = mask_in;
  for (int t = 0; t < n; ++t) {
    if (!mask[static_cast<size_t>(t)]) continue;  // masks are monotone
    if (confidence[t] < cfg.min_confidence) {
      mask[static_cast<size_t>(t)] = 0;
      continue;
    }
    // A frame is a saccade outlier when every available inter-frame speed
    // around it exceeds v_max; neighbors of an isolated jump keep one calm
    // side and survive.
    double best = 0.0;
    bool have = false;
    if (t > 0) {
      best = (gaze_xy.row(t) - gaze_xy.row(t - 1)).norm();
      have = true;
    }
    if (t + 1 < n) {
      const double fwd = (gaze_xy.row(t + 1) - gaze_xy.row(t)).norm();
      best = have ? std::min(best, fwd) : fwd;
      have = true;
    }
    if (have && best > cfg.max_speed) mask[static_cast<size_t>(t)] = 0;
  }
  return mask;
}

Eigen::MatrixXd smooth_moving_average(const Eigen::MatrixXd& series, int window) {
  if (window < 1) throw ValidationError("smooth_moving_average: window must be >= 1");
  const int n = static_cast<int>(series.rows());
  Eigen::MatrixXd out(series.rows(), series.cols());
  const int half = window / 2;
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(n - 1, t + half);
    out.row(t) = series.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

namespace {

Eigen::VectorXd interp_vector48(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double w) {
  Eigen::VectorXd out = (1.0 - w) * a + w * b;
  for (int s : kRotSlices) {
    Rot6D ra, rb;
    for (int c = 0; c < 6; ++c) {
      ra.values[static_cast<size_t>(c)] = a[s + c];
      rb.values[static_cast<size_t>(c)] = b[s + c];
    }
    const Rot6D ri = encode_rot6d(rotation_slerp(decode_rot6d(ra), decode_rot6d(rb), w));
    for (int c = 0; c < 6; ++c) out[s + c] = ri.values[static_cast<size_t>(c)];
  }
  return out;
}

}  // namespace

std::vector<TimedFrame> resample_30fps(const std::vector<TimedFrame>& frames) {
  if (frames.size() < 2) throw ValidationError("resample_30fps: need at least 2 frames");
  for (size_t i = 1; i < frames.size(); ++i)
    if (frames[i].timestamp <= frames[i - 1].timestamp)
      throw ValidationError("resample_30fps: timestamps must be strictly increasing");

  const double t0 = frames.front().timestamp;
  const double t_end = frames.back().timestamp;
  const double dt = 1.0 / 30.0;
  const int count = static_cast<int>(std::floor((t_end - t0) * 30.0 + 1e-9)) + 1;

  std::vector<TimedFrame> out;
  out.reserve(static_cast<size_t>(count));
  size_t hi = 1;
  for (int k = 0; k < count; ++k) {
    const double t = t0 + k * dt;
    while (hi + 1 < frames.size() && frames[hi].timestamp < t - 1e-12) ++hi;
    const TimedFrame& a = frames[hi - 1];
    const TimedFrame& b = frames[hi];
    const double span = b.timestamp - a.timestamp;
    const double w = std::clamp((t - a.timestamp) / span, 0.0, 1.0);

    TimedFrame f;
    f.timestamp = t;
    if (w < 1e-9 || w > 1.0 - 1e-9) {
      f = w < 0.5 ? a : b;  // exact grid hit: copy the input frame
      f.timestamp = t;
      out.push_back(std::move(f));
      continue;
    }
    f.state = interp_vector48(a.state, b.state, w);
    f.action = interp_vector48(a.action, b.action, w);
    f.gaze = (1.0 - w) * a.gaze + w * b.gaze;
    f.gaze_confidence = (1.0 - w) * a.gaze_confidence + w * b.gaze_confidence;
    f.gaze_mask = static_cast<uint8_t>(a.gaze_mask & b.gaze_mask);
    f.hand_left = static_cast<uint8_t>(a.hand_left & b.hand_left);
    f.hand_right = static_cast<uint8_t>(a.hand_right & b.hand_right);
    f.image = w < 0.5 ? a.image : b.image;
    out.push_back(std::move(f));
  }
  return out;
}

AugmentParams draw_augment_params(Rng& rng, const AugmentConfig& cfg) {
  AugmentParams p;
  p.crop_scale = rng.uniform(cfg.min_scale, cfg.max_scale);
  p.crop_x = rng.uniform(0.0, 1.0 - p.crop_scale);
  p.crop_y = rng.uniform(0.0, 1.0 - p.crop_scale);
  p.flip = rng.bernoulli(cfg.flip_prob);
  p.brightness = rng.uniform(-cfg.brightness_delta, cfg.brightness_delta);
  p.contrast = rng.uniform(1.0 - cfg.contrast_delta, 1.0 + cfg.contrast_delta);
  return p;
}

bool map_gaze(const AugmentParams& params, double x_in, double y_in, double& x_out,
              double& y_out) {
  x_out = (x_in - params.crop_x) / params.crop_scale;
  y_out = (y_in - params.crop_y) / params.crop_scale;
  if (params.flip) x_out = 1.0 - x_out;
  return x_out >= 0.0 && x_out <= 1.0 && y_out >= 0.0 && y_out <= 1.0;
}

namespace {

bool is_identity(const AugmentParams& p) {
  return !p.flip && p.crop_x == 0.0 && p.crop_y == 0.0 && p.crop_scale == 1.0 &&
         p.brightness == 0.0 && p.contrast == 1.0;
}

}  // namespace

Eigen::VectorXd flip_action_layout(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(kActionDim);
  out.head(kHandBlock) = v.tail(kHandBlock);  // swap hand blocks
  out.tail(kHandBlock) = v.head(kHandBlock);
  for (int hand = 0; hand < 2; ++hand) {
    const int base = hand * kHandBlock;
    for (int f = 0; f < 5; ++f) out[base + f * 3] = 1.0 - out[base + f * 3];
    out[base + kWristPosOffset] = 1.0 - out[base + kWristPosOffset];
    // conjugate the rotation with diag(-1,1,1)
    const int r = base + kWristRotOffset;
    out[r + 1] = -out[r + 1];
    out[r + 2] = -out[r + 2];
    out[r + 3] = -out[r + 3];
  }
  return out;
}

synthgym::Frame augment_with(const synthgym::Frame& frame, const AugmentParams& params) {
  if (is_identity(params)) return frame;

  synthgym::Frame out = frame;
  const int h = frame.image.height, w = frame.image.width;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double u = (c + 0.5) / w;
      const double v = (r + 0.5) / h;
      if (params.flip) u = 1.0 - u;
      const double xs = params.crop_x + params.crop_scale * u;
      const double ys = params.crop_y + params.crop_scale * v;
      const int xi = std::clamp(static_cast<int>(std::floor(xs * w)), 0, w - 1);
      const int yi = std::clamp(static_cast<int>(std::floor(ys * h)), 0, h - 1);
      for (int ch = 0; ch < 3; ++ch) {
        const float val = frame.image.at(yi, xi, ch);
        const double jittered =
            (val - 0.5) * params.contrast + 0.5 + params.brightness;
        out.image.at(r, c, ch) = static_cast<float>(std::clamp(jittered, 0.0, 1.0));
      }
    }
  }

  double gx, gy;
  if (map_gaze(params, frame.gaze.x, frame.gaze.y, gx, gy)) {
    out.gaze.x = gx;
    out.gaze.y = gy;
  } else {
    out.gaze.x = gx;
    out.gaze.y = gy;
    out.gaze.mask = false;
  }

  if (params.flip) {
    out.action = flip_action_layout(frame.action);
    out.state = flip_action_layout(frame.state);
    std::swap(out.hand_left, out.hand_right);
  }
  return out;
}

synthgym::Frame augment(const synthgym::Frame& frame, Rng& rng, const AugmentConfig& cfg) {
  return augment_with(frame, draw_augment_params(rng, cfg));
}

NormStats compute_norm_stats(const std::vector<Episode>& episodes) {
  if (episodes.empty()) throw ValidationError("compute_norm_stats: empty corpus");
  Eigen::VectorXd s_sum = Eigen::VectorXd::Zero(kActionDim), s_sq = s_sum;
  Eigen::VectorXd a_sum = s_sum, a_sq = s_sum;
  int64_t n = 0;
  for (const Episode& ep : episodes) {
    for (int t = 0; t < ep.frame_count; ++t) {
      s_sum += ep.state.row(t).transpose();
      s_sq += ep.state.row(t).transpose().cwiseAbs2();
      a_sum += ep.action.row(t).transpose();
      a_sq += ep.action.row(t).transpose().cwiseAbs2();
      ++n;
    }
  }
  if (n == 0) throw ValidationError("compute_norm_stats: corpus has no frames");
  NormStats stats;
  const double inv = 1.0 / static_cast<double>(n);
  stats.state_mean = s_sum * inv;
  stats.action_mean = a_sum * inv;
  stats.state_std = (s_sq * inv - stats.state_mean.cwiseAbs2())
                        .cwiseMax(0.0)
                        .cwiseSqrt()
                        .cwiseMax(NormStats::kSigmaFloor);
  stats.action_std = (a_sq * inv - stats.action_mean.cwiseAbs2())
                         .cwiseMax(0.0)
                         .cwiseSqrt()
                         .cwiseMax(NormStats::kSigmaFloor);
  return stats;
}

namespace {
Eigen::VectorXd znorm(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                      const Eigen::VectorXd& std, double clip) {
  return ((x - mean).cwiseQuotient(std)).cwiseMax(-clip).cwiseMin(clip);
}
}  // namespace

Eigen::VectorXd normalize_state(const NormStats& stats, const Eigen::VectorXd& state) {
  return znorm(state, stats.state_mean, stats.state_std, stats.clip);
}

Eigen::VectorXd normalize_action(const NormStats& stats, const Eigen::VectorXd& action) {
  return znorm(action, stats.action_mean, stats.action_std, stats.clip);
}

Eigen::VectorXd denormalize_action(const NormStats& stats, const Eigen::VectorXd& normalized) {
  return normalized.cwiseProduct(stats.action_std) + stats.action_mean;
}

}  // namespace vlia
