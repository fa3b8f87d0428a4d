#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vlia/image.hpp"
#include "vlia/synthgym.hpp"

namespace vlia {

/// One demonstration clip in the unified on-disk representation.
/// Directory layout: episode_<id>/manifest (JSON) plus little-endian float32
/// blobs images.bin, state.bin, action.bin, gaze.bin and a byte blob
/// masks.bin (gaze mask, left hand, right hand per frame).
struct Episode {
  std::string instruction;
  synthgym::Embodiment embodiment = synthgym::Embodiment::human;
  int fps = 30;
  int frame_count = 0;
  int resolution = 64;

  std::vector<Image> images;
  Eigen::MatrixXd state;   // frame_count x 48
  Eigen::MatrixXd action;  // frame_count x 48
  Eigen::MatrixXd gaze;    // frame_count x 2, normalized image coords
  Eigen::VectorXd gaze_confidence;
  std::vector<uint8_t> gaze_mask;
  std::vector<uint8_t> hand_left;
  std::vector<uint8_t> hand_right;

  /// Checks the manifest invariants (fps == 30, array lengths, gaze range
  /// wherever the mask is set). Throws ValidationError.
  void validate() const;
};

Episode episode_from_demo(const synthgym::Demonstration& demo);

void write_episode(const Episode& episode, const std::filesystem::path& dir);
Episode read_episode(const std::filesystem::path& dir);

/// Lists episode_* subdirectories of a corpus root, sorted by name.
std::vector<std::filesystem::path> list_episode_dirs(const std::filesystem::path& root);

}  // namespace vlia
