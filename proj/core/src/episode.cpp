#include "vlia/episode.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "vlia/errors.hpp"

namespace vlia {

namespace {

void write_f32(std::ofstream& out, const float* data, size_t count) {
  // Little-endian floats; the build targets little-endian hosts.
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 4));
}

std::vector<float> read_f32(const std::filesystem::path& path, size_t expect) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path.string());
  const auto size = static_cast<size_t>(in.tellg());
  if (size != expect * 4)
    throw IoError(path.string() + ": expected " + std::to_string(expect * 4) + " bytes, got " +
                  std::to_string(size));
  std::vector<float> data(expect);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("short read from " + path.string());
  return data;
}

void write_matrix_f32(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  std::vector<float> row(static_cast<size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<size_t>(c)] = static_cast<float>(m(r, c));
    write_f32(out, row.data(), row.size());
  }
  if (!out) throw IoError("short write to " + path.string());
}

Eigen::MatrixXd read_matrix_f32(const std::filesystem::path& path, int rows, int cols) {
  const auto data = read_f32(path, static_cast<size_t>(rows) * cols);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<size_t>(r) * cols + c];
  return m;
}

}  // namespace

void Episode::validate() const {
  if (fps != 30) throw ValidationError("episode: fps must be 30");
  const auto n = static_cast<size_t>(frame_count);
  if (images.size() != n || state.rows() != frame_count || action.rows() != frame_count ||
      gaze.rows() != frame_count || gaze_confidence.size() != frame_count ||
      gaze_mask.size() != n || hand_left.size() != n || hand_right.size() != n)
    throw ValidationError("episode: array length mismatch");
  if (state.cols() != kActionDim || action.cols() != kActionDim || gaze.cols() != 2)
    throw ValidationError("episode: bad array width");
  for (const Image& img : images)
    if (img.height != resolution || img.width != resolution)
      throw ValidationError("episode: image resolution mismatch");
  for (int t = 0; t < frame_count; ++t) {
    if (gaze_mask[static_cast<size_t>(t)] &&
        (gaze(t, 0) < 0 || gaze(t, 0) > 1 || gaze(t, 1) < 0 || gaze(t, 1) > 1))
      throw ValidationError("episode: masked-in gaze outside [0,1]^2");
  }
  if (!action.allFinite() || !state.allFinite())
    throw ValidationError("episode: non-finite state/action");
}

Episode episode_from_demo(const synthgym::Demonstration& demo) {
  Episode ep;
  ep.instruction = demo.instruction;
  ep.embodiment = demo.embodiment;
  ep.frame_count = static_cast<int>(demo.frames.size());
  ep.resolution = demo.frames.empty() ? 0 : demo.frames.front().image.height;
  ep.state.resize(ep.frame_count, kActionDim);
  ep.action.resize(ep.frame_count, kActionDim);
  ep.gaze.resize(ep.frame_count, 2);
  ep.gaze_confidence.resize(ep.frame_count);
  for (const synthgym::Frame& f : demo.frames) {
    const int t = static_cast<int>(ep.images.size());
    ep.images.push_back(f.image);
    ep.state.row(t) = f.state.transpose();
    ep.action.row(t) = f.action.transpose();
    ep.gaze(t, 0) = f.gaze.x;
    ep.gaze(t, 1) = f.gaze.y;
    ep.gaze_confidence[t] = f.gaze.confidence;
    ep.gaze_mask.push_back(f.gaze.mask ? 1 : 0);
    ep.hand_left.push_back(f.hand_left ? 1 : 0);
    ep.hand_right.push_back(f.hand_right ? 1 : 0);
  }
  return ep;
}

void write_episode(const Episode& episode, const std::filesystem::path& dir) {
  episode.validate();
  std::filesystem::create_directories(dir);

  nlohmann::json manifest{
      {"instruction", episode.instruction},
      {"embodiment", synthgym::to_string(episode.embodiment)},
      {"fps", episode.fps},
      {"frame_count", episode.frame_count},
      {"action_dim", kActionDim},
      {"resolution", episode.resolution},
  };
  {
    std::ofstream out(dir / "manifest");
    if (!out) throw IoError("cannot open " + (dir / "manifest").string());
    out << manifest.dump(2) << "\n";
  }

  {
    std::ofstream out(dir / "images.bin", std::ios::binary);
    if (!out) throw IoError("cannot open images.bin");
    for (const Image& img : episode.images) write_f32(out, img.data.data(), img.data.size());
    if (!out) throw IoError("short write to images.bin");
  }
  write_matrix_f32(episode.state, dir / "state.bin");
  write_matrix_f32(episode.action, dir / "action.bin");

  {
    // gaze.bin rows: x, y, confidence
    Eigen::MatrixXd g(episode.frame_count, 3);
    g.leftCols<2>() = episode.gaze;
    g.col(2) = episode.gaze_confidence;
    write_matrix_f32(g, dir / "gaze.bin");
  }
  {
    std::ofstream out(dir / "masks.bin", std::ios::binary);
    if (!out) throw IoError("cannot open masks.bin");
    for (int t = 0; t < episode.frame_count; ++t) {
      const uint8_t row[3] = {episode.gaze_mask[static_cast<size_t>(t)],
                              episode.hand_left[static_cast<size_t>(t)],
                              episode.hand_right[static_cast<size_t>(t)]};
      out.write(reinterpret_cast<const char*>(row), 3);
    }
    if (!out) throw IoError("short write to masks.bin");
  }
}

Episode read_episode(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest");
  if (!in) throw IoError("cannot open " + (dir / "manifest").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad episode manifest: " + std::string(e.what()));
  }

  Episode ep;
  ep.instruction = manifest.at("instruction").get<std::string>();
  ep.embodiment = synthgym::embodiment_from_string(manifest.at("embodiment").get<std::string>());
  ep.fps = manifest.at("fps").get<int>();
  ep.frame_count = manifest.at("frame_count").get<int>();
  ep.resolution = manifest.at("resolution").get<int>();
  if (manifest.at("action_dim").get<int>() != kActionDim)
    throw ValidationError("episode: unsupported action_dim");

  const size_t px = static_cast<size_t>(ep.resolution) * ep.resolution * 3;
  const auto imgdata = read_f32(dir / "images.bin", px * static_cast<size_t>(ep.frame_count));
  for (int t = 0; t < ep.frame_count; ++t) {
    Image img(ep.resolution, ep.resolution);
    std::copy_n(imgdata.begin() + static_cast<std::ptrdiff_t>(px) * t, px, img.data.begin());
    ep.images.push_back(std::move(img));
  }
  ep.state = read_matrix_f32(dir / "state.bin", ep.frame_count, kActionDim);
  ep.action = read_matrix_f32(dir / "action.bin", ep.frame_count, kActionDim);
  const Eigen::MatrixXd g = read_matrix_f32(dir / "gaze.bin", ep.frame_count, 3);
  ep.gaze = g.leftCols<2>();
  ep.gaze_confidence = g.col(2);

  std::ifstream masks(dir / "masks.bin", std::ios::binary);
  if (!masks) throw IoError("cannot open masks.bin");
  for (int t = 0; t < ep.frame_count; ++t) {
    uint8_t row[3];
    masks.read(reinterpret_cast<char*>(row), 3);
    if (!masks) throw IoError("short read from masks.bin");
    ep.gaze_mask.push_back(row[0]);
    ep.hand_left.push_back(row[1]);
    ep.hand_right.push_back(row[2]);
  }
  ep.validate();
  return ep;
}

std::vector<std::filesystem::path> list_episode_dirs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> dirs;
  if (!std::filesystem::exists(root)) throw IoError("corpus root does not exist: " + root.string());
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && entry.path().filename().string().starts_with("episode_"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace vlia
