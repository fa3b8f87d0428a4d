#include <fstream>

#include <nlohmann/json.hpp>

#include "vlia/errors.hpp"
#include "vlia/model.hpp"

namespace vlia {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"image_size", c.image_size},   {"patch_size", c.patch_size},
              {"embed_dim", c.embed_dim},     {"layers", c.layers},
              {"heads", c.heads},             {"max_text_len", c.max_text_len},
              {"horizon", c.horizon},         {"action_dim", c.action_dim},
              {"state_dim", c.state_dim},     {"expert_dim", c.expert_dim},
              {"expert_heads", c.expert_heads}, {"lambda_action", c.lambda_action},
              {"lambda_intent", c.lambda_intent}, {"intent_bins", c.intent_bins}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.image_size = j.at("image_size");
  c.patch_size = j.at("patch_size");
  c.embed_dim = j.at("embed_dim");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.max_text_len = j.at("max_text_len");
  c.horizon = j.at("horizon");
  c.action_dim = j.at("action_dim");
  c.state_dim = j.at("state_dim");
  c.expert_dim = j.at("expert_dim");
  c.expert_heads = j.at("expert_heads");
  c.lambda_action = j.at("lambda_action");
  c.lambda_intent = j.at("lambda_intent");
  c.intent_bins = j.at("intent_bins");
  return c;
}

std::vector<double> vec_out(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_in(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

json stats_to_json(const NormStats& s) {
  return json{{"state_mean", vec_out(s.state_mean)}, {"state_std", vec_out(s.state_std)},
              {"action_mean", vec_out(s.action_mean)}, {"action_std", vec_out(s.action_std)},
              {"clip", s.clip}};
}

NormStats stats_from_json(const json& j) {
  NormStats s;
  s.state_mean = vec_in(j.at("state_mean"));
  s.state_std = vec_in(j.at("state_std"));
  s.action_mean = vec_in(j.at("action_mean"));
  s.action_std = vec_in(j.at("action_std"));
  s.clip = j.at("clip");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const VliaModel& model,
                     const CheckpointMeta& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("save_checkpoint: cannot create " + dir.string());

  json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["config"] = config_to_json(meta.config);
  manifest["norm_stats"] = stats_to_json(meta.norm_stats);
  manifest["provenance"] = meta.provenance;
  manifest["init_seed"] = meta.init_seed;
  json layout = json::array();
  for (const auto& p : model.parameters())
    layout.push_back(json{{"name", p.name},
                          {"group", p.group},
                          {"rows", p.value.rows()},
                          {"cols", p.value.cols()}});
  manifest["parameters"] = layout;

  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("save_checkpoint: cannot write manifest.json in " + dir.string());
    out << manifest.dump(2) << "\n";
  }
  std::ofstream bin(dir / "params.bin", std::ios::binary);
  if (!bin) throw IoError("save_checkpoint: cannot write params.bin in " + dir.string());
  for (const auto& p : model.parameters())
    bin.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  if (!bin) throw IoError("save_checkpoint: write failure in " + dir.string());
}

std::pair<std::unique_ptr<VliaModel>, CheckpointMeta> load_checkpoint(
    const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto params_path = dir / "params.bin";
  if (!std::filesystem::exists(manifest_path) || !std::filesystem::exists(params_path))
    throw MissingPrerequisite("load_checkpoint: no checkpoint at " + dir.string());

  json manifest;
  {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("load_checkpoint: cannot open " + manifest_path.string());
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw IoError("load_checkpoint: malformed manifest: " + std::string(e.what()));
    }
  }
  if (manifest.at("version").get<int>() != kCheckpointVersion)
    throw ValidationError("load_checkpoint: unsupported checkpoint version");

  CheckpointMeta meta;
  meta.config = config_from_json(manifest.at("config"));
  meta.norm_stats = stats_from_json(manifest.at("norm_stats"));
  meta.provenance = manifest.at("provenance").get<std::string>();
  meta.init_seed = manifest.at("init_seed").get<uint64_t>();

  auto model = std::make_unique<VliaModel>(meta.config, meta.init_seed);

  const auto& layout = manifest.at("parameters");
  auto& params = model->parameters();
  if (layout.size() != params.size())
    throw ValidationError("load_checkpoint: parameter count mismatch");
  size_t expected_bytes = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& entry = layout[i];
    if (entry.at("name").get<std::string>() != params[i].name ||
        entry.at("rows").get<Eigen::Index>() != params[i].value.rows() ||
        entry.at("cols").get<Eigen::Index>() != params[i].value.cols())
      throw ValidationError("load_checkpoint: parameter layout mismatch at " + params[i].name);
    expected_bytes += static_cast<size_t>(params[i].value.size()) * sizeof(double);
  }
  if (std::filesystem::file_size(params_path) != expected_bytes)
    throw ValidationError("load_checkpoint: params.bin size mismatch");

  std::ifstream bin(params_path, std::ios::binary);
  if (!bin) throw IoError("load_checkpoint: cannot open " + params_path.string());
  for (auto& p : params) {
    bin.read(reinterpret_cast<char*>(p.value.data()),
             static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    if (!bin) throw IoError("load_checkpoint: truncated params.bin");
    if (!p.value.allFinite())
      throw NumericalError("load_checkpoint: non-finite values in " + p.name);
    p.grad = nn::Mat::Zero(p.value.rows(), p.value.cols());
  }
  return {std::move(model), std::move(meta)};
}

}  // namespace vlia
