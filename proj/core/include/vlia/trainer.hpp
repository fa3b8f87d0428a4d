#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vlia/episode.hpp"
#include "vlia/model.hpp"
#include "vlia/nn/optim.hpp"
#include "vlia/pipeline.hpp"

namespace vlia {

/// Corpus recipes. Pretrain consumes human demonstrations only; posttrain
/// mixes human and robot 1:1 starting from a pretrain checkpoint;
/// robot_only and human_plus_robot_finetune are the ablation variants that
/// start from a fresh initialization.
enum class TrainRegime { pretrain, posttrain, robot_only, human_plus_robot_finetune };

std::string to_string(TrainRegime r);
TrainRegime train_regime_from_string(const std::string& name);

/// Two-stage freeze plan: stage 1 (warm-up) trains only the action-generation
/// side; stage 2 unfreezes everything.
struct StageSchedule {
  long warmup_steps = 0;

  int stage_at(long step) const { return step < warmup_steps ? 1 : 2; }
};

/// Applies a stage's freeze set to the model's parameter groups.
/// Stage 1 freezes the vision patch embedding, trunk and intention head;
/// stage 2 marks every parameter trainable. Throws ConfigError otherwise.
void freeze_groups(VliaModel& model, int stage);

struct TrainConfig {
  long steps = 500;
  int batch_size = 8;
  double lr = 5e-5;
  double warmup_frac = 0.1;       // stage-1 share of total steps (0 disables)
  uint64_t seed = 0;
  TrainRegime regime = TrainRegime::pretrain;
  ModelConfig model;
  AugmentConfig augment;
  bool augment_enabled = true;
  std::filesystem::path init_checkpoint;  // required for posttrain
  nn::AdamWConfig optim;

  void validate() const;
};

/// Per-sample Bernoulli(human_prob) choice of corpus plus a uniform episode
/// index within it. human_prob is 1 for human-only regimes, 0 for robot-only
/// and 1/2 for the mixed ones.
class MixedSampler {
 public:
  struct Draw {
    bool human = true;
    size_t episode = 0;
  };

  MixedSampler(size_t n_human, size_t n_robot, double human_prob, uint64_t seed);
  Draw draw();

 private:
  size_t n_human_, n_robot_;
  double human_prob_;
  Rng rng_;
};

/// One fully prepared supervised example: augmented image, tokenized
/// instruction, normalized state and H x 48 action chunk (last action repeated
/// past the episode end), and the intention target with its loss weight
/// (0 for robot frames and filtered-out gaze).
struct TrainSample {
  Image image;
  std::vector<int> text_ids;
  int text_real_len = 0;
  Eigen::VectorXd state;  // normalized
  nn::Mat chunk;          // normalized, horizon x 48
  IntentionTokenSeq intent;
  double intent_weight = 0.0;
};

TrainSample make_train_sample(const Episode& episode, int frame, const ModelConfig& model_cfg,
                              const NormStats& stats, const AugmentParams& params);

struct StepLog {
  long step = 0;
  double l_intent = 0.0;
  double l_action = 0.0;
  double l_total = 0.0;
  double lr = 0.0;
  int stage = 2;
};

struct TrainResult {
  std::filesystem::path checkpoint_dir;
  std::vector<StepLog> logs;
};

/// Runs the full optimization loop and writes out_dir/checkpoint,
/// out_dir/metrics.csv and (on NaN abort) out_dir/diagnostic before throwing
/// NumericalError. Corpus/regime mismatches are rejected up front.
TrainResult train(const TrainConfig& cfg, const std::vector<Episode>& human,
                  const std::vector<Episode>& robot, const std::filesystem::path& out_dir);

}  // namespace vlia
