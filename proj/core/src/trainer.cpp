#include "vlia/trainer.hpp"

#include <cmath>
#include <fstream>

#include "vlia/errors.hpp"

namespace vlia {

std::string to_string(TrainRegime r) {
  switch (r) {
    case TrainRegime::pretrain: return "pretrain";
    case TrainRegime::posttrain: return "posttrain";
    case TrainRegime::robot_only: return "robot_only";
    case TrainRegime::human_plus_robot_finetune: return "human_plus_robot_finetune";
  }
  throw ValidationError("to_string: bad TrainRegime");
}

TrainRegime train_regime_from_string(const std::string& name) {
  for (TrainRegime r : {TrainRegime::pretrain, TrainRegime::posttrain, TrainRegime::robot_only,
                        TrainRegime::human_plus_robot_finetune})
    if (to_string(r) == name) return r;
  throw ValidationError("unknown training regime: " + name);
}

void freeze_groups(VliaModel& model, int stage) {
  if (stage != 1 && stage != 2) throw ConfigError("freeze_groups: stage must be 1 or 2");
  for (nn::Parameter& p : model.parameters()) {
    const auto g = static_cast<ParamGroup>(p.group);
    const bool frozen_in_stage1 =
        g == ParamGroup::vision_embed || g == ParamGroup::trunk || g == ParamGroup::intent_head;
    p.trainable = stage == 2 || !frozen_in_stage1;
  }
}

void TrainConfig::validate() const {
  if (steps <= 0) throw ConfigError("train: steps must be positive");
  if (batch_size <= 0) throw ConfigError("train: batch_size must be positive");
  if (lr <= 0.0) throw ConfigError("train: learning rate must be positive");
  if (warmup_frac < 0.0 || warmup_frac >= 1.0)
    throw ConfigError("train: warmup_frac must lie in [0,1)");
  model.validate();
}

MixedSampler::MixedSampler(size_t n_human, size_t n_robot, double human_prob, uint64_t seed)
    : n_human_(n_human), n_robot_(n_robot), human_prob_(human_prob), rng_(seed, 0x5A4D) {
  if (human_prob_ > 0.0 && n_human_ == 0)
    throw ConfigError("sampler: human corpus required but empty");
  if (human_prob_ < 1.0 && n_robot_ == 0)
    throw ConfigError("sampler: robot corpus required but empty");
}

MixedSampler::Draw MixedSampler::draw() {
  Draw d;
  d.human = rng_.bernoulli(human_prob_);
  const size_t n = d.human ? n_human_ : n_robot_;
  d.episode = static_cast<size_t>(rng_.uniform_int(0, static_cast<int64_t>(n) - 1));
  return d;
}

TrainSample make_train_sample(const Episode& episode, int frame, const ModelConfig& model_cfg,
                              const NormStats& stats, const AugmentParams& params) {
  if (frame < 0 || frame >= episode.frame_count)
    throw ValidationError("make_train_sample: frame out of range");

  synthgym::Frame raw;
  raw.image = episode.images[static_cast<size_t>(frame)];
  raw.state = episode.state.row(frame).transpose();
  raw.action = episode.action.row(frame).transpose();
  raw.gaze.x = episode.gaze(frame, 0);
  raw.gaze.y = episode.gaze(frame, 1);
  raw.gaze.confidence = episode.gaze_confidence(frame);
  raw.gaze.mask = episode.gaze_mask[static_cast<size_t>(frame)] != 0;
  raw.hand_left = episode.hand_left[static_cast<size_t>(frame)] != 0;
  raw.hand_right = episode.hand_right[static_cast<size_t>(frame)] != 0;
  const synthgym::Frame aug = augment_with(raw, params);

  TrainSample s;
  s.image = aug.image;
  s.text_ids = tokenize_instruction(episode.instruction, model_cfg.max_text_len, &s.text_real_len);
  s.state = normalize_state(stats, aug.state);

  s.chunk.resize(model_cfg.horizon, model_cfg.action_dim);
  for (int h = 0; h < model_cfg.horizon; ++h) {
    const int src = std::min(frame + h, episode.frame_count - 1);
    Eigen::VectorXd a = episode.action.row(src).transpose();
    if (params.flip) a = flip_action_layout(a);
    s.chunk.row(h) = normalize_action(stats, a).transpose();
  }

  const TokenizerConfig tok = model_cfg.tokenizer();
  if (aug.gaze.mask) {
    s.intent = encode_gaze(tok, aug.gaze.x, aug.gaze.y);
    s.intent_weight = 1.0;
  } else {
    s.intent = encode_gaze(tok, 0.5, 0.5);  // placeholder; weight keeps it out of the loss
    s.intent_weight = 0.0;
  }
  return s;
}

namespace {

double human_probability(TrainRegime regime) {
  switch (regime) {
    case TrainRegime::pretrain: return 1.0;
    case TrainRegime::robot_only: return 0.0;
    case TrainRegime::posttrain:
    case TrainRegime::human_plus_robot_finetune: return 0.5;
  }
  throw ValidationError("bad TrainRegime");
}

void check_corpora(const TrainConfig& cfg, size_t n_human, size_t n_robot) {
  const double p = human_probability(cfg.regime);
  if (p > 0.0 && n_human == 0)
    throw ConfigError("train: regime " + to_string(cfg.regime) + " needs human episodes");
  if (p < 1.0 && n_robot == 0)
    throw ConfigError("train: regime " + to_string(cfg.regime) + " needs robot episodes");
  if (p == 1.0 && n_robot != 0)
    throw ConfigError("train: pretrain takes a human-only corpus");
  if (p == 0.0 && n_human != 0)
    throw ConfigError("train: robot_only takes a robot-only corpus");
  if (cfg.regime == TrainRegime::posttrain && cfg.init_checkpoint.empty())
    throw ConfigError("train: posttrain requires init_checkpoint");
  if (cfg.regime == TrainRegime::human_plus_robot_finetune && !cfg.init_checkpoint.empty())
    throw ConfigError("train: human_plus_robot_finetune starts from scratch");
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<Episode>& human,
                  const std::vector<Episode>& robot, const std::filesystem::path& out_dir) {
  cfg.validate();
  check_corpora(cfg, human.size(), robot.size());

  std::unique_ptr<VliaModel> model;
  NormStats stats;
  std::string provenance;
  uint64_t init_seed = cfg.seed;
  if (!cfg.init_checkpoint.empty()) {
    auto [loaded, meta] = load_checkpoint(cfg.init_checkpoint);
    if (!(meta.config == cfg.model))
      throw ConfigError("train: init checkpoint was built with a different model config");
    model = std::move(loaded);
    stats = meta.norm_stats;  // keep the pretraining normalization
    provenance = meta.provenance + " -> ";
    init_seed = meta.init_seed;
  } else {
    model = std::make_unique<VliaModel>(cfg.model, cfg.seed);
    std::vector<Episode> all;
    all.reserve(human.size() + robot.size());
    for (const Episode& e : human) all.push_back(e);
    for (const Episode& e : robot) all.push_back(e);
    stats = compute_norm_stats(all);
  }
  provenance += to_string(cfg.regime) + "(steps=" + std::to_string(cfg.steps) +
                ",batch=" + std::to_string(cfg.batch_size) +
                ",seed=" + std::to_string(cfg.seed) + ",adamw,wd=0.01,cosine)";

  // The staged freeze applies to runs that start from a fresh initialization;
  // post-training keeps everything unfrozen from step 0.
  StageSchedule schedule;
  if (cfg.regime != TrainRegime::posttrain)
    schedule.warmup_steps = static_cast<long>(std::lround(cfg.warmup_frac * cfg.steps));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("train: cannot create " + out_dir.string());
  std::ofstream csv(out_dir / "metrics.csv");
  if (!csv) throw IoError("train: cannot open metrics.csv for writing");
  csv.precision(17);  // round-trippable doubles, so the composition identity survives the log
  csv << "step,l_intent,l_action,l_total,lr,stage\n";

  MixedSampler sampler(human.size(), robot.size(), human_probability(cfg.regime), cfg.seed);
  Rng rng(cfg.seed, 0x7281);
  nn::AdamW optimizer(cfg.optim);
  auto param_ptrs = model->parameter_ptrs();

  auto save = [&](const std::filesystem::path& dir, const std::string& note) {
    CheckpointMeta meta;
    meta.config = cfg.model;
    meta.norm_stats = stats;
    meta.provenance = provenance + note;
    meta.init_seed = init_seed;
    save_checkpoint(dir, *model, meta);
  };

  TrainResult result;
  result.logs.reserve(static_cast<size_t>(cfg.steps));
  int current_stage = 0;
  for (long step = 0; step < cfg.steps; ++step) {
    const int stage = schedule.stage_at(step);
    if (stage != current_stage) {
      freeze_groups(*model, stage);
      current_stage = stage;
    }
    const double lr = nn::lr_schedule(step, cfg.steps, schedule.warmup_steps, cfg.lr);
    nn::AdamW::zero_grad(param_ptrs);

    double sum_action = 0.0, sum_intent = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const MixedSampler::Draw d = sampler.draw();
      const Episode& ep = d.human ? human[d.episode] : robot[d.episode];
      const int frame = static_cast<int>(rng.uniform_int(0, ep.frame_count - 1));
      const AugmentParams params = cfg.augment_enabled ? draw_augment_params(rng, cfg.augment)
                                                       : AugmentParams::identity();
      const TrainSample sample = make_train_sample(ep, frame, cfg.model, stats, params);

      nn::Graph g;
      std::vector<int> intent_ids;
      if (sample.intent_weight > 0.0)
        intent_ids.assign(sample.intent.tokens.begin(), sample.intent.tokens.end());
      PrefixForward fwd =
          model->forward_prefix(g, sample.image, sample.text_ids, sample.text_real_len, intent_ids);
      const FlowSample flow = make_flow_sample(sample.chunk, rng);
      nn::Node* v = model->predict_velocity(g, fwd.keys, fwd.values, fwd.pad_positions,
                                            flow.a_tau, flow.tau, sample.state);
      nn::Node* l_action = model->loss_action(g, v, flow);
      nn::Node* total;
      if (sample.intent_weight > 0.0) {
        nn::Node* l_intent = model->loss_intent(g, fwd.intent_logits, sample.intent, 1.0);
        total = model->loss_total(g, l_action, l_intent);
        sum_intent += l_intent->value(0, 0);
      } else {
        total = g.scale(l_action, cfg.model.lambda_action);
      }
      g.backward(g.scale(total, 1.0 / cfg.batch_size));
      sum_action += l_action->value(0, 0);
    }

    StepLog log;
    log.step = step;
    log.l_action = sum_action / cfg.batch_size;
    log.l_intent = sum_intent / cfg.batch_size;
    log.l_total = cfg.model.lambda_action * log.l_action + cfg.model.lambda_intent * log.l_intent;
    log.lr = lr;
    log.stage = stage;
    if (!std::isfinite(log.l_total)) {
      save(out_dir / "diagnostic", ",aborted_at_step=" + std::to_string(step));
      throw NumericalError("train: non-finite loss at step " + std::to_string(step));
    }

    optimizer.step(param_ptrs, lr);

    csv << log.step << ',' << log.l_intent << ',' << log.l_action << ',' << log.l_total << ','
        << log.lr << ',' << log.stage << '\n';
    csv.flush();
    result.logs.push_back(log);
  }

  freeze_groups(*model, 2);  // persist with every parameter live
  result.checkpoint_dir = out_dir / "checkpoint";
  save(result.checkpoint_dir, "");
  return result;
}

}  // namespace vlia
