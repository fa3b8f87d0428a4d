#include "vlia/inference.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vlia/errors.hpp"
#include "vlia/gazetok.hpp"

namespace vlia {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void InferenceConfig::validate() const {
  if (flow_steps < 1) throw ConfigError("inference: flow_steps must be >= 1");
  if (mode == DecodeMode::temperature && temperature <= 0.0)
    throw ConfigError("inference: temperature must be positive");
}

std::string trace_line(const ActResult& result) {
  nlohmann::json j;
  if (result.intention) {
    j["intent_tokens"] = {result.intention->tokens.tokens[0], result.intention->tokens.tokens[1]};
    j["gaze"] = {result.intention->gaze[0], result.intention->gaze[1]};
  }
  j["chunk_rows"] = result.chunk.rows();
  j["chunk_norm"] = result.chunk.norm();
  j["decode_ms"] = result.decode_ms;
  j["flow_ms"] = result.flow_ms;
  return j.dump();
}

PolicyRunner::PolicyRunner(VliaModel& model, NormStats stats, InferenceConfig cfg)
    : model_(model), stats_(std::move(stats)), cfg_(cfg), rng_(cfg.seed, 0x1AF0) {
  cfg_.validate();
}

int PolicyRunner::pick_token(const Eigen::RowVectorXd& logits, int lo, int count) {
  if (cfg_.mode == InferenceConfig::DecodeMode::greedy) {
    int best = lo;
    for (int i = lo; i < lo + count; ++i)
      if (logits(i) > logits(best)) best = i;
    return best;
  }
  Eigen::VectorXd p(count);
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) mx = std::max(mx, logits(lo + i));
  double z = 0.0;
  for (int i = 0; i < count; ++i) z += (p(i) = std::exp((logits(lo + i) - mx) / cfg_.temperature));
  double u = rng_.uniform() * z;
  for (int i = 0; i < count; ++i) {
    u -= p(i);
    if (u <= 0.0) return lo + i;
  }
  return lo + count - 1;
}

IntentionDecode PolicyRunner::decode_intention(const Image& image, const std::string& instruction,
                                               PrefixCache& cache) {
  const TokenizerConfig tok = model_.config().tokenizer();
  auto [fresh_cache, logits0] = model_.start_decode(image, instruction);
  cache = std::move(fresh_cache);
  // intent_head logits are indexed by local intention id; position 0 emits an
  // x token, position 1 a y token.
  IntentionDecode out;
  const int x_local = pick_token(logits0, 0, tok.bins);
  out.tokens.tokens[0] = tok.base_offset + x_local;
  const Eigen::RowVectorXd logits1 = model_.extend_cache(cache, out.tokens.tokens[0]);
  const int y_local = pick_token(logits1, tok.bins, tok.bins);
  out.tokens.tokens[1] = tok.base_offset + y_local;
  model_.extend_cache(cache, out.tokens.tokens[1]);
  out.tokens.valid = true;
  out.gaze = decode_gaze(tok, out.tokens);
  return out;
}

nn::Mat PolicyRunner::integrate_flow(const PrefixCache& cache, const Eigen::VectorXd& state) {
  nn::Mat eps(model_.config().horizon, model_.config().action_dim);
  for (Eigen::Index r = 0; r < eps.rows(); ++r)
    for (Eigen::Index c = 0; c < eps.cols(); ++c) eps(r, c) = rng_.gaussian();
  return integrate_flow(cache, state, eps);
}

nn::Mat PolicyRunner::integrate_flow(const PrefixCache& cache, const Eigen::VectorXd& state,
                                     const nn::Mat& eps) {
  const int S = cfg_.flow_steps;
  const double dt = 1.0 / S;
  nn::Mat a = eps;
  for (int s = 0; s < S; ++s) {
    const double tau = static_cast<double>(s) / S;
    a += dt * model_.predict_velocity(cache, a, tau, state);
    if (!a.allFinite())
      throw NumericalError("integrate_flow: non-finite chunk at step " + std::to_string(s));
  }
  nn::Mat out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    out.row(r) = denormalize_action(stats_, a.row(r).transpose()).transpose();
  return out;
}

ActResult PolicyRunner::act(const Image& image, const Eigen::VectorXd& state,
                            const std::string& instruction) {
  ActResult result;
  PrefixCache cache;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg_.cot) {
    result.intention = decode_intention(image, instruction, cache);
  } else {
    auto [fresh_cache, logits] = model_.start_decode(image, instruction);
    cache = std::move(fresh_cache);
  }
  result.decode_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  result.chunk = integrate_flow(cache, normalize_state(stats_, state));
  result.flow_ms = ms_since(t1);
  return result;
}

synthgym::PolicyFn make_policy_fn(PolicyRunner& runner, std::vector<ActResult>* log) {
  return [&runner, log](const Image& image, const Eigen::VectorXd& state,
                        const std::string& instruction) -> Eigen::MatrixXd {
    ActResult r = runner.act(image, state, instruction);
    Eigen::MatrixXd chunk = r.chunk;
    if (log) log->push_back(std::move(r));
    return chunk;
  };
}

}  // namespace vlia
