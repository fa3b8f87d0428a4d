#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vlia/model.hpp"
#include "vlia/synthgym.hpp"

namespace vlia {

struct InferenceConfig {
  enum class DecodeMode { greedy, temperature };

  DecodeMode mode = DecodeMode::greedy;
  double temperature = 1.0;  // used only in temperature mode
  int flow_steps = 10;       // S, forward Euler
  bool cot = true;           // decode intention tokens before acting
  uint64_t seed = 0;         // noise draw for the flow start and sampling

  void validate() const;
};

struct IntentionDecode {
  IntentionTokenSeq tokens;
  std::array<double, 2> gaze{0.5, 0.5};
};

/// One policy query: denormalized H x 48 chunk, the decoded intention when
/// chain-of-thought is enabled, and separate decode/integration timings.
struct ActResult {
  nn::Mat chunk;
  std::optional<IntentionDecode> intention;
  double decode_ms = 0.0;
  double flow_ms = 0.0;
};

/// JSON-lines trace record for one act() call.
std::string trace_line(const ActResult& result);

/// Stateful wrapper around a loaded model: runs intention decoding and flow
/// integration in normalized space, handling (de)normalization at the edges.
class PolicyRunner {
 public:
  PolicyRunner(VliaModel& model, NormStats stats, InferenceConfig cfg);

  /// Autoregressive intention decode; the cache comes back extended with the
  /// emitted tokens. Logits are restricted to the per-position axis range, so
  /// emitted tokens always lie in the intention vocabulary.
  IntentionDecode decode_intention(const Image& image, const std::string& instruction,
                                   PrefixCache& cache);

  /// S Euler steps from a fresh Gaussian draw; returns the denormalized chunk.
  /// Throws NumericalError on non-finite intermediates.
  nn::Mat integrate_flow(const PrefixCache& cache, const Eigen::VectorXd& state);
  /// Deterministic variant with caller-supplied noise (normalized space).
  nn::Mat integrate_flow(const PrefixCache& cache, const Eigen::VectorXd& state,
                         const nn::Mat& eps);

  ActResult act(const Image& image, const Eigen::VectorXd& state, const std::string& instruction);

  const InferenceConfig& config() const { return cfg_; }
  const NormStats& stats() const { return stats_; }

 private:
  int pick_token(const Eigen::RowVectorXd& logits, int lo, int count);

  VliaModel& model_;
  NormStats stats_;
  InferenceConfig cfg_;
  Rng rng_;
};

/// Adapts act() to the environment's policy signature; when `log` is non-null
/// every query's result is appended to it.
synthgym::PolicyFn make_policy_fn(PolicyRunner& runner, std::vector<ActResult>* log = nullptr);

}  // namespace vlia
