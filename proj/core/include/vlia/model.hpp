#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vlia/gazetok.hpp"
#include "vlia/image.hpp"
#include "vlia/nn/graph.hpp"
#include "vlia/pipeline.hpp"
#include "vlia/rng.hpp"

namespace vlia {

/// Parameter freeze groups. The warm-up stage trains only the action expert
/// side (expert, action encoder/decoder, state encoder).
enum class ParamGroup : int {
  vision_embed = 0,
  trunk = 1,
  intent_head = 2,
  action_expert = 3,
  action_encoder = 4,
  action_decoder = 5,
  state_encoder = 6,
};

/// Closed instruction vocabulary of the synthetic tasks. Id 0 is the pad
/// token; intention token ids start at text_vocab_size().
int text_vocab_size();
std::vector<int> tokenize_instruction(const std::string& instruction, int max_len,
                                      int* real_len = nullptr);

struct ModelConfig {
  int image_size = 64;
  int patch_size = 16;
  int embed_dim = 128;
  int layers = 4;
  int heads = 4;
  int max_text_len = 8;
  int horizon = 16;       // H
  int action_dim = 48;
  int state_dim = 48;
  int expert_dim = 128;
  int expert_heads = 4;
  double lambda_action = 1.0;
  double lambda_intent = 0.1;
  int intent_bins = 32;   // B; intention vocab = 2B, offset past the text vocab

  int patches_per_side() const { return image_size / patch_size; }
  int n_patches() const { return patches_per_side() * patches_per_side(); }
  int patch_dim() const { return patch_size * patch_size * 3; }
  int prefix_len() const { return n_patches() + max_text_len; }
  int max_seq_len() const { return prefix_len() + kIntentSeqLen; }
  TokenizerConfig tokenizer() const { return TokenizerConfig{intent_bins, text_vocab_size()}; }

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Flow-matching training draw: a_tau = tau*a + (1-tau)*eps, target = a - eps.
struct FlowSample {
  double tau = 0.0;
  nn::Mat eps;
  nn::Mat a_tau;
  nn::Mat target;
};

FlowSample make_flow_sample(const nn::Mat& actions, Rng& rng);
/// Endpoint-forcing variant used by tests.
FlowSample make_flow_sample_at(const nn::Mat& actions, double tau, Rng& rng);

/// Inference-side cache of the trunk's per-layer attention keys/values over
/// [image patches, instruction tokens, intention tokens].
struct PrefixCache {
  std::vector<nn::Mat> keys;    // per layer, len x embed_dim
  std::vector<nn::Mat> values;
  int len = 0;
  int text_real_len = 0;
  std::vector<int> pad_positions;  // masked text slots
};

/// Training-side handles into one forward pass.
struct PrefixForward {
  nn::Node* hidden = nullptr;             // seq x embed, after final layernorm
  std::vector<nn::Node*> keys, values;    // per layer
  nn::Node* intent_logits = nullptr;      // n_intent_rows x 2B (teacher-forced)
  int seq_len = 0;
  int n_intent = 0;
  std::vector<int> pad_positions;
};

class VliaModel {
 public:
  VliaModel(ModelConfig config, uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  std::vector<nn::Parameter>& parameters() { return params_; }
  const std::vector<nn::Parameter>& parameters() const { return params_; }
  std::vector<nn::Parameter*> parameter_ptrs();

  /// Teacher-forced trunk pass. intent_tokens is empty (no intention
  /// conditioning) or exactly kIntentSeqLen absolute token ids. Attention is
  /// bidirectional over image+text and causal over the intention positions.
  PrefixForward forward_prefix(nn::Graph& g, const Image& image,
                               const std::vector<int>& text_ids, int text_real_len,
                               const std::vector<int>& intent_tokens);

  /// Velocity head of the action expert; cross-attends to per-layer trunk
  /// keys/values. a_tau is H x 48, state is the normalized 48-dim reading.
  nn::Node* predict_velocity(nn::Graph& g, const std::vector<nn::Node*>& keys,
                             const std::vector<nn::Node*>& values,
                             const std::vector<int>& pad_positions, const nn::Mat& a_tau,
                             double tau, const Eigen::VectorXd& state);

  // ---- inference path (no gradients kept) ----

  /// Runs the prefix without intention tokens and returns the cache plus the
  /// intention logits for the first token (anchored at the last text token).
  std::pair<PrefixCache, Eigen::RowVectorXd> start_decode(const Image& image,
                                                          const std::string& instruction);

  /// Appends one intention token to the cache; returns the logits emitted at
  /// its position (used to decode the next token).
  Eigen::RowVectorXd extend_cache(PrefixCache& cache, int token_id);

  /// Velocity evaluation against a value-only cache.
  nn::Mat predict_velocity(const PrefixCache& cache, const nn::Mat& a_tau, double tau,
                           const Eigen::VectorXd& state);

  /// Loss helpers (1 x 1 nodes on the caller's graph).
  nn::Node* loss_intent(nn::Graph& g, nn::Node* intent_logits,
                        const IntentionTokenSeq& target, double gaze_mask);
  nn::Node* loss_action(nn::Graph& g, nn::Node* velocity_pred, const FlowSample& sample);
  nn::Node* loss_total(nn::Graph& g, nn::Node* l_action, nn::Node* l_intent) ;

 private:
  friend struct ModelOps;

  ModelConfig config_;
  std::vector<nn::Parameter> params_;
  std::unordered_map<std::string, size_t> index_;  // name -> params_ slot
  size_t index_of(const std::string& name) const;
  nn::Parameter& p(const std::string& name) { return params_[index_of(name)]; }
};

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  ModelConfig config;
  NormStats norm_stats;
  std::string provenance;  // training stage / regime trail
  uint64_t init_seed = 0;
};

void save_checkpoint(const std::filesystem::path& dir, const VliaModel& model,
                     const CheckpointMeta& meta);
/// Throws MissingPrerequisite when absent and ValidationError on version or
/// layout mismatch.
std::pair<std::unique_ptr<VliaModel>, CheckpointMeta> load_checkpoint(
    const std::filesystem::path& dir);

/// FNV-1a content hash over every parameter byte; evaluation uses it to prove
/// checkpoints are not mutated.
uint64_t parameter_hash(const VliaModel& model);

}  // namespace vlia
