#include "vlia/model.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "vlia/errors.hpp"

namespace vlia {

using nn::Graph;
using nn::Mat;
using nn::Node;
using nn::Parameter;

namespace {

const std::vector<std::string>& vocab_words() {
  static const std::vector<std::string> words = {
      "<pad>", "place", "the", "on",      "plate",  "red",     "green",
      "blue",  "yellow", "purple", "orange", "cyan",   "magenta", "white",
      "cube",  "ball",   "cylinder", "screw", "key"};
  return words;
}

constexpr double kMaskBlock = -1e30;

Mat image_to_patches(const Image& image, const ModelConfig& c) {
  if (image.height != c.image_size || image.width != c.image_size)
    throw ValidationError("forward_prefix: image resolution mismatch");
  const int ps = c.patch_size;
  const int side = c.patches_per_side();
  Mat patches(c.n_patches(), c.patch_dim());
  for (int py = 0; py < side; ++py) {
    for (int px = 0; px < side; ++px) {
      const int row = py * side + px;
      int k = 0;
      for (int y = 0; y < ps; ++y)
        for (int x = 0; x < ps; ++x)
          for (int ch = 0; ch < 3; ++ch)
            patches(row, k++) = image.at(py * ps + y, px * ps + x, ch);
    }
  }
  return patches;
}

Mat sinusoidal_row(double t, int dim) {
  Mat row(1, dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(1000.0, static_cast<double>(i) / std::max(1, half - 1));
    row(0, 2 * i) = std::sin(t * freq);
    row(0, 2 * i + 1) = std::cos(t * freq);
  }
  if (dim % 2 == 1) row(0, dim - 1) = t;
  return row;
}

}  // namespace

int text_vocab_size() { return static_cast<int>(vocab_words().size()); }

std::vector<int> tokenize_instruction(const std::string& instruction, int max_len,
                                      int* real_len) {
  static const auto lut = [] {
    std::unordered_map<std::string, int> m;
    for (size_t i = 0; i < vocab_words().size(); ++i) m[vocab_words()[i]] = static_cast<int>(i);
    return m;
  }();
  std::vector<int> ids;
  std::istringstream in(instruction);
  std::string word;
  while (in >> word) {
    const auto it = lut.find(word);
    if (it == lut.end()) throw ValidationError("tokenize_instruction: unknown word '" + word + "'");
    ids.push_back(it->second);
  }
  if (static_cast<int>(ids.size()) > max_len)
    throw ValidationError("tokenize_instruction: instruction longer than max_text_len");
  if (ids.empty()) throw ValidationError("tokenize_instruction: empty instruction");
  if (real_len) *real_len = static_cast<int>(ids.size());
  ids.resize(static_cast<size_t>(max_len), 0);
  return ids;
}

void ModelConfig::validate() const {
  if (image_size <= 0 || patch_size <= 0 || image_size % patch_size != 0)
    throw ConfigError("model: image_size must be a positive multiple of patch_size");
  if (embed_dim <= 0 || embed_dim % heads != 0)
    throw ConfigError("model: embed_dim must be divisible by heads");
  if (expert_dim <= 0 || expert_dim % expert_heads != 0)
    throw ConfigError("model: expert_dim must be divisible by expert_heads");
  if (embed_dim % (2 * heads) != 0 && embed_dim % heads != 0)
    throw ConfigError("model: bad head split");
  if (layers < 1) throw ConfigError("model: need at least one layer");
  if (horizon < 1) throw ConfigError("model: horizon must be >= 1");
  if (action_dim != 48) throw ConfigError("model: action_dim must be 48");
  if (lambda_action <= 0 || lambda_intent < 0)
    throw ConfigError("model: loss weights must be positive");
  if (intent_bins < 2) throw ConfigError("model: intent_bins must be >= 2");
  if (max_text_len < 1) throw ConfigError("model: max_text_len must be >= 1");
}

FlowSample make_flow_sample_at(const Mat& actions, double tau, Rng& rng) {
  if (!actions.allFinite()) throw ValidationError("make_flow_sample: non-finite actions");
  FlowSample s;
  s.tau = tau;
  s.eps.resize(actions.rows(), actions.cols());
  for (Eigen::Index r = 0; r < actions.rows(); ++r)
    for (Eigen::Index c = 0; c < actions.cols(); ++c) s.eps(r, c) = rng.gaussian();
  s.a_tau = tau * actions + (1.0 - tau) * s.eps;
  s.target = actions - s.eps;
  return s;
}

FlowSample make_flow_sample(const Mat& actions, Rng& rng) {
  return make_flow_sample_at(actions, rng.uniform(), rng);
}

// ---------------------------------------------------------------------------

struct ModelOps {
  /// Multi-head attention with externally supplied keys/values. Queries are
  /// projected from q_src with Wq/bq; the additive mask may be empty.
  static Node* mha(Graph& g, VliaModel& m, Node* q_src, const std::string& prefix,
                   Node* keys, Node* vals, int heads, const Mat& mask) {
    Node* Wq = g.param(m.p(prefix + ".Wq"));
    Node* bq = g.param(m.p(prefix + ".bq"));
    Node* Wo = g.param(m.p(prefix + ".Wo"));
    Node* bo = g.param(m.p(prefix + ".bo"));
    Node* Q = g.add_bias(g.matmul(q_src, Wq), bq);
    const int kv_dim = static_cast<int>(keys->value.cols());
    const int dh = kv_dim / heads;
    std::vector<Node*> outs;
    for (int h = 0; h < heads; ++h) {
      Node* Qh = g.slice_cols(Q, h * dh, dh);
      Node* Kh = g.slice_cols(keys, h * dh, dh);
      Node* Vh = g.slice_cols(vals, h * dh, dh);
      Node* scores = g.scale(g.matmul_nt(Qh, Kh), 1.0 / std::sqrt(static_cast<double>(dh)));
      Node* attn = g.softmax_rows(scores, mask);
      outs.push_back(g.matmul(attn, Vh));
    }
    return g.add_bias(g.matmul(g.hcat(outs), Wo), bo);
  }

  static Node* layernorm(Graph& g, VliaModel& m, Node* x, const std::string& prefix) {
    return g.layernorm_rows(x, g.param(m.p(prefix + ".g")), g.param(m.p(prefix + ".b")));
  }

  static Node* mlp(Graph& g, VliaModel& m, Node* x, const std::string& prefix) {
    Node* h = g.add_bias(g.matmul(x, g.param(m.p(prefix + ".W1"))), g.param(m.p(prefix + ".b1")));
    return g.add_bias(g.matmul(g.gelu(h), g.param(m.p(prefix + ".W2"))),
                      g.param(m.p(prefix + ".b2")));
  }

  /// Self-attention mask over [patches, text, intent]: image and text attend
  /// bidirectionally within the prefix, intention positions are causal, pad
  /// text slots are blocked as keys everywhere.
  static Mat prefix_mask(const ModelConfig& c, int text_real_len, int n_intent) {
    const int P = c.n_patches();
    const int T = c.max_text_len;
    const int S = P + T + n_intent;
    Mat mask = Mat::Zero(S, S);
    for (int j = P + text_real_len; j < P + T; ++j) mask.col(j).setConstant(kMaskBlock);
    for (int i = 0; i < P + T; ++i)
      for (int j = P + T; j < S; ++j) mask(i, j) = kMaskBlock;  // prefix never sees intent
    for (int k = 0; k < n_intent; ++k)
      for (int j = P + T + k + 1; j < S; ++j) mask(P + T + k, j) = kMaskBlock;
    return mask;
  }

  static std::vector<int> pad_positions(const ModelConfig& c, int text_real_len) {
    std::vector<int> out;
    for (int j = c.n_patches() + text_real_len; j < c.prefix_len(); ++j) out.push_back(j);
    return out;
  }

  /// One trunk transformer block; appends the layer's K/V to the outputs.
  static Node* trunk_block(Graph& g, VliaModel& m, Node* x, int layer, const Mat& mask,
                           std::vector<Node*>& keys, std::vector<Node*>& values) {
    const std::string lp = "trunk." + std::to_string(layer);
    Node* xn = layernorm(g, m, x, lp + ".ln1");
    Node* K = g.add_bias(g.matmul(xn, g.param(m.p(lp + ".attn.Wk"))),
                         g.param(m.p(lp + ".attn.bk")));
    Node* V = g.add_bias(g.matmul(xn, g.param(m.p(lp + ".attn.Wv"))),
                         g.param(m.p(lp + ".attn.bv")));
    keys.push_back(K);
    values.push_back(V);
    x = g.add(x, mha(g, m, xn, lp + ".attn", K, V, m.config().heads, mask));
    x = g.add(x, mlp(g, m, layernorm(g, m, x, lp + ".ln2"), lp + ".mlp"));
    return x;
  }

  /// Incremental trunk block for one appended token; cached K/V come in as
  /// constants and the new row's K/V are returned through new_k / new_v.
  static Node* trunk_block_incremental(Graph& g, VliaModel& m, Node* x, int layer,
                                       const Mat& cached_k, const Mat& cached_v,
                                       const Mat& mask_row, Node*& new_k, Node*& new_v) {
    const std::string lp = "trunk." + std::to_string(layer);
    Node* xn = layernorm(g, m, x, lp + ".ln1");
    new_k = g.add_bias(g.matmul(xn, g.param(m.p(lp + ".attn.Wk"))),
                       g.param(m.p(lp + ".attn.bk")));
    new_v = g.add_bias(g.matmul(xn, g.param(m.p(lp + ".attn.Wv"))),
                       g.param(m.p(lp + ".attn.bv")));
    Node* K = g.vcat({g.constant(cached_k), new_k});
    Node* V = g.vcat({g.constant(cached_v), new_v});
    x = g.add(x, mha(g, m, xn, lp + ".attn", K, V, m.config().heads, mask_row));
    x = g.add(x, mlp(g, m, layernorm(g, m, x, lp + ".ln2"), lp + ".mlp"));
    return x;
  }

  static Node* intent_logits(Graph& g, VliaModel& m, Node* hidden_rows) {
    return g.add_bias(g.matmul(hidden_rows, g.param(m.p("intent_head.W"))),
                      g.param(m.p("intent_head.b")));
  }
};

// ---------------------------------------------------------------------------

VliaModel::VliaModel(ModelConfig config, uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng(init_seed, 0xC0DE);
  const int E = config_.embed_dim;
  const int D = config_.expert_dim;
  const int vocab = text_vocab_size() + config_.tokenizer().vocab_size();

  auto add = [&](const std::string& name, ParamGroup group, int rows, int cols, double std_dev) {
    Mat v(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) v(r, c) = std_dev == 0.0 ? 0.0 : rng.gaussian(0.0, std_dev);
    params_.emplace_back(name, static_cast<int>(group), std::move(v));
  };
  auto add_ln = [&](const std::string& prefix, ParamGroup group, int dim) {
    params_.emplace_back(prefix + ".g", static_cast<int>(group), Mat::Ones(1, dim));
    params_.emplace_back(prefix + ".b", static_cast<int>(group), Mat::Zero(1, dim));
  };
  auto add_attn = [&](const std::string& prefix, ParamGroup group, int q_dim, int kv_dim,
                      int out_dim) {
    add(prefix + ".Wq", group, q_dim, kv_dim, 0.02);
    add(prefix + ".bq", group, 1, kv_dim, 0.0);
    add(prefix + ".Wo", group, kv_dim, out_dim, 0.02);
    add(prefix + ".bo", group, 1, out_dim, 0.0);
  };

  add("patch_embed.W", ParamGroup::vision_embed, config_.patch_dim(), E, 0.02);
  add("patch_embed.b", ParamGroup::vision_embed, 1, E, 0.0);
  add("token_embed", ParamGroup::trunk, vocab, E, 0.02);
  add("pos_embed", ParamGroup::trunk, config_.max_seq_len(), E, 0.02);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string lp = "trunk." + std::to_string(l);
    add_ln(lp + ".ln1", ParamGroup::trunk, E);
    add_attn(lp + ".attn", ParamGroup::trunk, E, E, E);
    add(lp + ".attn.Wk", ParamGroup::trunk, E, E, 0.02);
    add(lp + ".attn.bk", ParamGroup::trunk, 1, E, 0.0);
    add(lp + ".attn.Wv", ParamGroup::trunk, E, E, 0.02);
    add(lp + ".attn.bv", ParamGroup::trunk, 1, E, 0.0);
    add_ln(lp + ".ln2", ParamGroup::trunk, E);
    add(lp + ".mlp.W1", ParamGroup::trunk, E, 4 * E, 0.02);
    add(lp + ".mlp.b1", ParamGroup::trunk, 1, 4 * E, 0.0);
    add(lp + ".mlp.W2", ParamGroup::trunk, 4 * E, E, 0.02);
    add(lp + ".mlp.b2", ParamGroup::trunk, 1, E, 0.0);
  }
  add_ln("trunk.final_ln", ParamGroup::trunk, E);
  add("intent_head.W", ParamGroup::intent_head, E, config_.tokenizer().vocab_size(), 0.02);
  add("intent_head.b", ParamGroup::intent_head, 1, config_.tokenizer().vocab_size(), 0.0);

  add("expert.action_in.W", ParamGroup::action_encoder, config_.action_dim, D, 0.02);
  add("expert.action_in.b", ParamGroup::action_encoder, 1, D, 0.0);
  add("expert.time.W", ParamGroup::action_encoder, D, D, 0.02);
  add("expert.time.b", ParamGroup::action_encoder, 1, D, 0.0);
  add("expert.state_in.W", ParamGroup::state_encoder, config_.state_dim, D, 0.02);
  add("expert.state_in.b", ParamGroup::state_encoder, 1, D, 0.0);
  add("expert.pos_embed", ParamGroup::action_expert, config_.horizon + 1, D, 0.02);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string lp = "expert." + std::to_string(l);
    add_ln(lp + ".ln1", ParamGroup::action_expert, D);
    add_attn(lp + ".self", ParamGroup::action_expert, D, D, D);
    add(lp + ".self.Wk", ParamGroup::action_expert, D, D, 0.02);
    add(lp + ".self.bk", ParamGroup::action_expert, 1, D, 0.0);
    add(lp + ".self.Wv", ParamGroup::action_expert, D, D, 0.02);
    add(lp + ".self.bv", ParamGroup::action_expert, 1, D, 0.0);
    add_ln(lp + ".lnx", ParamGroup::action_expert, D);
    add_attn(lp + ".cross", ParamGroup::action_expert, D, E, D);
    add_ln(lp + ".ln2", ParamGroup::action_expert, D);
    add(lp + ".mlp.W1", ParamGroup::action_expert, D, 4 * D, 0.02);
    add(lp + ".mlp.b1", ParamGroup::action_expert, 1, 4 * D, 0.0);
    add(lp + ".mlp.W2", ParamGroup::action_expert, 4 * D, D, 0.02);
    add(lp + ".mlp.b2", ParamGroup::action_expert, 1, D, 0.0);
  }
  add_ln("expert.final_ln", ParamGroup::action_expert, D);
  add("expert.out.W", ParamGroup::action_decoder, D, config_.action_dim, 0.01);

  for (size_t i = 0; i < params_.size(); ++i) index_[params_[i].name] = i;
}

size_t VliaModel::index_of(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return it->second;
}

std::vector<Parameter*> VliaModel::parameter_ptrs() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

PrefixForward VliaModel::forward_prefix(Graph& g, const Image& image,
                                        const std::vector<int>& text_ids, int text_real_len,
                                        const std::vector<int>& intent_tokens) {
  const ModelConfig& c = config_;
  if (static_cast<int>(text_ids.size()) != c.max_text_len)
    throw ValidationError("forward_prefix: text_ids must be padded to max_text_len");
  if (text_real_len < 1 || text_real_len > c.max_text_len)
    throw ValidationError("forward_prefix: bad text_real_len");
  const int n_intent = static_cast<int>(intent_tokens.size());
  if (n_intent != 0 && n_intent != kIntentSeqLen)
    throw ValidationError("forward_prefix: intent_tokens must be empty or length 2");
  const int S = c.prefix_len() + n_intent;
  if (S > c.max_seq_len()) throw ValidationError("forward_prefix: sequence too long");

  const TokenizerConfig tok = c.tokenizer();
  std::vector<int> all_ids = text_ids;
  for (int t : intent_tokens) {
    if (t < tok.base_offset || t >= tok.base_offset + tok.vocab_size())
      throw ValidationError("forward_prefix: intent token outside intention vocabulary");
    all_ids.push_back(t);
  }

  Node* patches = g.add_bias(
      g.matmul(g.constant(image_to_patches(image, c)), g.param(p("patch_embed.W"))),
      g.param(p("patch_embed.b")));
  Node* tokens = g.gather_rows(g.param(p("token_embed")), all_ids);
  Node* x = g.vcat({patches, tokens});
  x = g.add(x, g.slice_rows(g.param(p("pos_embed")), 0, S));

  const Mat mask = ModelOps::prefix_mask(c, text_real_len, n_intent);
  PrefixForward out;
  for (int l = 0; l < c.layers; ++l)
    x = ModelOps::trunk_block(g, *this, x, l, mask, out.keys, out.values);
  out.hidden = ModelOps::layernorm(g, *this, x, "trunk.final_ln");

  std::vector<int> anchors{c.n_patches() + text_real_len - 1};
  if (n_intent > 0) anchors.push_back(c.prefix_len());  // position of intent token 0
  out.intent_logits = ModelOps::intent_logits(g, *this, g.gather_rows(out.hidden, anchors));
  out.seq_len = S;
  out.n_intent = n_intent;
  out.pad_positions = ModelOps::pad_positions(c, text_real_len);
  return out;
}

Node* VliaModel::predict_velocity(Graph& g, const std::vector<Node*>& keys,
                                  const std::vector<Node*>& values,
                                  const std::vector<int>& pad_positions, const Mat& a_tau,
                                  double tau, const Eigen::VectorXd& state) {
  const ModelConfig& c = config_;
  if (a_tau.rows() != c.horizon || a_tau.cols() != c.action_dim)
    throw ValidationError("predict_velocity: a_tau must be H x 48");
  if (state.size() != c.state_dim) throw ValidationError("predict_velocity: bad state width");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("predict_velocity: tau outside [0,1]");
  if (!a_tau.allFinite() || !state.allFinite())
    throw ValidationError("predict_velocity: non-finite inputs");
  if (static_cast<int>(keys.size()) != c.layers || values.size() != keys.size())
    throw ValidationError("predict_velocity: cache layer count mismatch");

  Node* te = g.add_bias(g.matmul(g.constant(sinusoidal_row(tau, c.expert_dim)),
                                 g.param(p("expert.time.W"))),
                        g.param(p("expert.time.b")));
  Node* st = g.add_bias(
      g.matmul(g.constant(Mat(state.transpose())), g.param(p("expert.state_in.W"))),
      g.param(p("expert.state_in.b")));
  Node* acts = g.add_bias(g.matmul(g.constant(a_tau), g.param(p("expert.action_in.W"))),
                          g.param(p("expert.action_in.b")));
  acts = g.add_bias(acts, te);
  Node* x = g.vcat({st, acts});
  x = g.add(x, g.slice_rows(g.param(p("expert.pos_embed")), 0, c.horizon + 1));

  const int n_q = c.horizon + 1;
  const auto S = keys.front()->value.rows();
  Mat cross_mask = Mat::Zero(n_q, S);
  for (int j : pad_positions) cross_mask.col(j).setConstant(kMaskBlock);

  for (int l = 0; l < c.layers; ++l) {
    const std::string lp = "expert." + std::to_string(l);
    Node* xn = ModelOps::layernorm(g, *this, x, lp + ".ln1");
    Node* K = g.add_bias(g.matmul(xn, g.param(p(lp + ".self.Wk"))), g.param(p(lp + ".self.bk")));
    Node* V = g.add_bias(g.matmul(xn, g.param(p(lp + ".self.Wv"))), g.param(p(lp + ".self.bv")));
    x = g.add(x, ModelOps::mha(g, *this, xn, lp + ".self", K, V, c.expert_heads, Mat()));
    Node* xc = ModelOps::layernorm(g, *this, x, lp + ".lnx");
    x = g.add(x, ModelOps::mha(g, *this, xc, lp + ".cross", keys[static_cast<size_t>(l)],
                               values[static_cast<size_t>(l)], c.heads, cross_mask));
    x = g.add(x, ModelOps::mlp(g, *this, ModelOps::layernorm(g, *this, x, lp + ".ln2"),
                               lp + ".mlp"));
  }
  Node* h = ModelOps::layernorm(g, *this, x, "expert.final_ln");
  Node* rows = g.slice_rows(h, 1, c.horizon);
  return g.matmul(rows, g.param(p("expert.out.W")));  // bias-free head
}

std::pair<PrefixCache, Eigen::RowVectorXd> VliaModel::start_decode(
    const Image& image, const std::string& instruction) {
  int real_len = 0;
  const std::vector<int> text_ids = tokenize_instruction(instruction, config_.max_text_len, &real_len);
  Graph g;
  PrefixForward fwd = forward_prefix(g, image, text_ids, real_len, {});
  PrefixCache cache;
  for (int l = 0; l < config_.layers; ++l) {
    cache.keys.push_back(fwd.keys[static_cast<size_t>(l)]->value);
    cache.values.push_back(fwd.values[static_cast<size_t>(l)]->value);
  }
  cache.len = fwd.seq_len;
  cache.text_real_len = real_len;
  cache.pad_positions = fwd.pad_positions;
  return {std::move(cache), fwd.intent_logits->value.row(0)};
}

Eigen::RowVectorXd VliaModel::extend_cache(PrefixCache& cache, int token_id) {
  const TokenizerConfig tok = config_.tokenizer();
  if (token_id < tok.base_offset || token_id >= tok.base_offset + tok.vocab_size())
    throw ValidationError("extend_cache: token outside intention vocabulary");
  if (cache.len >= config_.max_seq_len())
    throw ValidationError("extend_cache: cache already at max sequence length");

  Graph g;
  Node* x = g.gather_rows(g.param(p("token_embed")), {token_id});
  x = g.add(x, g.slice_rows(g.param(p("pos_embed")), cache.len, 1));

  Mat mask_row = Mat::Zero(1, cache.len + 1);
  for (int j : cache.pad_positions) mask_row(0, j) = kMaskBlock;

  std::vector<Node*> new_k(static_cast<size_t>(config_.layers));
  std::vector<Node*> new_v(static_cast<size_t>(config_.layers));
  for (int l = 0; l < config_.layers; ++l)
    x = ModelOps::trunk_block_incremental(g, *this, x, l, cache.keys[static_cast<size_t>(l)],
                                          cache.values[static_cast<size_t>(l)], mask_row,
                                          new_k[static_cast<size_t>(l)],
                                          new_v[static_cast<size_t>(l)]);
  Node* h = ModelOps::layernorm(g, *this, x, "trunk.final_ln");
  Node* logits = ModelOps::intent_logits(g, *this, h);

  for (int l = 0; l < config_.layers; ++l) {
    auto& K = cache.keys[static_cast<size_t>(l)];
    auto& V = cache.values[static_cast<size_t>(l)];
    K.conservativeResize(K.rows() + 1, Eigen::NoChange);
    K.row(K.rows() - 1) = new_k[static_cast<size_t>(l)]->value.row(0);
    V.conservativeResize(V.rows() + 1, Eigen::NoChange);
    V.row(V.rows() - 1) = new_v[static_cast<size_t>(l)]->value.row(0);
  }
  cache.len += 1;
  return logits->value.row(0);
}

Mat VliaModel::predict_velocity(const PrefixCache& cache, const Mat& a_tau, double tau,
                                const Eigen::VectorXd& state) {
  Graph g;
  std::vector<Node*> keys, values;
  for (int l = 0; l < config_.layers; ++l) {
    keys.push_back(g.constant(cache.keys[static_cast<size_t>(l)]));
    values.push_back(g.constant(cache.values[static_cast<size_t>(l)]));
  }
  Node* v = predict_velocity(g, keys, values, cache.pad_positions, a_tau, tau, state);
  return v->value;
}

Node* VliaModel::loss_intent(Graph& g, Node* intent_logits, const IntentionTokenSeq& target,
                             double gaze_mask) {
  if (intent_logits->value.rows() != kIntentSeqLen)
    throw ValidationError("loss_intent: need logits for every intention position");
  const TokenizerConfig tok = config_.tokenizer();
  std::vector<int> cols;
  for (int t : target.tokens) {
    if (t < tok.base_offset || t >= tok.base_offset + tok.vocab_size())
      throw ValidationError("loss_intent: target outside intention vocabulary");
    cols.push_back(t - tok.base_offset);
  }
  const std::vector<double> weights(static_cast<size_t>(kIntentSeqLen), gaze_mask);
  return g.cross_entropy(intent_logits, cols, weights, static_cast<double>(kIntentSeqLen));
}

Node* VliaModel::loss_action(Graph& g, Node* velocity_pred, const FlowSample& sample) {
  return g.mse(velocity_pred, sample.target);
}

Node* VliaModel::loss_total(Graph& g, Node* l_action, Node* l_intent) {
  return g.add_scaled(l_action, l_intent, config_.lambda_action, config_.lambda_intent);
}

uint64_t parameter_hash(const VliaModel& model) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const unsigned char* bytes, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const Parameter& p : model.parameters())
    mix(reinterpret_cast<const unsigned char*>(p.value.data()),
        static_cast<size_t>(p.value.size()) * sizeof(double));
  return h;
}

}  // namespace vlia
