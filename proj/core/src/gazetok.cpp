#include "vlia/gazetok.hpp"

#include <cmath>
#include <string>

#include "vlia/errors.hpp"

namespace vlia {

void TokenizerConfig::validate() const {
  if (bins < 2) throw ConfigError("tokenizer: bins must be >= 2");
  if (base_offset < 0) throw ConfigError("tokenizer: base_offset must be >= 0");
}

IntentionTokenSeq encode_gaze(const TokenizerConfig& cfg, double x, double y) {
  cfg.validate();
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
    throw ValidationError("encode_gaze: coordinate outside [0,1]^2");
  const auto bin = [&](double v) {
    int b = static_cast<int>(std::floor(v * cfg.bins));
    return std::min(b, cfg.bins - 1);  // clamp the exact upper edge
  };
  IntentionTokenSeq seq;
  seq.tokens[0] = cfg.x_token_lo() + bin(x);
  seq.tokens[1] = cfg.y_token_lo() + bin(y);
  seq.valid = true;
  return seq;
}

std::array<double, 2> decode_gaze(const TokenizerConfig& cfg, const IntentionTokenSeq& seq) {
  cfg.validate();
  if (!cfg.is_x_token(seq.tokens[0]))
    throw ValidationError("decode_gaze: token 0 outside x range: " + std::to_string(seq.tokens[0]));
  if (!cfg.is_y_token(seq.tokens[1]))
    throw ValidationError("decode_gaze: token 1 outside y range: " + std::to_string(seq.tokens[1]));
  const double bx = seq.tokens[0] - cfg.x_token_lo();
  const double by = seq.tokens[1] - cfg.y_token_lo();
  return {(bx + 0.5) / cfg.bins, (by + 0.5) / cfg.bins};
}

double quantization_error_bound(int bins) {
  if (bins < 2) throw ConfigError("quantization_error_bound: bins must be >= 2");
  return 1.0 / (2.0 * bins);
}

}  // namespace vlia
