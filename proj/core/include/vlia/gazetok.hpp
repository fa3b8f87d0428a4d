#pragma once

#include <array>
#include <cstdint>

namespace vlia {

inline constexpr int kIntentSeqLen = 2;  // x token then y token

/// Spatial-binning gaze tokenizer. The intention vocabulary occupies
/// [base_offset, base_offset + 2*bins): x bins first, then y bins. The base
/// offset places it after the text vocabulary so the id ranges are disjoint.
struct TokenizerConfig {
  int bins = 32;
  int base_offset = 0;

  int vocab_size() const { return 2 * bins; }
  int x_token_lo() const { return base_offset; }
  int y_token_lo() const { return base_offset + bins; }
  bool is_x_token(int id) const { return id >= x_token_lo() && id < x_token_lo() + bins; }
  bool is_y_token(int id) const { return id >= y_token_lo() && id < y_token_lo() + bins; }

  void validate() const;  // bins >= 2, base_offset >= 0
};

struct IntentionTokenSeq {
  std::array<int, kIntentSeqLen> tokens{};
  bool valid = false;
};

/// Per-axis bin index floor(coord * B), clamped to B-1 at the upper edge.
/// Coordinates must lie in [0,1]^2.
IntentionTokenSeq encode_gaze(const TokenizerConfig& cfg, double x, double y);

/// Returns bin centers ((b + 0.5) / B). Tokens must lie in their axis ranges.
std::array<double, 2> decode_gaze(const TokenizerConfig& cfg, const IntentionTokenSeq& seq);

/// Maximum decode_gaze(encode_gaze(g)) error as a fraction of the unit-square
/// diagonal: 1 / (2B).
double quantization_error_bound(int bins);

}  // namespace vlia
