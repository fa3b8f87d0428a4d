#pragma once

#include <vector>

#include "vlia/nn/graph.hpp"

namespace vlia::nn {

struct AdamWConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// AdamW over a parameter list. Frozen parameters (trainable == false) are
/// skipped entirely: no moment update, no decay, no step count effect.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

  void step(std::vector<Parameter*>& params, double lr);
  static void zero_grad(std::vector<Parameter*>& params);

 private:
  AdamWConfig cfg_;
  long t_ = 0;
};

/// Linear warmup to peak_lr over warmup_steps, then cosine decay to
/// peak_lr * floor_frac at total_steps.
double lr_schedule(long step, long total_steps, long warmup_steps, double peak_lr,
                   double floor_frac = 0.1);

}  // namespace vlia::nn
