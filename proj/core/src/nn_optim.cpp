#include "vlia/nn/optim.hpp"

#include <cmath>

namespace vlia::nn {

void AdamW::step(std::vector<Parameter*>& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    if (p->adam_m.size() == 0) {
      p->adam_m = Mat::Zero(p->value.rows(), p->value.cols());
      p->adam_v = Mat::Zero(p->value.rows(), p->value.cols());
    }
    p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * p->grad;
    p->adam_v = cfg_.beta2 * p->adam_v + (1.0 - cfg_.beta2) * p->grad.cwiseAbs2();
    const Mat m_hat = p->adam_m / bc1;
    const Mat v_hat = p->adam_v / bc2;
    p->value -= lr * (m_hat.array() / (v_hat.array().sqrt() + cfg_.eps)).matrix();
    p->value -= lr * cfg_.weight_decay * p->value;
  }
}

void AdamW::zero_grad(std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->grad.setZero();
}

double lr_schedule(long step, long total_steps, long warmup_steps, double peak_lr,
                   double floor_frac) {
  if (warmup_steps > 0 && step < warmup_steps)
    return peak_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  if (total_steps <= warmup_steps) return peak_lr;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  const double cosine = 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, progress)));
  return peak_lr * (floor_frac + (1.0 - floor_frac) * cosine);
}

}  // namespace vlia::nn
