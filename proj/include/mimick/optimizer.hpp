#pragma once

#include <vector>

#include "mimick/tensor.hpp"

namespace mimick {

// Classical momentum: v <- mu v + lr g; p <- p - v. Gradients are zeroed
// after every step. With a positive `clip_norm`, g is rescaled so the global
// L2 norm over all parameters is at most clip_norm. Row-sparse parameters update only the rows that received
// gradient since the last step (their other velocity rows are left as is).
class MomentumSgd {
 public:
  MomentumSgd(ParameterList params, double learning_rate, double momentum,
              double clip_norm = 0.0);

  void step();
  // Global L2 norm of the pending gradients.
  double gradient_norm() const;
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double learning_rate);
  double momentum() const { return momentum_; }
  double clip_norm() const { return clip_norm_; }
  const Tensor& velocity(std::size_t i) const { return velocity_[i]; }

 private:
  ParameterList params_;
  std::vector<Tensor> velocity_;
  double learning_rate_;
  double momentum_;
  double clip_norm_;
};

}  // namespace mimick
