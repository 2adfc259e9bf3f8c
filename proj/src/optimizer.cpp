#include "mimick/optimizer.hpp"

#include <cmath>

#include "mimick/errors.hpp"

namespace mimick {

void MomentumSgd::set_learning_rate(double learning_rate) {
  if (!(learning_rate > 0)) {
    throw ContractError("learning rate must be positive");
  }
  learning_rate_ = learning_rate;
}

MomentumSgd::MomentumSgd(ParameterList params, double learning_rate,
                         double momentum, double clip_norm)
    : params_(std::move(params)),
      learning_rate_(learning_rate),
      momentum_(momentum),
      clip_norm_(clip_norm) {
  if (!(learning_rate > 0)) {
    throw ContractError("learning rate must be positive");
  }
  if (!(momentum >= 0 && momentum < 1)) {
    throw ContractError("momentum must lie in [0, 1)");
  }
  if (!(clip_norm >= 0)) throw ContractError("clip norm must be >= 0");
  velocity_.reserve(params_.size());
  for (Parameter* p : params_) velocity_.emplace_back(p->shape());
}

double MomentumSgd::gradient_norm() const {
  double total = 0;
  for (const Parameter* p : params_) {
    const auto grad = p->grad().values();
    auto add = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) total += grad[i] * grad[i];
    };
    if (p->row_sparse()) {
      const std::size_t cols = p->value().cols();
      for (std::uint32_t r : p->touched_rows()) add(r * cols, (r + 1) * cols);
    } else {
      add(0, grad.size());
    }
  }
  return std::sqrt(total);
}

void MomentumSgd::step() {
  double scale = 1.0;
  if (clip_norm_ > 0) {
    const double norm = gradient_norm();
    if (norm > clip_norm_) scale = clip_norm_ / norm;
  }
  const double rate = learning_rate_ * scale;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    auto value = p.value().values();
    auto grad = p.grad().values();
    auto vel = velocity_[k].values();
    auto update = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        vel[i] = momentum_ * vel[i] + rate * grad[i];
        value[i] -= vel[i];
      }
    };
    if (p.row_sparse()) {
      const std::size_t cols = p.value().cols();
      for (std::uint32_t r : p.touched_rows()) update(r * cols, (r + 1) * cols);
    } else {
      update(0, value.size());
    }
    p.zero_grad();
  }
}

}  // namespace mimick
