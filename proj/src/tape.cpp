#include "mimick/tape.hpp"

#include <cmath>
#include <string>

#include "mimick/errors.hpp"

namespace mimick {

Var Tape::push(std::vector<double> value, Backward backward,
               std::vector<double> saved) {
  if (checked_) {
    for (double v : value) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite value produced by tape node " +
                           std::to_string(nodes_.size()));
      }
    }
  }
  nodes_.push_back(
      Node{std::move(value), {}, std::move(saved), std::move(backward)});
  backward_done_ = false;
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

double Tape::scalar(Var v) const {
  const auto& value = nodes_[v.id].value;
  if (value.size() != 1) {
    throw ContractError("node " + std::to_string(v.id) + " is not a scalar (" +
                        std::to_string(value.size()) + " values)");
  }
  return value[0];
}

void Tape::backward(Var loss) {
  if (!loss.valid() || loss.id >= nodes_.size()) {
    throw ContractError("backward: loss is not a node of this tape");
  }
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward: loss must be a scalar node, got " +
                        std::to_string(nodes_[loss.id].value.size()) +
                        " values");
  }
  for (auto& node : nodes_) node.grad.assign(node.value.size(), 0.0);
  nodes_[loss.id].grad[0] = 1.0;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, Var{i});
  }
  backward_done_ = true;
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace mimick
