#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mimick {

// Handle to a node on a Tape.
struct Var {
  static constexpr std::uint32_t kNone = UINT32_MAX;
  std::uint32_t id = kNone;
  bool valid() const { return id != kNone; }
};

#ifdef NDEBUG
inline constexpr bool kTapeCheckedByDefault = false;
#else
inline constexpr bool kTapeCheckedByDefault = true;
#endif

// Ordered record of primitive operations for reverse-mode differentiation.
//
// Each node owns its forward value, an optional block of op-private saved
// data, and a backward closure. backward() visits nodes in exact reverse
// recording order; a closure reads grad(self) and accumulates into the grads
// of its inputs, or into Parameter gradients for parameter reads.
//
// A closure may also consume the gradient of nodes recorded immediately before
// it that it produced together (the LSTM step writes c then h and runs one
// backward on h for both).
class Tape {
 public:
  using Backward = std::function<void(Tape&, Var self)>;

  explicit Tape(bool checked = kTapeCheckedByDefault) : checked_(checked) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var push(std::vector<double> value, Backward backward = {},
           std::vector<double> saved = {});

  std::span<const double> value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  std::span<const double> saved(Var v) const { return nodes_[v.id].saved; }
  // Gradient w.r.t. node v; allocated by backward().
  std::span<double> grad(Var v) { return nodes_[v.id].grad; }
  std::span<const double> grad(Var v) const { return nodes_[v.id].grad; }

  std::size_t size() const { return nodes_.size(); }
  bool checked() const { return checked_; }
  bool has_gradients() const { return backward_done_; }

  // Seeds d(loss)/d(loss) = 1 and replays backward. Loss must be scalar.
  void backward(Var loss);
  void clear();

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> saved;
    Backward backward;
  };
  std::vector<Node> nodes_;
  bool checked_;
  bool backward_done_ = false;
};

}  // namespace mimick
