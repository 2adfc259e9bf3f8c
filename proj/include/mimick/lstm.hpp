#pragma once

#include <string>
#include <vector>

#include "mimick/random.hpp"
#include "mimick/tape.hpp"
#include "mimick/tensor.hpp"

namespace mimick {

// Standard LSTM cell without peepholes:
//   z = W [x; h_prev] + b
//   i = sigmoid(z_i)  f = sigmoid(z_f)  o = sigmoid(z_o)  g = tanh(z_g)
//   c = f * c_prev + i * g
//   h = o * tanh(c)
// The four gate blocks are stacked in `weight` (4H x (I+H)) and `bias` (4H)
// in the order input, forget, output, candidate. Each block is H x (I+H).
struct LstmCell {
  enum Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

  Parameter weight;
  Parameter bias;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  // Glorot-uniform blocks, forget bias 1, other biases 0.
  static LstmCell create(const std::string& prefix, std::size_t input_size,
                         std::size_t hidden_size, Rng& rng);
  // Zero weights and biases, for tests and manual construction.
  static LstmCell zeros(const std::string& prefix, std::size_t input_size,
                        std::size_t hidden_size);

  ParameterList parameters() { return {&weight, &bias}; }
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_initial_state(Tape& tape, const LstmCell& cell);
LstmState lstm_step(Tape& tape, const LstmCell& cell, Var x, LstmState prev);

// Runs the cell over `inputs` (right to left when `reverse`) from a zero
// state. Returns hidden states aligned with `inputs`: for a reverse sweep,
// element 0 is the state after consuming the whole sequence.
std::vector<Var> lstm_sweep(Tape& tape, const LstmCell& cell,
                            std::span<const Var> inputs, bool reverse);

}  // namespace mimick
