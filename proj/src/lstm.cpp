#include "mimick/lstm.hpp"

#include <cmath>

#include "mimick/errors.hpp"
#include "mimick/init.hpp"
#include "mimick/kernels.hpp"
#include "mimick/ops.hpp"

namespace mimick {

namespace {
constexpr std::size_t kInput = LstmCell::kInput;
constexpr std::size_t kForget = LstmCell::kForget;
constexpr std::size_t kOutput = LstmCell::kOutput;
constexpr std::size_t kCandidate = LstmCell::kCandidate;
}  // namespace

LstmCell LstmCell::create(const std::string& prefix, std::size_t input_size,
                          std::size_t hidden_size, Rng& rng) {
  LstmCell cell = zeros(prefix, input_size, hidden_size);
  const std::size_t cols = input_size + hidden_size;
  const double limit = glorot_limit(cols, hidden_size);
  for (double& v : cell.weight.value().values()) v = rng.uniform(-limit, limit);
  for (std::size_t j = 0; j < hidden_size; ++j) {
    cell.bias.value()[kForget * hidden_size + j] = 1.0;
  }
  return cell;
}

LstmCell LstmCell::zeros(const std::string& prefix, std::size_t input_size,
                         std::size_t hidden_size) {
  if (input_size == 0 || hidden_size == 0) {
    throw DimensionError("LSTM sizes must be positive");
  }
  LstmCell cell;
  cell.input_size = input_size;
  cell.hidden_size = hidden_size;
  cell.weight = Parameter(prefix + ".weight",
                          Tensor({4 * hidden_size, input_size + hidden_size}));
  cell.bias = Parameter(prefix + ".bias", Tensor({4 * hidden_size}));
  return cell;
}

LstmState lstm_initial_state(Tape& tape, const LstmCell& cell) {
  const std::vector<double> zero(cell.hidden_size, 0.0);
  return {input(tape, zero), input(tape, zero)};
}

LstmState lstm_step(Tape& tape, const LstmCell& cell, Var x, LstmState prev) {
  const std::size_t in = cell.input_size, hid = cell.hidden_size;
  const auto xv = tape.value(x);
  const auto hv = tape.value(prev.h);
  const auto cv = tape.value(prev.c);
  if (xv.size() != in) {
    throw DimensionError("lstm_step: input of size " +
                         std::to_string(xv.size()) + " for cell with input " +
                         std::to_string(in));
  }
  if (hv.size() != hid || cv.size() != hid) {
    throw DimensionError("lstm_step: state sizes [" +
                         std::to_string(hv.size()) + "], [" +
                         std::to_string(cv.size()) +
                         "] for cell with hidden " + std::to_string(hid));
  }

  // saved = [x; h_prev] (in+hid) | gates i f o g (4 hid) | tanh(c) (hid)
  const std::size_t cols = in + hid;
  std::vector<double> saved(cols + 5 * hid);
  std::copy(xv.begin(), xv.end(), saved.begin());
  std::copy(hv.begin(), hv.end(), saved.begin() + in);
  std::span<double> xh(saved.data(), cols);
  std::span<double> gates(saved.data() + cols, 4 * hid);
  std::span<double> tanh_c(saved.data() + cols + 4 * hid, hid);

  kernels::matvec(cell.weight.value().values(), 4 * hid, cols, xh,
                  cell.bias.value().values(), gates);
  std::vector<double> c(hid), h(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const double ig = sigmoid(gates[kInput * hid + j]);
    const double fg = sigmoid(gates[kForget * hid + j]);
    const double og = sigmoid(gates[kOutput * hid + j]);
    const double cg = std::tanh(gates[kCandidate * hid + j]);
    gates[kInput * hid + j] = ig;
    gates[kForget * hid + j] = fg;
    gates[kOutput * hid + j] = og;
    gates[kCandidate * hid + j] = cg;
    c[j] = fg * cv[j] + ig * cg;
    tanh_c[j] = std::tanh(c[j]);
    h[j] = og * tanh_c[j];
  }

  const Var c_var = tape.push(std::move(c));
  const LstmCell* cp = &cell;
  const Var x_in = x, h_in = prev.h, c_in = prev.c;
  const Var h_var = tape.push(
      std::move(h),
      [cp, x_in, h_in, c_in, c_var](Tape& t, Var self) {
        const std::size_t in = cp->input_size, hid = cp->hidden_size;
        const std::size_t cols = in + hid;
        const auto s = t.saved(self);
        const auto xh = s.subspan(0, cols);
        const auto gates = s.subspan(cols, 4 * hid);
        const auto tanh_c = s.subspan(cols + 4 * hid, hid);
        const auto dh = t.grad(self);
        const auto dc_out = t.grad(c_var);
        const auto c_prev = t.value(c_in);
        auto dc_prev = t.grad(c_in);

        std::vector<double> dz(4 * hid);
        for (std::size_t j = 0; j < hid; ++j) {
          const double ig = gates[kInput * hid + j];
          const double fg = gates[kForget * hid + j];
          const double og = gates[kOutput * hid + j];
          const double cg = gates[kCandidate * hid + j];
          const double tc = tanh_c[j];
          const double dc = dc_out[j] + dh[j] * og * (1 - tc * tc);
          dz[kInput * hid + j] = dc * cg * ig * (1 - ig);
          dz[kForget * hid + j] = dc * c_prev[j] * fg * (1 - fg);
          dz[kOutput * hid + j] = dh[j] * tc * og * (1 - og);
          dz[kCandidate * hid + j] = dc * ig * (1 - cg * cg);
          dc_prev[j] += dc * fg;
        }
        kernels::outer_acc(cp->weight.grad().values(), 4 * hid, cols, dz, xh);
        auto db = cp->bias.grad().values();
        for (std::size_t k = 0; k < dz.size(); ++k) db[k] += dz[k];
        std::vector<double> dxh(cols, 0.0);
        kernels::matvec_transpose_acc(cp->weight.value().values(), 4 * hid,
                                      cols, dz, dxh);
        auto dx = t.grad(x_in);
        auto dhp = t.grad(h_in);
        for (std::size_t k = 0; k < in; ++k) dx[k] += dxh[k];
        for (std::size_t k = 0; k < hid; ++k) dhp[k] += dxh[in + k];
      },
      std::move(saved));
  return {h_var, c_var};
}

std::vector<Var> lstm_sweep(Tape& tape, const LstmCell& cell,
                            std::span<const Var> inputs, bool reverse) {
  std::vector<Var> out(inputs.size());
  LstmState state = lstm_initial_state(tape, cell);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::size_t pos = reverse ? inputs.size() - 1 - k : k;
    state = lstm_step(tape, cell, inputs[pos], state);
    out[pos] = state.h;
  }
  return out;
}

}  // namespace mimick
