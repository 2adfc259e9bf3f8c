#include "mimick/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mimick/errors.hpp"
#include "mimick/kernels.hpp"

namespace mimick {

namespace {

[[noreturn]] void shape_error(const std::string& op, const std::string& a,
                              const std::string& b) {
  throw DimensionError(op + ": shape mismatch between " + a + " and " + b);
}

std::string vec_shape(std::size_t n) { return "[" + std::to_string(n) + "]"; }

void add_into(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Var input(Tape& tape, std::span<const double> values) {
  if (values.empty()) throw DimensionError("input: empty vector");
  return tape.push(std::vector<double>(values.begin(), values.end()));
}

Var parameter(Tape& tape, const Parameter& p) {
  const auto v = p.value().values();
  const Parameter* param = &p;
  return tape.push(std::vector<double>(v.begin(), v.end()),
                   [param](Tape& t, Var self) {
                     add_into(param->grad().values(), t.grad(self));
                     for (std::size_t r = 0; r < param->value().rows(); ++r) {
                       param->mark_row(r);
                     }
                   });
}

Var lookup_row(Tape& tape, const Parameter& table, std::size_t row) {
  if (table.value().rank() != 2) {
    throw DimensionError("lookup_row: table must be a matrix, got " +
                         shape_string(table.shape()));
  }
  if (row >= table.value().rows()) {
    throw DimensionError("lookup_row: row " + std::to_string(row) +
                         " out of range for " + shape_string(table.shape()));
  }
  const auto r = table.value().row(row);
  const Parameter* param = &table;
  return tape.push(std::vector<double>(r.begin(), r.end()),
                   [param, row](Tape& t, Var self) {
                     add_into(param->grad().row(row), t.grad(self));
                     param->mark_row(row);
                   });
}

Var affine(Tape& tape, Var x, const Parameter& w, const Parameter& b) {
  const Tensor& wv = w.value();
  const auto xv = tape.value(x);
  if (wv.rank() != 2 || wv.cols() != xv.size()) {
    shape_error("affine", "W" + shape_string(wv.shape()),
                "x" + vec_shape(xv.size()));
  }
  if (b.value().rank() != 1 || b.value().size() != wv.rows()) {
    shape_error("affine", "W" + shape_string(wv.shape()),
                "b" + shape_string(b.shape()));
  }
  const std::size_t m = wv.rows(), n = wv.cols();
  std::vector<double> y(m);
  kernels::matvec(wv.values(), m, n, xv, b.value().values(), y);
  const Parameter* wp = &w;
  const Parameter* bp = &b;
  return tape.push(std::move(y), [wp, bp, x, m, n](Tape& t, Var self) {
    const auto g = t.grad(self);
    kernels::outer_acc(wp->grad().values(), m, n, g, t.value(x));
    add_into(bp->grad().values(), g);
    kernels::matvec_transpose_acc(wp->value().values(), m, n, g, t.grad(x));
  });
}

Var concat(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::vector<double> out;
  for (Var p : parts) {
    const auto v = tape.value(p);
    out.insert(out.end(), v.begin(), v.end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.push(std::move(out), [inputs](Tape& t, Var self) {
    const auto g = t.grad(self);
    std::size_t offset = 0;
    for (Var p : inputs) {
      auto dst = t.grad(p);
      add_into(dst, g.subspan(offset, dst.size()));
      offset += dst.size();
    }
  });
}

Var concat(Tape& tape, std::initializer_list<Var> parts) {
  return concat(tape, std::span<const Var>(parts.begin(), parts.size()));
}

Var add(Tape& tape, Var a, Var b) {
  const auto av = tape.value(a), bv = tape.value(b);
  if (av.size() != bv.size()) {
    shape_error("add", vec_shape(av.size()), vec_shape(bv.size()));
  }
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return tape.push(std::move(out), [a, b](Tape& t, Var self) {
    add_into(t.grad(a), t.grad(self));
    add_into(t.grad(b), t.grad(self));
  });
}

Var tanh(Tape& tape, Var x) {
  const auto xv = tape.value(x);
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return tape.push(std::move(out), [x](Tape& t, Var self) {
    const auto y = t.value(self);
    const auto g = t.grad(self);
    auto dx = t.grad(x);
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * (1 - y[i] * y[i]);
  });
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Tape& tape, Var x) {
  const auto xv = tape.value(x);
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(xv[i]);
  return tape.push(std::move(out), [x](Tape& t, Var self) {
    const auto y = t.value(self);
    const auto g = t.grad(self);
    auto dx = t.grad(x);
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * y[i] * (1 - y[i]);
  });
}

Var multiply_constant(Tape& tape, Var x, std::span<const double> mask) {
  const auto xv = tape.value(x);
  if (xv.size() != mask.size()) {
    shape_error("multiply_constant", vec_shape(xv.size()),
                vec_shape(mask.size()));
  }
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return tape.push(
      std::move(out),
      [x](Tape& t, Var self) {
        const auto m = t.saved(self);
        const auto g = t.grad(self);
        auto dx = t.grad(x);
        for (std::size_t i = 0; i < m.size(); ++i) dx[i] += g[i] * m[i];
      },
      std::vector<double>(mask.begin(), mask.end()));
}

Var sum(Tape& tape, Var x) {
  double s = 0;
  for (double v : tape.value(x)) s += v;
  return tape.push({s}, [x](Tape& t, Var self) {
    const double g = t.grad(self)[0];
    for (double& d : t.grad(x)) d += g;
  });
}

Var squared_norm(Tape& tape, Var x) {
  double s = 0;
  for (double v : tape.value(x)) s += v * v;
  return tape.push({s}, [x](Tape& t, Var self) {
    const double g = t.grad(self)[0];
    const auto xv = t.value(x);
    auto dx = t.grad(x);
    for (std::size_t i = 0; i < xv.size(); ++i) dx[i] += 2 * g * xv[i];
  });
}

Var squared_distance(Tape& tape, Var x, std::span<const double> target) {
  const auto xv = tape.value(x);
  if (xv.size() != target.size()) {
    shape_error("squared_distance", vec_shape(xv.size()),
                vec_shape(target.size()));
  }
  std::vector<double> diff(xv.size());
  double s = 0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = xv[i] - target[i];
    s += diff[i] * diff[i];
  }
  return tape.push(
      {s},
      [x](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        const auto d = t.saved(self);
        auto dx = t.grad(x);
        for (std::size_t i = 0; i < d.size(); ++i) dx[i] += 2 * g * d[i];
      },
      std::move(diff));
}

std::vector<double> log_softmax(std::span<const double> x) {
  if (x.empty()) throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0;
  for (double v : x) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - log_z;
  return out;
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double z = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

Var neg_log_softmax(Tape& tape, Var logits, std::size_t index) {
  const auto lv = tape.value(logits);
  if (index >= lv.size()) {
    throw DimensionError("neg_log_softmax: index " + std::to_string(index) +
                         " out of range for " + vec_shape(lv.size()));
  }
  std::vector<double> probs = softmax(lv);
  const double loss = -log_softmax(lv)[index];
  return tape.push(
      {loss},
      [logits, index](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        const auto p = t.saved(self);
        auto dx = t.grad(logits);
        for (std::size_t i = 0; i < p.size(); ++i) {
          dx[i] += g * (p[i] - (i == index ? 1.0 : 0.0));
        }
      },
      std::move(probs));
}

Var weighted_sum(Tape& tape, std::span<const Var> scalars,
                 std::span<const double> weights) {
  if (scalars.size() != weights.size()) {
    shape_error("weighted_sum", vec_shape(scalars.size()),
                vec_shape(weights.size()));
  }
  double s = 0;
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    s += weights[k] * tape.scalar(scalars[k]);
  }
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return tape.push(
      {s},
      [inputs](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        const auto w = t.saved(self);
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          t.grad(inputs[k])[0] += g * w[k];
        }
      },
      std::vector<double>(weights.begin(), weights.end()));
}

void backward(Tape& tape, Var loss) { tape.backward(loss); }

}  // namespace mimick
