#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mimick {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  // Rows/cols treat a rank-1 tensor as a column vector.
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(values_).subspan(r * cols(), cols());
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }

  void fill(double v);
  bool all_finite() const;
  // Throws NumericError naming `what` when a value is NaN or infinite.
  void check_finite(const std::string& what) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// A trainable tensor plus its gradient accumulator.
//
// The gradient is scratch space written during backpropagation, not part of
// the parameter's value, so it stays writable through const references; a
// frozen model can be shared for inference while tapes are per-thread.
//
// Row-sparse parameters (lookup tables) record which rows received gradient
// so the optimizer and zero_grad only touch those rows.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool row_sparse = false);

  const std::string& name() const { return name_; }
  const Shape& shape() const { return value_.shape(); }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }
  Tensor& grad() const { return grad_; }
  bool row_sparse() const { return row_sparse_; }

  void mark_row(std::size_t r) const;
  const std::vector<std::uint32_t>& touched_rows() const {
    return touched_rows_;
  }
  void zero_grad() const;

 private:
  std::string name_;
  Tensor value_;
  mutable Tensor grad_;
  bool row_sparse_ = false;
  mutable std::vector<std::uint32_t> touched_rows_;
  mutable std::vector<char> row_flags_;
};

using ParameterList = std::vector<Parameter*>;

}  // namespace mimick
