#include "mimick/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mimick/errors.hpp"

namespace mimick {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           shape_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  if (values_.size() != shape_size(shape_)) {
    throw DimensionError("tensor of shape " + shape_string(shape_) +
                         " needs " + std::to_string(shape_size(shape_)) +
                         " values, got " + std::to_string(values_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? 1 : values_.size() / shape_[0];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::check_finite(const std::string& what) const {
  if (!all_finite()) throw NumericError("non-finite value in " + what);
}

Parameter::Parameter(std::string name, Tensor value, bool row_sparse)
    : name_(std::move(name)),
      value_(std::move(value)),
      grad_(value_.shape()),
      row_sparse_(row_sparse) {}

void Parameter::mark_row(std::size_t r) const {
  if (!row_sparse_) return;
  if (row_flags_.size() != value_.rows()) row_flags_.assign(value_.rows(), 0);
  if (!row_flags_[r]) {
    row_flags_[r] = 1;
    touched_rows_.push_back(static_cast<std::uint32_t>(r));
  }
}

void Parameter::zero_grad() const {
  if (grad_.shape() != value_.shape()) grad_ = Tensor(value_.shape());
  if (!row_sparse_) {
    grad_.fill(0.0);
    return;
  }
  for (std::uint32_t r : touched_rows_) {
    auto row = grad_.row(r);
    std::fill(row.begin(), row.end(), 0.0);
    row_flags_[r] = 0;
  }
  touched_rows_.clear();
}

}  // namespace mimick
