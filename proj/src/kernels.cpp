#include "mimick/kernels.hpp"

#include <cmath>
#include <limits>

#ifdef MIMICK_HAVE_OPENMP
#include <omp.h>
#endif

namespace mimick::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;
constexpr std::size_t kColumnBlock = 64;

double cosine_row(const double* row, std::size_t cols, const double* query,
                  double query_norm) {
  const double norm = std::sqrt(dot(row, row, cols));
  if (norm == 0.0) return -std::numeric_limits<double>::infinity();
  return dot(row, query, cols) / (query_norm * norm);
}

bool worth_parallel(std::size_t work) {
  return max_threads() > 1 && work >= kParallelWork;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) s[k] += a[i + k] * b[i + k];
  }
  for (std::size_t k = 0; i < n; ++i, ++k) s[k] += a[i] * b[i];
  return ((s[0] + s[1]) + (s[2] + s[3])) + ((s[4] + s[5]) + (s[6] + s[7]));
}

int max_threads() {
#ifdef MIMICK_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double v = dot(w.data() + i * cols, x.data(), cols);
    y[i] = bias.empty() ? v : bias[i] + v;
  }
}

void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    const double* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) dx[j] += row[j] * gi;
  }
}

void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    double* row = dw.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out) {
  const double qn = std::sqrt(dot(query.data(), query.data(), cols));
  for (std::size_t i = 0; i < rows; ++i) {
    out[i] = cosine_row(table.data() + i * cols, cols, query.data(), qn);
  }
}

}  // namespace serial

namespace parallel {

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double v = dot(w.data() + i * cols, x.data(), cols);
    y[i] = bias.empty() ? v : bias[i] + v;
  }
}

void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx) {
  const auto blocks =
      static_cast<std::ptrdiff_t>((cols + kColumnBlock - 1) / kColumnBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t j0 = static_cast<std::size_t>(b) * kColumnBlock;
    const std::size_t j1 = std::min(cols, j0 + kColumnBlock);
    for (std::size_t i = 0; i < rows; ++i) {
      const double gi = g[i];
      const double* row = w.data() + i * cols;
      for (std::size_t j = j0; j < j1; ++j) dx[j] += row[j] * gi;
    }
  }
}

void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double gi = g[i];
    double* row = dw.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out) {
  const double qn = std::sqrt(dot(query.data(), query.data(), cols));
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = cosine_row(table.data() + i * cols, cols, query.data(), qn);
  }
}

}  // namespace parallel

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y) {
  if (worth_parallel(rows * cols)) {
    parallel::matvec(w, rows, cols, x, bias, y);
  } else {
    serial::matvec(w, rows, cols, x, bias, y);
  }
}

void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx) {
  if (worth_parallel(rows * cols)) {
    parallel::matvec_transpose_acc(w, rows, cols, g, dx);
  } else {
    serial::matvec_transpose_acc(w, rows, cols, g, dx);
  }
}

void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x) {
  if (worth_parallel(rows * cols)) {
    parallel::outer_acc(dw, rows, cols, g, x);
  } else {
    serial::outer_acc(dw, rows, cols, g, x);
  }
}

void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out) {
  if (worth_parallel(rows * cols)) {
    parallel::cosine_scores(table, rows, cols, query, out);
  } else {
    serial::cosine_scores(table, rows, cols, query, out);
  }
}

}  // namespace mimick::kernels
