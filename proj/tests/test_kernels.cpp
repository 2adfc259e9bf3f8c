#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mimick/kernels.hpp"
#include "mimick/random.hpp"

using namespace mimick;

namespace {

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

}  // namespace

TEST_CASE("matvec agrees with a naive product") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t rows = 1 + rng.uniform_index(20), cols = 1 + rng.uniform_index(70);
    const auto w = random_values(rows * cols, rng);
    const auto x = random_values(cols, rng);
    const auto b = random_values(rows, rng);
    std::vector<double> y(rows);
    kernels::serial::matvec(w, rows, cols, x, b, y);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = b[i];
      for (std::size_t j = 0; j < cols; ++j) acc += w[i * cols + j] * x[j];
      CHECK(std::abs(y[i] - acc) < 1e-12);
    }
  }
}

TEST_CASE("transpose and outer accumulation agree with naive loops") {
  Rng rng(12);
  const std::size_t rows = 7, cols = 13;
  const auto w = random_values(rows * cols, rng);
  const auto g = random_values(rows, rng);
  const auto x = random_values(cols, rng);
  std::vector<double> dx(cols, 1.0);
  kernels::serial::matvec_transpose_acc(w, rows, cols, g, dx);
  std::vector<double> dw(rows * cols, 0.5);
  kernels::serial::outer_acc(dw, rows, cols, g, x);
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 1.0;
    for (std::size_t i = 0; i < rows; ++i) acc += w[i * cols + j] * g[i];
    CHECK(std::abs(dx[j] - acc) < 1e-12);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      CHECK(dw[i * cols + j] == doctest::Approx(0.5 + g[i] * x[j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("cosine scores") {
  const std::vector<double> table = {1, 0, 0, 2, 0, 0, -3, 0};
  const std::vector<double> query = {2, 0};
  std::vector<double> out(4);
  kernels::serial::cosine_scores(table, 4, 2, query, out);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(out[2] == -std::numeric_limits<double>::infinity());
  CHECK(out[3] == doctest::Approx(-1.0));
}

TEST_CASE("parallel kernels are bitwise identical to serial ones") {
  Rng rng(13);
  const std::size_t sizes[][2] = {{1, 1}, {3, 5}, {64, 64}, {513, 17}, {256, 300}};
  for (const auto& s : sizes) {
    const std::size_t rows = s[0], cols = s[1];
    CAPTURE(rows);
    CAPTURE(cols);
    const auto w = random_values(rows * cols, rng);
    const auto x = random_values(cols, rng);
    const auto g = random_values(rows, rng);
    const auto b = random_values(rows, rng);

    std::vector<double> y1(rows), y2(rows), y3(rows);
    kernels::serial::matvec(w, rows, cols, x, b, y1);
    kernels::parallel::matvec(w, rows, cols, x, b, y2);
    kernels::matvec(w, rows, cols, x, b, y3);
    CHECK(y1 == y2);
    CHECK(y1 == y3);

    std::vector<double> dx1(cols, 0.25), dx2(cols, 0.25);
    kernels::serial::matvec_transpose_acc(w, rows, cols, g, dx1);
    kernels::parallel::matvec_transpose_acc(w, rows, cols, g, dx2);
    CHECK(dx1 == dx2);

    std::vector<double> dw1(w), dw2(w);
    kernels::serial::outer_acc(dw1, rows, cols, g, x);
    kernels::parallel::outer_acc(dw2, rows, cols, g, x);
    CHECK(dw1 == dw2);

    std::vector<double> c1(rows), c2(rows);
    kernels::serial::cosine_scores(w, rows, cols, x, c1);
    kernels::parallel::cosine_scores(w, rows, cols, x, c2);
    CHECK(c1 == c2);
  }
  CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("dot handles every remainder length") {
  Rng rng(14);
  for (std::size_t n = 0; n < 12; ++n) {
    const auto a = random_values(n, rng), b = random_values(n, rng);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    CHECK(std::abs(kernels::dot(a.data(), b.data(), n) - acc) < 1e-14);
  }
}
