#pragma once

#include <cstddef>
#include <span>

// Dense inner loops used by the tape and the nearest-neighbour scan.
//
// Every kernel exists twice: `serial` is the straight reference and
// `parallel` splits independent outputs across OpenMP threads. Each output
// element is accumulated in the same order in both, so their results are
// bitwise identical. The unqualified entry points pick the parallel version
// once the work is large enough to amortize a parallel region.
//
// Matrices are row-major, `rows x cols`, passed as flat spans.
namespace mimick::kernels {

// Fixed four-lane accumulation order, shared by every caller.
double dot(const double* a, const double* b, std::size_t n);

namespace serial {
// y = W x (+ bias when non-empty)
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y);
// dx += W^T g
void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx);
// dW += g x^T
void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x);
// out[i] = cos(table row i, query); rows with zero norm get -infinity.
void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out);
}  // namespace serial

namespace parallel {
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y);
void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx);
void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x);
void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out);
}  // namespace parallel

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> y);
void matvec_transpose_acc(std::span<const double> w, std::size_t rows,
                          std::size_t cols, std::span<const double> g,
                          std::span<double> dx);
void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols,
               std::span<const double> g, std::span<const double> x);
void cosine_scores(std::span<const double> table, std::size_t rows,
                   std::size_t cols, std::span<const double> query,
                   std::span<double> out);

// Threads available to the parallel kernels (1 without OpenMP).
int max_threads();

}  // namespace mimick::kernels
