#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "mimick/tape.hpp"
#include "mimick/tensor.hpp"

// Differentiable primitives recorded on a Tape. Shapes are checked eagerly and
// violations raise DimensionError naming both shapes.
namespace mimick {

Var input(Tape& tape, std::span<const double> values);
// Whole parameter as a flat vector; backward accumulates into its gradient.
Var parameter(Tape& tape, const Parameter& p);
// Row `row` of a rows x cols table.
Var lookup_row(Tape& tape, const Parameter& table, std::size_t row);

// W x + b, with W of shape m x n, x of length n and b of length m.
Var affine(Tape& tape, Var x, const Parameter& w, const Parameter& b);

Var concat(Tape& tape, std::span<const Var> parts);
Var concat(Tape& tape, std::initializer_list<Var> parts);
Var add(Tape& tape, Var a, Var b);
Var tanh(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
// Elementwise product with a constant vector (dropout masks).
Var multiply_constant(Tape& tape, Var x, std::span<const double> mask);

// Scalar reductions.
Var sum(Tape& tape, Var x);
Var squared_norm(Tape& tape, Var x);
// ||x - target||^2, no square root and no averaging.
Var squared_distance(Tape& tape, Var x, std::span<const double> target);
// -log softmax(logits)[index], computed in a numerically stable way.
Var neg_log_softmax(Tape& tape, Var logits, std::size_t index);
// sum_k weights[k] * scalars[k]
Var weighted_sum(Tape& tape, std::span<const Var> scalars,
                 std::span<const double> weights);

void backward(Tape& tape, Var loss);

// Plain numerics, no tape.
std::vector<double> softmax(std::span<const double> x);
std::vector<double> log_softmax(std::span<const double> x);
double sigmoid(double x);

}  // namespace mimick
