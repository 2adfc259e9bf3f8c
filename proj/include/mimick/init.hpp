#pragma once

#include "mimick/random.hpp"
#include "mimick/tensor.hpp"

namespace mimick {

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
double glorot_limit(std::size_t fan_in, std::size_t fan_out);
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);
Tensor uniform_tensor(Shape shape, double lo, double hi, Rng& rng);
// Character embeddings: uniform in [-0.5/dim, 0.5/dim].
Tensor char_embedding_init(std::size_t chars, std::size_t dim, Rng& rng);

}  // namespace mimick
