#pragma once

// Random matrix corpus shared by the property tests and the acceptance suite.
// Shapes up to 64x64, values uniform in [-100, 100]; a share of the matrices
// get zeroed rows/columns, repeated maxima, or tiny magnitudes.

#include <cstdint>
#include <random>
#include <vector>

#include "qkernel/matrix.hpp"
#include "qkernel/quantizers.hpp"

namespace qkernel::testing {

inline Matrix random_matrix(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  std::uniform_int_distribution<int> flavor(0, 5);
  const std::size_t rows = dim(rng);
  const std::size_t cols = dim(rng);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = value(rng);

  switch (flavor(rng)) {
    case 0: {  // zero rows and columns
      std::uniform_int_distribution<std::size_t> pick_r(0, rows - 1), pick_c(0, cols - 1);
      for (int k = 0; k < 3; ++k) {
        const auto r = pick_r(rng);
        for (std::size_t j = 0; j < cols; ++j) m(r, j) = 0.0;
        const auto c = pick_c(rng);
        for (std::size_t i = 0; i < rows; ++i) m(i, c) = 0.0;
      }
      break;
    }
    case 1: {  // sparse large outlier columns
      std::uniform_int_distribution<std::size_t> pick_c(0, cols - 1);
      const auto c = pick_c(rng);
      for (std::size_t i = 0; i < rows; ++i) m(i, c) *= 30.0;
      for (auto& v : m.data()) v /= 30.0;
      break;
    }
    case 2: {  // coarse grid values: many ties and exact halfway codes
      std::uniform_int_distribution<int> small(-8, 8);
      for (auto& v : m.data()) v = small(rng) * 0.5;
      break;
    }
    case 3: {  // tiny magnitudes
      for (auto& v : m.data()) v *= 1e-6;
      break;
    }
    default:
      break;
  }
  return m;
}

inline std::vector<Matrix> random_corpus(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_matrix(rng));
  return out;
}

/// Per-column symmetric quantization via the row quantizer on the transpose,
/// transposed back; independent of the CrossQuant path.
inline CodeMatrix per_column_codes(const Matrix& x, int bits) {
  return per_token_quantize(x.transposed(), bits).codes.transposed();
}

}  // namespace qkernel::testing
