#pragma once

// Seeded synthetic activations and weights.
//
// Draw order is part of the determinism contract: outlier columns are chosen
// first by a Fisher-Yates shuffle of column indices, then values are drawn
// row-major from one standard-normal stream.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkernel/error.hpp"
#include "qkernel/matrix.hpp"

namespace qkernel {

struct SynthSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double base_sigma = 1.0;
  double outlier_frac = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (rows == 0 || cols == 0) {
      throw ConfigError("synthetic dims must be positive, got " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!(base_sigma > 0.0) || !std::isfinite(base_sigma)) throw ConfigError("sigma must be positive and finite");
    if (!(outlier_frac >= 0.0 && outlier_frac <= 1.0)) throw ConfigError("outlier fraction must be in [0,1]");
    if (!(outlier_scale >= 1.0) || !std::isfinite(outlier_scale)) throw ConfigError("outlier scale must be >= 1");
  }

  std::size_t outlier_count() const {
    return static_cast<std::size_t>(std::ceil(outlier_frac * static_cast<double>(cols)));
  }
};

inline nlohmann::json synth_spec_json(const SynthSpec& s) {
  return {{"rows", s.rows},
          {"cols", s.cols},
          {"sigma", s.base_sigma},
          {"outlier_frac", s.outlier_frac},
          {"outlier_scale", s.outlier_scale},
          {"seed", s.seed}};
}

/// Sorted indices of the outlier columns for `spec`.
inline std::vector<std::size_t> outlier_columns(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> cols(spec.cols);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  const auto k = std::min(spec.outlier_count(), spec.cols);
  // Partial Fisher-Yates; std::shuffle's draw pattern is not specified.
  for (std::size_t i = 0; i < k; ++i) {
    const auto span = spec.cols - i;
    const auto pick = i + static_cast<std::size_t>(rng() % span);
    std::swap(cols[i], cols[pick]);
  }
  cols.resize(k);
  std::sort(cols.begin(), cols.end());
  return cols;
}

inline Matrix generate_activations(const SynthSpec& spec) {
  const auto outliers = outlier_columns(spec);
  std::vector<double> scale(spec.cols, 1.0);
  for (auto j : outliers) scale[j] = spec.outlier_scale;

  // Separate stream for values so the column choice does not shift them.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, spec.base_sigma);
  std::vector<double> data(spec.rows * spec.cols);
  for (std::size_t i = 0; i < spec.rows; ++i)
    for (std::size_t j = 0; j < spec.cols; ++j) data[i * spec.cols + j] = normal(rng) * scale[j];
  return Matrix(spec.rows, spec.cols, std::move(data));
}

inline Matrix generate_weights(std::size_t rows, std::size_t cols, double sigma, std::uint64_t seed) {
  SynthSpec spec{rows, cols, sigma, 0.0, 1.0, seed};
  return generate_activations(spec);
}

}  // namespace qkernel
