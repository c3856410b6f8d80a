#pragma once

// Quantization-kernel analysis: the set of elements a quantizer maps to code
// 0, their zero bounds, and the transformations that remove them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkernel/error.hpp"
#include "qkernel/matrix.hpp"
#include "qkernel/quantizers.hpp"

namespace qkernel {

struct KernelReport {
  Mask mask;
  double kernel_proportion = 0.0;
  double nonzero_kernel_proportion = 0.0;
  double frac_c_ge_t = 0.0;
  /// Only for CrossQuant: fraction of elements whose zero bound is strictly
  /// below the per-token bound at the same bit-width.
  std::optional<double> frac_Btilde_lt_B;
  QuantScheme scheme;
};

namespace detail {

inline void require_kernel_scheme(const QuantScheme& scheme) {
  if (scheme.kind != SchemeKind::PerToken && scheme.kind != SchemeKind::CrossQuant) {
    throw ConfigError("kernel analysis supports per-token and crossquant, not " + std::string(scheme_name(scheme.kind)));
  }
  scheme.validate();
}

/// Per-element step numerators for a supported scheme.
class ScaleField {
 public:
  ScaleField(const Matrix& x, const QuantScheme& scheme)
      : scheme_(scheme), t_(row_abs_max(x)), c_(col_abs_max(x)) {}

  double operator()(std::size_t i, std::size_t j) const {
    if (scheme_.kind == SchemeKind::PerToken) return t_[i];
    return cross_scale(t_[i], c_[j], scheme_.alpha);
  }

  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& c() const { return c_; }

 private:
  QuantScheme scheme_;
  std::vector<double> t_;
  std::vector<double> c_;
};

}  // namespace detail

/// B = 0.5 * scale / q_max per element.
inline Matrix zero_bound(const Matrix& x, const QuantScheme& scheme) {
  detail::require_kernel_scheme(scheme);
  const detail::ScaleField scale(x, scheme);
  const double q = scheme.q_max();
  Matrix b(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) b(i, j) = 0.5 * scale(i, j) / q;
  return b;
}

/// true where the scheme's code is 0.
///
/// Evaluated as |x * q_max / scale| < 0.5 (or scale = 0), the same quantity
/// the quantizer rounds, so membership agrees with `code == 0` exactly.
inline Mask kernel_mask(const Matrix& x, const QuantScheme& scheme) {
  detail::require_kernel_scheme(scheme);
  const detail::ScaleField scale(x, scheme);
  const auto q = scheme.q_max();
  Mask mask(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double s = scale(i, j);
      mask(i, j) = s == 0.0 || std::abs(normalized_value(r[j], s, q)) < 0.5;
    }
  }
  return mask;
}

inline KernelReport analyze_kernel(const Matrix& x, const QuantScheme& scheme) {
  detail::require_kernel_scheme(scheme);
  const detail::ScaleField scale(x, scheme);
  const auto& t = scale.t();
  const auto& c = scale.c();

  KernelReport report{kernel_mask(x, scheme), 0.0, 0.0, 0.0, std::nullopt, scheme};
  std::size_t in_kernel = 0;
  std::size_t nonzero_in_kernel = 0;
  std::size_t c_ge_t = 0;
  std::size_t btilde_lt_b = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (report.mask(i, j)) {
        ++in_kernel;
        if (x(i, j) != 0.0) ++nonzero_in_kernel;
      }
      if (c[j] >= t[i]) ++c_ge_t;
      // Both bounds share the 0.5 / q_max factor; compare numerators.
      if (scheme.kind == SchemeKind::CrossQuant && scale(i, j) < t[i]) ++btilde_lt_b;
    }
  }
  const double n = static_cast<double>(x.size());
  report.kernel_proportion = static_cast<double>(in_kernel) / n;
  report.nonzero_kernel_proportion = static_cast<double>(nonzero_in_kernel) / n;
  report.frac_c_ge_t = static_cast<double>(c_ge_t) / n;
  if (scheme.kind == SchemeKind::CrossQuant) report.frac_Btilde_lt_B = static_cast<double>(btilde_lt_b) / n;
  return report;
}

inline nlohmann::json kernel_report_json(const KernelReport& r) {
  nlohmann::json j;
  j["scheme"] = std::string(scheme_name(r.scheme.kind));
  j["bits"] = r.scheme.bits;
  j["alpha"] = r.scheme.kind == SchemeKind::CrossQuant ? nlohmann::json(r.scheme.alpha) : nlohmann::json(nullptr);
  j["kernel_proportion"] = r.kernel_proportion;
  j["nonzero_kernel_proportion"] = r.nonzero_kernel_proportion;
  j["frac_c_ge_t"] = r.frac_c_ge_t;
  j["frac_Btilde_lt_B"] = r.frac_Btilde_lt_B ? nlohmann::json(*r.frac_Btilde_lt_B) : nlohmann::json(nullptr);
  j["rows"] = r.mask.rows();
  j["cols"] = r.mask.cols();
  return j;
}

inline Matrix mask_as_matrix(const Mask& mask) {
  std::vector<double> v(mask.data().begin(), mask.data().end());
  return Matrix(mask.rows(), mask.cols(), std::move(v));
}

/// Copy of x with every kernel element set to exactly 0.
inline Matrix remove_kernel(const Matrix& x, const QuantScheme& scheme) {
  const Mask mask = kernel_mask(x, scheme);
  Matrix out = x;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (mask.data()[k]) out.data()[k] = 0.0;
  return out;
}

/// Zeroes the floor(p * size) elements of smallest magnitude, ties broken by
/// ascending row-major index.
inline Matrix remove_by_proportion(const Matrix& x, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("proportion must be in [0,1], got " + format_shortest(p));
  const auto n = x.size();
  const auto count = static_cast<std::size_t>(std::floor(p * static_cast<double>(n)));
  Matrix out = x;
  if (count == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto data = x.data();
  const auto by_magnitude = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(data[a]);
    const double mb = std::abs(data[b]);
    return ma < mb || (ma == mb && a < b);
  };
  if (count < n) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), by_magnitude);
  }
  for (std::size_t k = 0; k < count; ++k) out.data()[order[k]] = 0.0;
  return out;
}

}  // namespace qkernel
