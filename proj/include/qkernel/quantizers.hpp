#pragma once

// Symmetric integer quantizers: per-token, per-channel, group-wise and
// CrossQuant, plus exact dequantization and one-shot fake quantization.
//
// Every scheme maps an element x with step scale s to
//
//     code = round_half_away(x * q_max / s),   q_max = 2^(bits-1) - 1
//
// where s is a row maximum (per-token, per-channel, group rows) or the
// CrossQuant mix t_i^alpha * c_j^(1-alpha). A zero scale yields code 0.
// No clamping is applied; the scale always dominates |x|, so a code outside
// [-q_max, q_max] is an internal error.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qkernel/error.hpp"
#include "qkernel/matrix.hpp"

namespace qkernel {

enum class SchemeKind { PerToken, PerChannel, GroupWise, CrossQuant };

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 16;

inline std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::PerToken:
      return "per-token";
    case SchemeKind::PerChannel:
      return "per-channel";
    case SchemeKind::GroupWise:
      return "group";
    case SchemeKind::CrossQuant:
      return "crossquant";
  }
  return "unknown";
}

inline SchemeKind parse_scheme_kind(std::string_view name) {
  if (name == "per-token") return SchemeKind::PerToken;
  if (name == "per-channel") return SchemeKind::PerChannel;
  if (name == "group") return SchemeKind::GroupWise;
  if (name == "crossquant") return SchemeKind::CrossQuant;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

struct QuantScheme {
  SchemeKind kind = SchemeKind::PerToken;
  int bits = 8;
  double alpha = 1.0;          // CrossQuant only
  std::size_t group_size = 0;  // GroupWise only

  static QuantScheme per_token(int bits) { return {SchemeKind::PerToken, bits, 1.0, 0}; }
  static QuantScheme per_channel(int bits) { return {SchemeKind::PerChannel, bits, 1.0, 0}; }
  static QuantScheme group_wise(int bits, std::size_t g) { return {SchemeKind::GroupWise, bits, 1.0, g}; }
  static QuantScheme cross_quant(int bits, double alpha) { return {SchemeKind::CrossQuant, bits, alpha, 0}; }

  std::int32_t q_max() const { return (std::int32_t{1} << (bits - 1)) - 1; }

  void validate() const {
    if (bits < kMinBits || bits > kMaxBits) {
      throw ConfigError("bits must be in [" + std::to_string(kMinBits) + "," + std::to_string(kMaxBits) + "], got " +
                        std::to_string(bits));
    }
    if (kind == SchemeKind::CrossQuant && !(alpha >= 0.0 && alpha <= 1.0)) {
      throw ConfigError("alpha must be in [0,1], got " + format_shortest(alpha));
    }
    if (kind == SchemeKind::GroupWise && group_size == 0) throw ConfigError("group size must be positive");
  }

  /// Checks shape-dependent constraints (group divisibility).
  void validate_for(std::size_t rows, std::size_t cols) const {
    validate();
    if (kind == SchemeKind::GroupWise && (rows * cols) % group_size != 0) {
      throw ConfigError("group size " + std::to_string(group_size) + " does not divide " + std::to_string(rows) +
                        "x" + std::to_string(cols) + " = " + std::to_string(rows * cols) + " elements");
    }
  }

  /// Compact text form: `per-token:8`, `per-channel:8`, `group:4:128`,
  /// `crossquant:8:0.15`.
  std::string descriptor() const {
    std::string s(scheme_name(kind));
    s += ":" + std::to_string(bits);
    if (kind == SchemeKind::GroupWise) s += ":" + std::to_string(group_size);
    if (kind == SchemeKind::CrossQuant) s += ":" + format_shortest(alpha);
    return s;
  }

  friend bool operator==(const QuantScheme&, const QuantScheme&) = default;
};

/// Parses the text form produced by `QuantScheme::descriptor()`. `none`
/// parses to an empty optional.
inline std::optional<QuantScheme> parse_scheme_descriptor(std::string_view text) {
  if (text == "none") return std::nullopt;
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = text.find(':');
    parts.push_back(text.substr(0, colon));
    if (colon == std::string_view::npos) break;
    text = text.substr(colon + 1);
  }
  const auto bad = [&] {
    return ConfigError("malformed scheme descriptor; expected none, per-token:BITS, per-channel:BITS, "
                       "group:BITS:SIZE or crossquant:BITS:ALPHA");
  };
  const auto parse_int = [&](std::string_view s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v < 0 || v > (1ll << 40)) throw bad();
    return v;
  };
  QuantScheme scheme;
  scheme.kind = parse_scheme_kind(parts[0]);
  const std::size_t want = scheme.kind == SchemeKind::GroupWise || scheme.kind == SchemeKind::CrossQuant ? 3 : 2;
  if (parts.size() != want) throw bad();
  scheme.bits = static_cast<int>(parse_int(parts[1]));
  if (scheme.kind == SchemeKind::GroupWise) scheme.group_size = static_cast<std::size_t>(parse_int(parts[2]));
  if (scheme.kind == SchemeKind::CrossQuant) {
    const auto s = parts[2];
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), scheme.alpha);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) throw bad();
  }
  scheme.validate();
  return scheme;
}

/// CrossQuant scale numerator t^alpha * c^(1-alpha).
///
/// alpha = 1 and alpha = 0 return t and c untouched. Otherwise a zero on
/// either side gives zero, and the product is evaluated as t * (c/t)^(1-alpha):
/// c/t is invariant under scaling the input by a power of two, so the scale
/// (and every code) scales exactly with it.
inline double cross_scale(double t, double c, double alpha) {
  if (alpha == 1.0) return t;
  if (alpha == 0.0) return c;
  if (t == 0.0 || c == 0.0) return 0.0;
  return t * std::pow(c / t, 1.0 - alpha);
}

/// x expressed in quantization steps, before rounding. Zero for a zero scale.
inline double normalized_value(double x, double scale, std::int32_t q_max) {
  if (scale == 0.0) return 0.0;
  return x * static_cast<double>(q_max) / scale;
}

/// std::round rounds halfway cases away from zero.
inline std::int32_t quantize_element(double x, double scale, std::int32_t q_max) {
  const double r = std::round(normalized_value(x, scale, q_max));
  if (std::abs(r) > static_cast<double>(q_max)) {
    throw std::logic_error("quantized code " + format_shortest(r) + " exceeds q_max " + std::to_string(q_max));
  }
  return static_cast<std::int32_t>(r);
}

inline double dequantize_element(std::int32_t code, double scale, std::int32_t q_max) {
  if (scale == 0.0) return 0.0;
  return static_cast<double>(code) * scale / static_cast<double>(q_max);
}

/// Integer codes plus everything needed to reconstruct the step sizes.
///
/// For GroupWise, `codes` and `row_scales` are in the reshaped
/// (rows*cols/g) x g group layout; `original_rows`/`original_cols` keep the
/// source shape. `col_scales` is empty except for CrossQuant.
struct QuantizedTensor {
  CodeMatrix codes;
  QuantScheme scheme;
  std::vector<double> row_scales;
  std::vector<double> col_scales;
  std::size_t original_rows;
  std::size_t original_cols;

  /// Step-size numerator for code (i, j) in the `codes` layout.
  double scale_at(std::size_t i, std::size_t j) const {
    if (scheme.kind == SchemeKind::CrossQuant) return cross_scale(row_scales[i], col_scales[j], scheme.alpha);
    return row_scales[i];
  }
};

namespace detail {

inline QuantizedTensor quantize_rows(const Matrix& x, const QuantScheme& scheme) {
  const auto q = scheme.q_max();
  auto t = row_abs_max(x);
  CodeMatrix codes(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) codes(i, j) = quantize_element(r[j], t[i], q);
  }
  return {std::move(codes), scheme, std::move(t), {}, x.rows(), x.cols()};
}

}  // namespace detail

/// One scale per row: t_i = max |x_i,:|.
inline QuantizedTensor per_token_quantize(const Matrix& x, int bits) {
  const auto scheme = QuantScheme::per_token(bits);
  scheme.validate();
  return detail::quantize_rows(x, scheme);
}

/// Weight-side twin of per_token_quantize: one scale per row of W.
inline QuantizedTensor per_channel_quantize(const Matrix& w, int bits) {
  const auto scheme = QuantScheme::per_channel(bits);
  scheme.validate();
  return detail::quantize_rows(w, scheme);
}

/// Flattens `w` row-major into rows of `g` elements and quantizes each row.
inline QuantizedTensor group_wise_quantize(const Matrix& w, int bits, std::size_t g) {
  const auto scheme = QuantScheme::group_wise(bits, g);
  scheme.validate_for(w.rows(), w.cols());
  auto q = detail::quantize_rows(w.reshaped(w.size() / g, g), scheme);
  q.original_rows = w.rows();
  q.original_cols = w.cols();
  return q;
}

/// Per-element step from row maxima t and column maxima c mixed by alpha.
inline QuantizedTensor cross_quantize(const Matrix& x, int bits, double alpha) {
  const auto scheme = QuantScheme::cross_quant(bits, alpha);
  scheme.validate();
  const auto q = scheme.q_max();
  auto t = row_abs_max(x);
  auto c = col_abs_max(x);
  CodeMatrix codes(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) codes(i, j) = quantize_element(r[j], cross_scale(t[i], c[j], alpha), q);
  }
  return {std::move(codes), scheme, std::move(t), std::move(c), x.rows(), x.cols()};
}

inline QuantizedTensor quantize(const Matrix& x, const QuantScheme& scheme) {
  switch (scheme.kind) {
    case SchemeKind::PerToken:
      return per_token_quantize(x, scheme.bits);
    case SchemeKind::PerChannel:
      return per_channel_quantize(x, scheme.bits);
    case SchemeKind::GroupWise:
      return group_wise_quantize(x, scheme.bits, scheme.group_size);
    case SchemeKind::CrossQuant:
      return cross_quantize(x, scheme.bits, scheme.alpha);
  }
  throw ConfigError("unknown scheme kind");
}

/// code * scale / q_max per element, restored to the original shape.
inline Matrix dequantize(const QuantizedTensor& q) {
  const auto qmax = q.scheme.q_max();
  std::vector<double> out(q.codes.size());
  for (std::size_t i = 0; i < q.codes.rows(); ++i)
    for (std::size_t j = 0; j < q.codes.cols(); ++j)
      out[i * q.codes.cols() + j] = dequantize_element(q.codes(i, j), q.scale_at(i, j), qmax);
  return Matrix(q.original_rows, q.original_cols, std::move(out));
}

inline Matrix fake_quantize(const Matrix& x, const QuantScheme& scheme) { return dequantize(quantize(x, scheme)); }

}  // namespace qkernel
