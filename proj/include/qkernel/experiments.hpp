#pragma once

// Desk-scale experiments: relative Frobenius error of a quantized linear
// layer Y = X * W, sweeps over alpha and over removed-kernel proportion, and
// CSV/JSON report emission.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qkernel/error.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/matrix.hpp"
#include "qkernel/quantizers.hpp"
#include "qkernel/tensor_io.hpp"

namespace qkernel {

struct SweepRecord {
  std::string parameter_name;
  double parameter_value = 0.0;
  double kernel_proportion = 0.0;
  double matmul_rel_error = 0.0;
  std::string scheme;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct RemoveVsQuant {
  double err_full_quant = 0.0;
  double err_remove_only = 0.0;
  std::optional<double> ratio;
};

inline std::string scheme_descriptor(const std::optional<QuantScheme>& s) { return s ? s->descriptor() : "none"; }

namespace detail {

inline Matrix maybe_fake_quantize(const Matrix& m, const std::optional<QuantScheme>& scheme) {
  return scheme ? fake_quantize(m, *scheme) : m;
}

/// ||reference - approx||_F / ||reference||_F with the zero-reference rule.
inline double relative_error(const Matrix& reference, const Matrix& approx) {
  const double num = frobenius_distance(reference, approx);
  const double den = frobenius_norm(reference.data());
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw DegenerateBaselineError("reference product is zero but the quantized product is not");
  }
  return num / den;
}

inline void require_compatible(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.rows()) {
    throw SizeError("x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + " but w is " +
                    std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
}

}  // namespace detail

inline double matmul_error(const Matrix& x, const Matrix& w, const std::optional<QuantScheme>& scheme_x,
                           const std::optional<QuantScheme>& scheme_w) {
  detail::require_compatible(x, w);
  const Matrix reference = matmul(x, w);
  if (!scheme_x && !scheme_w) return 0.0;
  return detail::relative_error(reference,
                                matmul(detail::maybe_fake_quantize(x, scheme_x), detail::maybe_fake_quantize(w, scheme_w)));
}

/// One record per alpha, in input order: CrossQuant kernel proportion on x and
/// the matmul error with CrossQuant(alpha) on x and `weight_scheme` on w.
inline std::vector<SweepRecord> alpha_sweep(const Matrix& x, const Matrix& w, std::span<const double> alphas, int bits_x,
                                            const std::optional<QuantScheme>& weight_scheme) {
  detail::require_compatible(x, w);
  for (double a : alphas) QuantScheme::cross_quant(bits_x, a).validate();
  std::vector<SweepRecord> out;
  if (alphas.empty()) return out;
  const Matrix reference = matmul(x, w);
  const Matrix w_hat = detail::maybe_fake_quantize(w, weight_scheme);
  const std::string w_desc = scheme_descriptor(weight_scheme);
  out.reserve(alphas.size());
  for (double a : alphas) {
    const auto scheme = QuantScheme::cross_quant(bits_x, a);
    const auto report = analyze_kernel(x, scheme);
    const double err = detail::relative_error(reference, matmul(fake_quantize(x, scheme), w_hat));
    out.push_back({"alpha", a, report.kernel_proportion, err, "x=" + scheme.descriptor() + ";w=" + w_desc});
  }
  return out;
}

/// One record per proportion p: x with its floor(p * size) smallest-magnitude
/// elements zeroed (nothing else quantized), times the fake-quantized w.
/// The kernel_proportion column holds the fraction actually zeroed.
inline std::vector<SweepRecord> removal_sweep(const Matrix& x, const Matrix& w, std::span<const double> proportions,
                                              const std::optional<QuantScheme>& weight_scheme) {
  detail::require_compatible(x, w);
  for (double p : proportions)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("proportion must be in [0,1], got " + format_shortest(p));
  if (weight_scheme) weight_scheme->validate_for(w.rows(), w.cols());
  std::vector<SweepRecord> out;
  if (proportions.empty()) return out;
  const Matrix reference = matmul(x, w);
  const Matrix w_hat = detail::maybe_fake_quantize(w, weight_scheme);
  const std::string desc = "x=remove;w=" + scheme_descriptor(weight_scheme);
  const double n = static_cast<double>(x.size());
  out.reserve(proportions.size());
  for (double p : proportions) {
    const double removed = std::floor(p * n) / n;
    const double err = detail::relative_error(reference, matmul(remove_by_proportion(x, p), w_hat));
    out.push_back({"proportion", p, removed, err, desc});
  }
  return out;
}

/// Full per-token fake quantization of x versus only zeroing its per-token
/// kernel; weights untouched in both.
inline RemoveVsQuant compare_remove_vs_quant(const Matrix& x, const Matrix& w, int bits) {
  detail::require_compatible(x, w);
  const auto scheme = QuantScheme::per_token(bits);
  scheme.validate();
  const Matrix reference = matmul(x, w);
  RemoveVsQuant r;
  r.err_full_quant = detail::relative_error(reference, matmul(fake_quantize(x, scheme), w));
  r.err_remove_only = detail::relative_error(reference, matmul(remove_kernel(x, scheme), w));
  if (r.err_full_quant > 0.0) r.ratio = r.err_remove_only / r.err_full_quant;
  return r;
}

enum class ReportFormat { Csv, Json };

inline std::string format_17g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// Renders records as CSV or as a JSON array; numbers carry 17 significant
/// digits.
inline std::string render_report(std::span<const SweepRecord> records, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "parameter_name,parameter_value,kernel_proportion,matmul_rel_error,scheme\n";
    for (const auto& r : records) {
      out += detail::csv_field(r.parameter_name) + "," + format_17g(r.parameter_value) + "," +
             format_17g(r.kernel_proportion) + "," + format_17g(r.matmul_rel_error) + "," + detail::csv_field(r.scheme) +
             "\n";
    }
    return out;
  }
  out = "[";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    out += k == 0 ? "\n" : ",\n";
    out += "  {\"parameter_name\": " + nlohmann::json(r.parameter_name).dump() +
           ", \"parameter_value\": " + format_17g(r.parameter_value) +
           ", \"kernel_proportion\": " + format_17g(r.kernel_proportion) +
           ", \"matmul_rel_error\": " + format_17g(r.matmul_rel_error) +
           ", \"scheme\": " + nlohmann::json(r.scheme).dump() + "}";
  }
  out += records.empty() ? "]\n" : "\n]\n";
  return out;
}

inline void emit_report(std::span<const SweepRecord> records, ReportFormat format, const std::filesystem::path& path) {
  detail::write_file(path, render_report(records, format));
}

/// Inverse of render_report for the JSON form.
inline std::vector<SweepRecord> parse_json_report(std::string_view text) {
  std::vector<SweepRecord> out;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      out.push_back({j.at("parameter_name").get<std::string>(), j.at("parameter_value").get<double>(),
                     j.at("kernel_proportion").get<double>(), j.at("matmul_rel_error").get<double>(),
                     j.at("scheme").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return out;
}

}  // namespace qkernel
