#pragma once

// On-disk form of a QuantizedTensor: codes as a QTN1 f64 container (integer
// values) and a JSON sidecar with the scheme, original shape and scale
// vectors. JSON numbers are written in shortest round-trip form, so scales
// reload bit-exactly.

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qkernel/quantizers.hpp"
#include "qkernel/tensor_io.hpp"

namespace qkernel {

inline nlohmann::json scheme_to_json(const QuantScheme& s) {
  nlohmann::json j;
  j["scheme"] = std::string(scheme_name(s.kind));
  j["bits"] = s.bits;
  j["alpha"] = s.kind == SchemeKind::CrossQuant ? nlohmann::json(s.alpha) : nlohmann::json(nullptr);
  j["group_size"] = s.kind == SchemeKind::GroupWise ? nlohmann::json(s.group_size) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json quantized_sidecar(const QuantizedTensor& q) {
  auto j = scheme_to_json(q.scheme);
  j["original_shape"] = {q.original_rows, q.original_cols};
  j["codes_shape"] = {q.codes.rows(), q.codes.cols()};
  j["row_scales"] = q.row_scales;
  j["col_scales"] = q.col_scales;
  return j;
}

inline void save_quantized(const QuantizedTensor& q, const std::filesystem::path& codes_path,
                           const std::filesystem::path& sidecar_path) {
  std::vector<double> values(q.codes.data().begin(), q.codes.data().end());
  save_tensor(Matrix(q.codes.rows(), q.codes.cols(), std::move(values)), codes_path, Precision::F64);
  detail::write_file(sidecar_path, quantized_sidecar(q).dump(2) + "\n");
}

inline QuantizedTensor load_quantized(const std::filesystem::path& codes_path,
                                      const std::filesystem::path& sidecar_path) {
  const Matrix raw = load_tensor(codes_path);
  const auto bytes = detail::read_file(sidecar_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(sidecar_path.string() + ": " + e.what());
  }
  try {
    QuantScheme scheme;
    scheme.kind = parse_scheme_kind(j.at("scheme").get<std::string>());
    scheme.bits = j.at("bits").get<int>();
    if (scheme.kind == SchemeKind::CrossQuant) scheme.alpha = j.at("alpha").get<double>();
    if (scheme.kind == SchemeKind::GroupWise) scheme.group_size = j.at("group_size").get<std::size_t>();
    scheme.validate();

    const auto shape = j.at("original_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] * shape[1] != raw.size()) {
      throw SizeError(sidecar_path.string() + ": original_shape does not match code count");
    }
    auto rows = j.at("row_scales").get<std::vector<double>>();
    auto cols = j.at("col_scales").get<std::vector<double>>();
    if (rows.size() != raw.rows()) throw SizeError(sidecar_path.string() + ": row_scales length mismatch");
    if (scheme.kind == SchemeKind::CrossQuant ? cols.size() != raw.cols() : !cols.empty()) {
      throw SizeError(sidecar_path.string() + ": col_scales length mismatch");
    }
    for (double s : rows)
      if (!(s >= 0.0) || !std::isfinite(s)) throw FormatError(sidecar_path.string() + ": invalid row scale");
    for (double s : cols)
      if (!(s >= 0.0) || !std::isfinite(s)) throw FormatError(sidecar_path.string() + ": invalid column scale");

    const auto qmax = scheme.q_max();
    std::vector<std::int32_t> codes(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const double v = raw.data()[k];
      if (v != std::trunc(v) || std::abs(v) > qmax) {
        throw FormatError(codes_path.string() + ": code at index " + std::to_string(k) + " is not an integer in [-" +
                          std::to_string(qmax) + "," + std::to_string(qmax) + "]");
      }
      codes[k] = static_cast<std::int32_t>(v);
    }
    return {CodeMatrix(raw.rows(), raw.cols(), std::move(codes)), scheme, std::move(rows), std::move(cols),
            shape[0], shape[1]};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(sidecar_path.string() + ": " + e.what());
  }
}

}  // namespace qkernel
