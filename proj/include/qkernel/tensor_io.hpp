#pragma once

// QTN1 binary container and CSV fixture loading.
//
// QTN1 layout, little-endian throughout:
//   [0,4)   magic "QTN1"
//   [4]     dtype code, 0 = f32, 1 = f64
//   [5]     ndim, always 2
//   [6,8)   zero padding
//   [8,24)  dims as u64 (rows, cols)
//   [24,..) row-major payload of rows*cols elements, nothing after it

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qkernel/error.hpp"
#include "qkernel/matrix.hpp"

namespace qkernel {

enum class Precision : std::uint8_t { F32 = 0, F64 = 1 };

namespace detail {

inline constexpr std::array<char, 4> kQtnMagic{'Q', 'T', 'N', '1'};
inline constexpr std::size_t kQtnHeaderBytes = 8 + 2 * 8;

inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline bool has_qtn_magic(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kQtnMagic.data(), 4) == 0;
}

}  // namespace detail

/// Encodes `m` as a QTN1 byte string. At f32 values are narrowed with the
/// usual IEEE conversion; out-of-range magnitudes become infinities and are
/// caught on load, not here.
inline std::string encode_qtn1(const Matrix& m, Precision precision = Precision::F64) {
  std::vector<unsigned char> out;
  const std::size_t elem = precision == Precision::F64 ? 8 : 4;
  out.reserve(detail::kQtnHeaderBytes + m.size() * elem);
  out.insert(out.end(), detail::kQtnMagic.begin(), detail::kQtnMagic.end());
  out.push_back(static_cast<unsigned char>(precision));
  out.push_back(2);
  out.push_back(0);
  out.push_back(0);
  detail::put_u64(out, m.rows());
  detail::put_u64(out, m.cols());
  for (double v : m.data()) {
    if (precision == Precision::F64) {
      detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
    } else {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return {out.begin(), out.end()};
}

inline Matrix decode_qtn1(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8) throw FormatError("QTN1: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  if (!detail::has_qtn_magic(bytes)) throw FormatError("QTN1: bad magic");
  const unsigned dtype = bytes[4];
  if (dtype > 1) throw FormatError("QTN1: unknown dtype code " + std::to_string(dtype));
  const unsigned ndim = bytes[5];
  if (ndim != 2) throw FormatError("QTN1: ndim must be 2, got " + std::to_string(ndim));
  if (bytes[6] != 0 || bytes[7] != 0) throw FormatError("QTN1: non-zero padding");
  if (bytes.size() < detail::kQtnHeaderBytes) throw FormatError("QTN1: truncated dims");

  const std::uint64_t rows = detail::get_u64(bytes.data() + 8);
  const std::uint64_t cols = detail::get_u64(bytes.data() + 16);
  if (rows == 0 || cols == 0) {
    throw SizeError("QTN1: dims must be positive, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::size_t elem = dtype == 1 ? 8 : 4;
  const std::size_t payload = bytes.size() - detail::kQtnHeaderBytes;
  if (cols > payload || rows > payload / cols || rows * cols > payload / elem) {
    throw SizeError("QTN1: payload of " + std::to_string(payload) + " bytes is too short for " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::size_t n = rows * cols;
  if (payload != n * elem) {
    throw FormatError("QTN1: " + std::to_string(payload - n * elem) + " trailing bytes after payload");
  }

  std::vector<double> data(n);
  const unsigned char* p = bytes.data() + detail::kQtnHeaderBytes;
  for (std::size_t k = 0; k < n; ++k, p += elem) {
    data[k] = elem == 8 ? std::bit_cast<double>(detail::get_u64(p))
                        : static_cast<double>(std::bit_cast<float>(detail::get_u32(p)));
  }
  return Matrix(rows, cols, std::move(data));
}

/// Parses comma-separated numeric rows. Blank lines are skipped.
inline Matrix parse_csv(std::string_view text) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t fields = 0;
    while (true) {
      const auto comma = line.find(',');
      std::string_view field = line.substr(0, comma);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ptr != field.data() + field.size() ||
          (ec != std::errc{} && ec != std::errc::result_out_of_range)) {
        throw FormatError("CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
      }
      // from_chars leaves v untouched on range errors; strtod reports the
      // overflow as +-HUGE_VAL and underflow as a tiny or zero value.
      if (ec == std::errc::result_out_of_range) v = std::strtod(std::string(field).c_str(), nullptr);
      if (!std::isfinite(v)) throw ValidationError(rows, fields);
      data.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw SizeError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                      " fields, got " + std::to_string(fields));
    }
    ++rows;
  }
  if (rows == 0) throw SizeError("CSV: no data rows");
  return Matrix(rows, cols, std::move(data));
}

/// Loads a QTN1 container, or a CSV file when the magic is absent.
inline Matrix load_tensor(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    if (detail::has_qtn_magic(bytes)) return decode_qtn1(bytes);
    return parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const SizeError& e) {
    throw SizeError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void save_tensor(const Matrix& m, const std::filesystem::path& path, Precision precision = Precision::F64) {
  detail::write_file(path, encode_qtn1(m, precision));
}

}  // namespace qkernel
