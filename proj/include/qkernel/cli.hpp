#pragma once

// `qk` command-line front end.
//
// Exit status: 0 on success, 2 on usage errors, 1 on data/validation errors.
// Reports go to stdout unless --out is given. When QK_REPORT_DIR is set,
// relative output paths are resolved under it.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkernel/error.hpp"
#include "qkernel/experiments.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/quantized_io.hpp"
#include "qkernel/quantizers.hpp"
#include "qkernel/synth.hpp"
#include "qkernel/tensor_io.hpp"

namespace qkernel::cli {

/// Usage error detected after CLI11 parsing (maps to exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRangeTolerance = 1e-12;

/// Parses `a,b,c` or an inclusive `start:stop:step` range.
inline std::vector<double> parse_number_list(std::string_view text, std::string_view flag) {
  const auto bad = [&](std::string_view why) {
    return UsageError(std::string(flag) + ": " + std::string(why) + " in '" + std::string(text) + "'");
  };
  const auto number = [&](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) throw bad("bad number");
    return v;
  };

  std::vector<double> out;
  if (text.empty()) return out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
      throw bad("range must be start:stop:step");
    }
    const double start = number(text.substr(0, c1));
    const double stop = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (!(step > 0.0)) throw bad("step must be positive");
    if (stop < start) throw bad("stop is below start");
    for (std::size_t k = 0;; ++k) {
      double v = start + static_cast<double>(k) * step;
      if (v > stop + kRangeTolerance) break;
      if (std::abs(v - stop) <= kRangeTolerance) v = stop;
      out.push_back(v);
      if (out.size() > 1'000'000) throw bad("range too long");
    }
    return out;
  }
  while (true) {
    const auto comma = text.find(',');
    out.push_back(number(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

inline std::filesystem::path output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (const char* dir = std::getenv("QK_REPORT_DIR"); dir != nullptr && *dir != '\0' && p.is_relative()) {
    return std::filesystem::path(dir) / p;
  }
  return p;
}

inline void write_or_print(const std::string& text, const std::string& out_flag, std::ostream& out) {
  if (out_flag.empty()) {
    out << text;
  } else {
    detail::write_file(output_path(out_flag), text);
  }
}

inline std::optional<QuantScheme> scheme_flag(const std::string& text, std::string_view flag) {
  try {
    return parse_scheme_descriptor(text);
  } catch (const ConfigError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

inline QuantScheme build_scheme(const std::string& kind, int bits, double alpha, std::size_t group_size) {
  QuantScheme s;
  s.kind = parse_scheme_kind(kind);
  s.bits = bits;
  s.alpha = alpha;
  s.group_size = group_size;
  return s;
}

inline constexpr const char* kSchemeDescriptorHelp =
    "none | per-token:BITS | per-channel:BITS | group:BITS:SIZE | crossquant:BITS:ALPHA";

/// Runs one invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Quantization-kernel analysis toolkit", "qk"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a seeded synthetic activation matrix");
  SynthSpec synth;
  std::string gen_out;
  std::string gen_precision = "f64";
  gen->add_option("--rows", synth.rows, "Number of rows (tokens)")->required()->check(CLI::PositiveNumber);
  gen->add_option("--cols", synth.cols, "Number of columns (channels)")->required()->check(CLI::PositiveNumber);
  gen->add_option("--sigma", synth.base_sigma, "Standard deviation of baseline entries")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--outlier-frac", synth.outlier_frac, "Fraction of columns made outlier channels")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--outlier-scale", synth.outlier_scale, "Magnitude multiplier for outlier columns")
      ->check(CLI::Range(1.0, 1e300));
  gen->add_option("--seed", synth.seed, "RNG seed")->required();
  gen->add_option("--out", gen_out, "Output QTN1 path; the spec is echoed to PATH.json")->required();
  gen->add_option("--precision", gen_precision, "Payload precision")->check(CLI::IsMember({"f32", "f64"}));

  // quantize
  auto* quant = app.add_subcommand("quantize", "Quantize a matrix and write codes or the fake-quantized matrix");
  std::string q_in, q_scheme, q_out, q_scales;
  int q_bits = 8;
  double q_alpha = 0.15;
  std::size_t q_group = 128;
  bool q_fake = false;
  quant->add_option("--in", q_in, "Input tensor (QTN1 or CSV)")->required();
  quant->add_option("--scheme", q_scheme, "Quantization scheme")
      ->required()
      ->check(CLI::IsMember({"per-token", "per-channel", "group", "crossquant"}));
  quant->add_option("--bits", q_bits, "Bit-width N")->required()->check(CLI::Range(kMinBits, kMaxBits));
  quant->add_option("--alpha", q_alpha, "CrossQuant exponent")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  quant->add_option("--group-size", q_group, "Group size for the group scheme")->capture_default_str()->check(CLI::PositiveNumber);
  quant->add_flag("--fake", q_fake, "Write dequantized values instead of integer codes");
  quant->add_option("--out", q_out, "Output QTN1 path")->required();
  quant->add_option("--scales", q_scales, "Scale sidecar JSON path (default: OUT.json when writing codes)");

  // kernel
  auto* kern = app.add_subcommand("kernel", "Report the quantization kernel of a matrix");
  std::string k_in, k_scheme, k_mask, k_out;
  int k_bits = 8;
  double k_alpha = 0.15;
  kern->add_option("--in", k_in, "Input tensor (QTN1 or CSV)")->required();
  kern->add_option("--scheme", k_scheme, "Quantization scheme")
      ->required()
      ->check(CLI::IsMember({"per-token", "crossquant"}));
  kern->add_option("--bits", k_bits, "Bit-width N")->required()->check(CLI::Range(kMinBits, kMaxBits));
  kern->add_option("--alpha", k_alpha, "CrossQuant exponent")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  kern->add_option("--mask-out", k_mask, "Write the kernel mask as QTN1 (1.0 = in kernel)");
  kern->add_option("--out", k_out, "Write the JSON report here instead of stdout");

  // remove-kernel
  auto* rem = app.add_subcommand("remove-kernel", "Zero kernel elements or a proportion of smallest magnitudes");
  std::string r_in, r_scheme, r_out;
  int r_bits = 8;
  double r_alpha = 0.15;
  double r_prop = 0.0;
  rem->add_option("--in", r_in, "Input tensor (QTN1 or CSV)")->required();
  auto* r_scheme_opt = rem->add_option("--scheme", r_scheme, "Zero this scheme's kernel")
                           ->check(CLI::IsMember({"per-token", "crossquant"}));
  auto* r_prop_opt = rem->add_option("--proportion", r_prop, "Zero this fraction of smallest-magnitude elements")
                         ->check(CLI::Range(0.0, 1.0));
  r_scheme_opt->excludes(r_prop_opt);
  rem->add_option("--bits", r_bits, "Bit-width N (with --scheme)")->capture_default_str()->check(CLI::Range(kMinBits, kMaxBits));
  rem->add_option("--alpha", r_alpha, "CrossQuant exponent (with --scheme crossquant)")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  rem->add_option("--out", r_out, "Output QTN1 path")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Row/column maximum and zero-bound case statistics");
  std::string s_in, s_out;
  double s_alpha = 0.15;
  int s_bits = 8;
  stats->add_option("--in", s_in, "Input tensor (QTN1 or CSV)")->required();
  stats->add_option("--alpha", s_alpha, "CrossQuant exponent")->required()->check(CLI::Range(0.0, 1.0));
  stats->add_option("--bits", s_bits, "Bit-width N")->required()->check(CLI::Range(kMinBits, kMaxBits));
  stats->add_option("--out", s_out, "Write the JSON report here instead of stdout");

  // sweep-alpha
  auto* sa = app.add_subcommand("sweep-alpha", "Sweep the CrossQuant exponent");
  std::string sa_x, sa_w, sa_alphas, sa_wscheme = "per-channel:8", sa_format, sa_out;
  int sa_bits = 8;
  sa->add_option("--x", sa_x, "Activation tensor")->required();
  sa->add_option("--w", sa_w, "Weight tensor")->required();
  sa->add_option("--alphas", sa_alphas, "Comma list or start:stop:step (inclusive)")->required();
  sa->add_option("--bits", sa_bits, "Activation bit-width")->required()->check(CLI::Range(kMinBits, kMaxBits));
  sa->add_option("--w-scheme", sa_wscheme, std::string("Weight scheme: ") + kSchemeDescriptorHelp)->capture_default_str();
  sa->add_option("--format", sa_format, "Report format")->required()->check(CLI::IsMember({"csv", "json"}));
  sa->add_option("--out", sa_out, "Write the report here instead of stdout");

  // sweep-removal
  auto* sr = app.add_subcommand("sweep-removal", "Sweep the proportion of smallest-magnitude activations zeroed");
  std::string sr_x, sr_w, sr_props, sr_wscheme = "per-channel:8", sr_format, sr_out;
  sr->add_option("--x", sr_x, "Activation tensor")->required();
  sr->add_option("--w", sr_w, "Weight tensor")->required();
  sr->add_option("--proportions", sr_props, "Comma list or start:stop:step (inclusive)")->required();
  sr->add_option("--w-scheme", sr_wscheme, std::string("Weight scheme: ") + kSchemeDescriptorHelp)->capture_default_str();
  sr->add_option("--format", sr_format, "Report format")->required()->check(CLI::IsMember({"csv", "json"}));
  sr->add_option("--out", sr_out, "Write the report here instead of stdout");

  // matmul-error
  auto* me = app.add_subcommand("matmul-error", "Relative Frobenius error of X*W under fake quantization");
  std::string me_x, me_w, me_xscheme = "none", me_wscheme = "none", me_out;
  me->add_option("--x", me_x, "Activation tensor")->required();
  me->add_option("--w", me_w, "Weight tensor")->required();
  me->add_option("--x-scheme", me_xscheme, std::string("Activation scheme: ") + kSchemeDescriptorHelp)->capture_default_str();
  me->add_option("--w-scheme", me_wscheme, std::string("Weight scheme: ") + kSchemeDescriptorHelp)->capture_default_str();
  me->add_option("--out", me_out, "Write the JSON result here instead of stdout");

  std::vector<const char*> argv{"qk"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "qk: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) {
      const Matrix m = generate_activations(synth);
      const auto path = output_path(gen_out);
      save_tensor(m, path, gen_precision == "f32" ? Precision::F32 : Precision::F64);
      auto meta = synth_spec_json(synth);
      meta["precision"] = gen_precision;
      meta["outlier_columns"] = outlier_columns(synth);
      detail::write_file(path.string() + ".json", meta.dump(2) + "\n");
    } else if (quant->parsed()) {
      const Matrix x = load_tensor(q_in);
      const auto scheme = build_scheme(q_scheme, q_bits, q_alpha, q_group);
      scheme.validate_for(x.rows(), x.cols());
      const auto q = quantize(x, scheme);
      const auto path = output_path(q_out);
      if (q_fake) {
        save_tensor(dequantize(q), path);
        if (!q_scales.empty()) detail::write_file(output_path(q_scales), quantized_sidecar(q).dump(2) + "\n");
      } else {
        save_quantized(q, path, q_scales.empty() ? std::filesystem::path(path.string() + ".json") : output_path(q_scales));
      }
    } else if (kern->parsed()) {
      const Matrix x = load_tensor(k_in);
      const auto report = analyze_kernel(x, build_scheme(k_scheme, k_bits, k_alpha, 0));
      if (!k_mask.empty()) save_tensor(mask_as_matrix(report.mask), output_path(k_mask));
      write_or_print(kernel_report_json(report).dump(2) + "\n", k_out, out);
    } else if (rem->parsed()) {
      if (r_scheme_opt->count() == 0 && r_prop_opt->count() == 0) {
        throw UsageError("remove-kernel: one of --scheme or --proportion is required");
      }
      const Matrix x = load_tensor(r_in);
      const Matrix y = r_scheme_opt->count() > 0 ? remove_kernel(x, build_scheme(r_scheme, r_bits, r_alpha, 0))
                                                 : remove_by_proportion(x, r_prop);
      save_tensor(y, output_path(r_out));
    } else if (stats->parsed()) {
      const Matrix x = load_tensor(s_in);
      const auto cq = analyze_kernel(x, QuantScheme::cross_quant(s_bits, s_alpha));
      const auto pt = analyze_kernel(x, QuantScheme::per_token(s_bits));
      nlohmann::json j;
      j["alpha"] = s_alpha;
      j["bits"] = s_bits;
      j["rows"] = x.rows();
      j["cols"] = x.cols();
      j["frac_c_ge_t"] = cq.frac_c_ge_t;
      j["frac_Btilde_lt_B"] = *cq.frac_Btilde_lt_B;
      j["kernel_proportion_crossquant"] = cq.kernel_proportion;
      j["kernel_proportion_per_token"] = pt.kernel_proportion;
      write_or_print(j.dump(2) + "\n", s_out, out);
    } else if (sa->parsed()) {
      const auto alphas = parse_number_list(sa_alphas, "--alphas");
      const auto wscheme = scheme_flag(sa_wscheme, "--w-scheme");
      const auto records = alpha_sweep(load_tensor(sa_x), load_tensor(sa_w), alphas, sa_bits, wscheme);
      write_or_print(render_report(records, sa_format == "csv" ? ReportFormat::Csv : ReportFormat::Json), sa_out, out);
    } else if (sr->parsed()) {
      const auto props = parse_number_list(sr_props, "--proportions");
      const auto wscheme = scheme_flag(sr_wscheme, "--w-scheme");
      const auto records = removal_sweep(load_tensor(sr_x), load_tensor(sr_w), props, wscheme);
      write_or_print(render_report(records, sr_format == "csv" ? ReportFormat::Csv : ReportFormat::Json), sr_out, out);
    } else if (me->parsed()) {
      const auto xs = scheme_flag(me_xscheme, "--x-scheme");
      const auto ws = scheme_flag(me_wscheme, "--w-scheme");
      const double e = matmul_error(load_tensor(me_x), load_tensor(me_w), xs, ws);
      const std::string text = "{\"x_scheme\": " + nlohmann::json(scheme_descriptor(xs)).dump() +
                               ", \"w_scheme\": " + nlohmann::json(scheme_descriptor(ws)).dump() +
                               ", \"matmul_rel_error\": " + format_17g(e) + "}\n";
      write_or_print(text, me_out, out);
    }
  } catch (const UsageError& e) {
    err << "qk: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "qk: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qkernel::cli
