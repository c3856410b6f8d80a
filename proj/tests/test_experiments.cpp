#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qkernel/experiments.hpp"
#include "qkernel/synth.hpp"

namespace qk = qkernel;

namespace {

struct Small {
  qk::Matrix x = qk::generate_activations({32, 48, 1.0, 0.05, 30.0, 21});
  qk::Matrix w = qk::generate_weights(48, 24, 0.02, 22);
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(MatmulError, NoQuantizationIsZero) {
  Small f;
  EXPECT_EQ(qk::matmul_error(f.x, f.w, std::nullopt, std::nullopt), 0.0);
}

TEST(MatmulError, ZeroInputs) {
  EXPECT_EQ(qk::matmul_error(qk::Matrix(2, 3), qk::Matrix(3, 2, {1, 2, 3, 4, 5, 6}), qk::QuantScheme::per_token(8),
                             std::nullopt),
            0.0);
}

TEST(MatmulError, Errors) {
  EXPECT_THROW(qk::matmul_error(qk::Matrix(2, 3), qk::Matrix(2, 2), std::nullopt, std::nullopt), qk::SizeError);
  // X * W = 0 exactly, but quantization breaks the cancellation.
  const qk::Matrix x(1, 2, {1.0, 0.3});
  const qk::Matrix w(2, 1, {0.3, -1.0});
  EXPECT_THROW(qk::matmul_error(x, w, qk::QuantScheme::per_token(4), std::nullopt), qk::DegenerateBaselineError);
}

TEST(AlphaSweep, AlphaOneMatchesPerToken) {
  Small f;
  const double alphas[] = {1.0};
  const auto rec = qk::alpha_sweep(f.x, f.w, alphas, 8, qk::QuantScheme::per_channel(8));
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_EQ(rec[0].kernel_proportion, qk::analyze_kernel(f.x, qk::QuantScheme::per_token(8)).kernel_proportion);
  EXPECT_EQ(rec[0].matmul_rel_error,
            qk::matmul_error(f.x, f.w, qk::QuantScheme::per_token(8), qk::QuantScheme::per_channel(8)));
  EXPECT_TRUE(qk::alpha_sweep(f.x, f.w, std::span<const double>{}, 8, std::nullopt).empty());
}

TEST(AlphaSweep, OrderFollowsInput) {
  Small f;
  const double alphas[] = {0.9, 0.1, 0.5};
  const auto rec = qk::alpha_sweep(f.x, f.w, alphas, 8, std::nullopt);
  ASSERT_EQ(rec.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(rec[k].parameter_value, alphas[k]);
    EXPECT_EQ(rec[k].parameter_name, "alpha");
    EXPECT_TRUE(std::isfinite(rec[k].matmul_rel_error));
  }
  const double bad[] = {0.5, 1.2};
  EXPECT_THROW(qk::alpha_sweep(f.x, f.w, bad, 8, std::nullopt), qk::ConfigError);
}

TEST(RemovalSweep, Endpoints) {
  Small f;
  const double props[] = {0.0, 1.0};
  const auto rec = qk::removal_sweep(f.x, f.w, props, std::nullopt);
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0].matmul_rel_error, 0.0);
  EXPECT_EQ(rec[1].matmul_rel_error, 1.0);
  EXPECT_EQ(rec[1].kernel_proportion, 1.0);
}

TEST(RemovalSweep, NonDecreasing) {
  Small f;
  std::vector<double> props;
  for (int k = 0; k <= 12; ++k) props.push_back(0.05 * k);
  const auto rec = qk::removal_sweep(f.x, f.w, props, qk::QuantScheme::per_channel(8));
  for (std::size_t k = 1; k < rec.size(); ++k) EXPECT_GE(rec[k].matmul_rel_error, rec[k - 1].matmul_rel_error) << k;
}

TEST(CompareRemoveVsQuant, KernelFreeInput) {
  const qk::Matrix x(2, 2, {1, -1, -1, 1});
  const auto r = qk::compare_remove_vs_quant(x, qk::Matrix(2, 2, {0.5, 0.25, -0.75, 1.0}), 8);
  EXPECT_EQ(r.err_remove_only, 0.0);
  EXPECT_EQ(r.err_full_quant, 0.0);  // ±max values reconstruct exactly
  EXPECT_FALSE(r.ratio.has_value());

  const qk::Matrix y(1, 3, {3.0, 3.0, 1.0});
  const auto r2 = qk::compare_remove_vs_quant(y, qk::Matrix(3, 1, {1, 1, 1}), 8);
  EXPECT_EQ(r2.err_remove_only, 0.0);
  ASSERT_TRUE(r2.ratio.has_value());
  EXPECT_EQ(*r2.ratio, 0.0);
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  EXPECT_EQ(qk::render_report({}, qk::ReportFormat::Csv),
            "parameter_name,parameter_value,kernel_proportion,matmul_rel_error,scheme\n");
  EXPECT_EQ(qk::parse_json_report(qk::render_report({}, qk::ReportFormat::Json)).size(), 0u);
}

TEST(Report, RoundTripsExactly) {
  Small f;
  const double alphas[] = {0.15, 0.45, 0.75, 1.0};
  const auto rec = qk::alpha_sweep(f.x, f.w, alphas, 8, qk::QuantScheme::per_channel(8));

  const auto dir = std::filesystem::temp_directory_path() / "qk_report_test";
  std::filesystem::create_directories(dir);
  qk::emit_report(rec, qk::ReportFormat::Json, dir / "r.json");
  EXPECT_EQ(qk::parse_json_report(slurp(dir / "r.json")), rec);

  qk::emit_report(std::span(rec).first(1), qk::ReportFormat::Csv, dir / "r.csv");
  std::istringstream csv(slurp(dir / "r.csv"));
  std::string header, line, extra;
  std::getline(csv, header);
  std::getline(csv, line);
  EXPECT_FALSE(std::getline(csv, extra));
  std::vector<std::string> fields;
  std::stringstream ls(line);
  for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
  ASSERT_EQ(fields.size(), 5u);
  EXPECT_EQ(fields[0], "alpha");
  EXPECT_EQ(std::stod(fields[1]), rec[0].parameter_value);
  EXPECT_EQ(std::stod(fields[2]), rec[0].kernel_proportion);
  EXPECT_EQ(std::stod(fields[3]), rec[0].matmul_rel_error);
  EXPECT_EQ(fields[4], rec[0].scheme);
  std::filesystem::remove_all(dir);
}
