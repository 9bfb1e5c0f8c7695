#include "ergodica/config.hpp"
#include "ergodica/errors.hpp"
#include "ergodica/report.hpp"
#include "ergodica/sweep.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ergodica;

namespace {

SweepConfig small_config(const std::string& problem) {
  return parse_config(R"({"problem": ")" + problem +
                      R"(", "eps_list": ["1/4", "1/8", "1/16"], "oversampling": 16})");
}

}  // namespace

TEST(Sweep, FitRateRecoversExactPowerLaw) {
  const std::vector<double> eps{0.125, 0.0625, 0.03125, 0.015625};
  std::vector<double> err;
  for (double e : eps) err.push_back(0.7 * std::pow(e, 1.5));
  const RateFit f = fit_rate(eps, err);
  EXPECT_NEAR(f.slope, 1.5, 1e-12);
  EXPECT_NEAR(f.constant, 0.7, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.points, 4u);
}

TEST(Sweep, FitRateMatchesLeastSquaresOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> eps, err, lx, ly;
  for (int m = 4; m <= 128; m *= 2) {
    eps.push_back(1.0 / m);
    err.push_back(0.3 * std::exp(noise(rng)) / m);
    lx.push_back(std::log(eps.back()));
    ly.push_back(std::log(err.back()));
  }
  const auto [slope, icpt] = oracle::least_squares(lx, ly);
  const RateFit f = fit_rate(eps, err);
  EXPECT_NEAR(f.slope, slope, 1e-12);
  EXPECT_NEAR(std::log(f.constant), icpt, 1e-12);
}

TEST(Sweep, FitRateNeedsThreePositivePoints) {
  EXPECT_THROW(fit_rate({0.5, 0.25, 0.125}, {1.0, 0.0, 0.5}), InputError);
  EXPECT_THROW(fit_rate({0.5, 0.25}, {1.0, 0.5}), InputError);
  EXPECT_NO_THROW(fit_rate({0.5, 0.25, 0.125, 0.0625}, {1.0, 0.0, 0.5, 0.2}));
}

TEST(Sweep, EpsilonParsing) {
  EXPECT_EQ(parse_eps_denominator("1/8"), 8);
  EXPECT_EQ(parse_eps_denominator("0.125"), 8);
  EXPECT_EQ(eps_denominator(1.0 / 64), 64);
  EXPECT_THROW(parse_eps_denominator("0.3"), ConfigError);
  EXPECT_THROW(parse_eps_denominator("1/1"), ConfigError);
  EXPECT_THROW(parse_eps_denominator("abc"), ConfigError);
}

TEST(Sweep, ConfigErrors) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": "sin-a", "eps_list": ["1/8"], "bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": "nope", "eps_list": ["1/8"]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": "sin-a", "eps_list": ["1/8", "1/4"]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"problem": "sin-a", "eps_list": ["1/8"], "measurements": ["x"]})"),
               ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Sweep, ConfigDefaults) {
  const SweepConfig c = parse_config(R"({"problem": "sin-a", "eps_list": ["1/8", "1/16"]})");
  EXPECT_EQ(c.oversampling, 64);
  EXPECT_EQ(c.torus_points(), 64);
  EXPECT_EQ(c.eps_list().size(), 2u);
  EXPECT_TRUE(c.wants(Measurement::lambda_rate));
  EXPECT_EQ(c.effective_domain_n(), 1024);
}

TEST(Sweep, WorkerCountHonoursEnvironmentCap) {
  ::setenv("ERGODICA_THREADS", "1", 1);
  EXPECT_EQ(worker_count(8, 10), 1);
  ::setenv("ERGODICA_THREADS", "3", 1);
  EXPECT_EQ(worker_count(8, 2), 2);
  EXPECT_EQ(worker_count(8, 10), 3);
  ::unsetenv("ERGODICA_THREADS");
  EXPECT_GE(worker_count(0, 4), 1);
}

TEST(Sweep, ConstantProblemIsExact) {
  const SweepReport r = run_sweep(small_config("constant"));
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.ok()) << row.status;
    EXPECT_LE(row.abs_err_lambda, 1e-9);
  }
  ASSERT_NE(r.fit("lambda_rate"), nullptr);
  EXPECT_EQ(r.fit("lambda_rate")->status, "exact");
}

TEST(Sweep, CsvAndJsonRoundTrip) {
  const SweepReport r = run_sweep(small_config("sin-abc"));
  const std::string csv = report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "eps,lambda_eps,lambda_bar,abs_err_lambda,eigfun_err,z_norm,v_norm,seconds");
  const std::vector<SweepRow> rows = rows_from_csv(csv);
  ASSERT_EQ(rows.size(), r.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].eps, r.rows[i].eps);
    EXPECT_EQ(rows[i].lambda_eps, r.rows[i].lambda_eps);
    EXPECT_EQ(rows[i].v_norm, r.rows[i].v_norm);
  }
  const SweepReport back = report_from_json(report_json(r));
  EXPECT_TRUE(same_report(r, back));
  EXPECT_EQ(report_json(back), report_json(r));
}

TEST(Sweep, RunsAreDeterministic) {
  const SweepConfig c = small_config("sin-abc");
  EXPECT_EQ(report_csv(run_sweep(c)), report_csv(run_sweep(c)));
}

TEST(Sweep, EmitReportWritesFiles) {
  const SweepReport r = run_sweep(small_config("constant"));
  const auto dir = std::filesystem::temp_directory_path() / "ergodica_emit_test";
  std::filesystem::remove_all(dir);
  emit_report(r, ReportFormat::csv, dir / "a" / "out.csv");
  emit_report(r, ReportFormat::json, dir / "out.json");
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "out.csv"));
  std::ifstream in(dir / "out.json");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_TRUE(same_report(report_from_json(text), r));
  std::filesystem::remove_all(dir);
}

TEST(Sweep, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 8.54732143, 1e-300, -2.5}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(std::nan("")), "nan");
}
