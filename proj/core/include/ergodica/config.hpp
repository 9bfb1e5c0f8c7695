#pragma once

#include "ergodica/problem.hpp"
#include "ergodica/torus.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ergodica {

enum class Measurement { lambda_rate, eigfun_rate, z_rate, pivot_rate, v_norm, residual_slope };

const char* to_string(Measurement m);
/// Throws ConfigError for an unknown name.
Measurement measurement_from_string(const std::string& name);

struct Tolerances {
  double eigen = 1e-10;  // Collatz-Wielandt bracket width
  double cell = kCellTolerance;
  double howard = kHowardTolerance;
  int max_iter = 2000;
};

struct OutputSpec {
  std::filesystem::path dir = ".";
  std::string csv = "sweep.csv";
  std::string json = "sweep.json";
};

struct SweepConfig {
  Problem problem;
  std::vector<long> eps_denominators;  // eps = 1/m, strictly increasing m
  int oversampling = 64;               // q: domain cells per period
  int torus_n = 0;                     // 0 selects q
  int domain_n = 0;                    // grid for single effective solves, 0 = default
  Tolerances tol;
  std::vector<Measurement> measurements;
  OutputSpec outputs;
  std::uint64_t seed = 1;
  bool record_timings = false;
  int threads = 0;  // 0 = hardware, further capped by ERGODICA_THREADS

  std::vector<double> eps_list() const;
  int torus_points() const { return torus_n > 0 ? torus_n : oversampling; }
  /// Intervals per axis of the domain grid for effective-only solves.
  int effective_domain_n() const;
  bool wants(Measurement m) const;
};

/// Default measurement set for a problem mode.
std::vector<Measurement> default_measurements(ProblemMode mode);

/// Reads "1/m" strings or numbers; throws ConfigError unless the value is the
/// reciprocal of an integer m >= 2.
long parse_eps_denominator(const std::string& text);
long eps_denominator(double eps);

/// Parses a JSON config. Relative paths (tabulated fields, outputs) resolve
/// against base_dir. All failures raise ConfigError.
SweepConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
SweepConfig load_config(const std::filesystem::path& path);

}  // namespace ergodica
