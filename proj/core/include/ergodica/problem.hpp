#pragma once

#include "ergodica/coeff.hpp"

#include <string>
#include <vector>

namespace ergodica {

enum class ProblemMode { linear, bellman };

/// A catalog or user-defined problem on (0,1)^dim. Linear problems fill
/// `linear`; Bellman problems fill `bellman`.
struct Problem {
  std::string name;
  int dim = 1;
  ProblemMode mode = ProblemMode::linear;
  LinearOperatorSpec linear;
  BellmanSpec bellman;
};

/// Built-in names: constant, sin-a, sin-abc, sep-2d, pucci-1d, bellman-2ctl-1d.
std::vector<std::string> catalog_names();

/// Catalog entry with default parameters. Throws ConfigError for unknown names.
Problem catalog_problem(const std::string& name);

Problem make_linear_problem(std::string name, CoefficientField field, double lambda_ell,
                            double Lambda_ell, double c1 = 0.0);
Problem make_bellman_problem(std::string name, std::vector<LinearOperatorSpec> controls);

/// Ellipticity interval [min, max] of the a-spectrum over a regular sample
/// of the torus (n points per axis).
std::pair<double, double> sampled_ellipticity(const CoefficientField& field, int n = 64);

/// Largest |b| + |c| over the same sample (used as the C1 bound).
double sampled_lower_order_bound(const CoefficientField& field, int n = 64);

const char* to_string(ProblemMode mode);

}  // namespace ergodica
