#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace oracle {

using Fn1 = std::function<double(double)>;

/// Adaptive Simpson quadrature on [a, b].
double integrate(const Fn1& f, double a, double b, double tol = 1e-13);

/// 1 / integral_0^1 1/a(y) dy.
double harmonic_mean(const Fn1& a);

/// Dense matrix of a(x) u'' + b(x) u' + c(x) u on (0,1), n intervals, centred
/// differences, zero Dirichlet data.
Eigen::MatrixXd dirichlet_matrix_1d(const Fn1& a, const Fn1& b, const Fn1& c, int n);

/// Dense matrix of a1(x,y) u_xx + a2(x,y) u_yy on (0,1)^2, n intervals per axis.
Eigen::MatrixXd dirichlet_matrix_2d(const std::function<double(double, double)>& a1,
                                    const std::function<double(double, double)>& a2, int n);

/// Real eigenvalue of -A with the smallest real part, and its eigenvector
/// scaled to max 1.
struct DensePair {
  double lambda = 0.0;
  Eigen::VectorXd phi;
};
DensePair principal_dense(const Eigen::MatrixXd& A);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// Minimum over all 2^(n-1) control fields of the principal eigenvalue of the
/// frozen 1D operator a_{pi(x)}(x) u'' on (0,1) with n intervals.
double enumerate_bellman_eigenvalue_1d(const std::vector<Fn1>& controls, int n);

/// Maximum over all control fields on the n-point torus of the ergodic
/// constant of a_pi(y) (M + w'') = c, which equals M times the discrete
/// harmonic mean of a_pi.
double enumerate_cell_constant_1d(const std::vector<Fn1>& controls, int n, double M);

}  // namespace oracle
