#pragma once

#include <Eigen/Dense>

#include <iosfwd>

namespace fode {

/// Parameters of the trapezoidal sum-of-exponentials approximation of
/// k(t) = t^(alpha-1) / Gamma(alpha) on [delta, t_end].
struct KernelParams {
  double alpha = 0.5;        ///< kernel order, in (0, 1)
  double eps = 1e-6;         ///< requested relative accuracy
  double t_end = 1.0;        ///< right end of the certified interval
  double delta = 0.0;        ///< left end of the certified interval
  double h = 0.0;            ///< trapezoidal step in the log variable
  int m_lo = 0;              ///< first node index (M)
  int n_hi = 0;              ///< one past the last node index (N)
  double delta_order = 0.5;  ///< order whose near-zero mass defines delta

  int size() const { return n_hi - m_lo; }
};

/// Weights c_i and exponents gamma_i with k(t) ~ sum_i c_i exp(-gamma_i t).
/// Exponents increase strictly with the index; all entries are positive.
struct SumOfExponentials {
  double alpha = 0.5;
  Eigen::VectorXd weights;
  Eigen::VectorXd exponents;
  double valid_from = 0.0;
  double valid_to = 0.0;
  double eps = 0.0;
  KernelParams params;

  Eigen::Index size() const { return weights.size(); }
};

/// t^(alpha-1) / Gamma(alpha), evaluated in log space.
double fractional_kernel(double alpha, double t);

/// Step size, truncation indices and validity interval for a requested
/// relative accuracy `eps` on [delta, t_end].
///
/// delta = (Gamma(alpha+1) eps)^(1/alpha) bounds the kernel mass lost below
/// delta by eps. M and N are rounded outward from the asymptotic surrogates
/// x_* = (Gamma(2-alpha) eps)^(1/(1-alpha)) and x^* = -ln(Gamma(1-alpha) eps).
///
/// Throws std::invalid_argument for alpha outside (0,1), eps outside (0,1),
/// Gamma(1-alpha) eps >= 1, or t_end <= delta.
KernelParams choose_parameters(double alpha, double eps, double t_end);

/// Parameters for the exponential factor of a split kernel of order
/// `order` > 1: the sum approximates t^(a0-1)/Gamma(a0), a0 = order - ceil(order) + 1,
/// while delta is sized from the full order, whose kernel vanishes at zero.
KernelParams choose_split_parameters(double order, double eps, double t_end);

/// Nodes i = M, ..., N-1: c_i = h sin(pi alpha)/pi e^((1-alpha) i h), gamma_i = e^(i h).
SumOfExponentials build_soe(const KernelParams& params);

/// sum_i c_i exp(-gamma_i t). Defined for all t >= 0; the accuracy
/// certificate only covers [valid_from, valid_to].
double eval_soe(const SumOfExponentials& soe, double t);

/// Maximum relative error against the exact kernel over `n_samples`
/// log-uniform points of [valid_from, valid_to] (endpoints included).
double verify_soe(const SumOfExponentials& soe, int n_samples);

/// Trapezoid value of the integral of |k(s) - soe(s)| over [valid_from, t]
/// on a log-uniform grid with `n_samples` points.
double integrated_kernel_error(const SumOfExponentials& soe, double t, int n_samples);

/// Solution u(t) of u = l_f J^(1/2) u + m_f (1 + t^(1/2)), the growth factor
/// bounding how a kernel perturbation of size eps propagates to the solution
/// of a Lipschitz problem of order one half.
double perturbation_bound_half(double l_f, double m_f, double t);

/// Header "# alpha eps T delta h M N", then one "index c_i gamma_i" line per
/// term, all reals with 17 significant digits.
void write_soe(std::ostream& os, const SumOfExponentials& soe);

}  // namespace fode
