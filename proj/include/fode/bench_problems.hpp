#pragma once

#include "fode/problem.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fode {

/// How a Caputo problem of order alpha > 1 is written as a Volterra system.
enum class Formulation { volt1, volt2, automatic };

Formulation formulation_from_string(const std::string& name);
const char* to_string(Formulation f);

/// How the error against the source of truth is measured.
enum class ErrorMetric {
  relative_first,    ///< |y_1 - e_1| / |e_1|
  absolute_first,    ///< |y_1 - e_1|
  relative_max,      ///< max_i |y_i - e_i| / max_i |e_i|
  euclid_relative,   ///< || (y_i - e_i) / e_i ||_2
};

struct ReferenceValues {
  double t = 0.0;
  Eigen::VectorXd values;  ///< leading problem components at t
};

/// Descriptor of a built-in problem. At most one of exact_solution and
/// reference is set; both may be absent.
struct BenchmarkSpec {
  std::string name;
  std::string description;
  std::map<std::string, double> parameters;
  /// Leading problem components as functions of t.
  std::function<Eigen::VectorXd(double t)> exact_solution;
  std::optional<ReferenceValues> reference;
  ErrorMetric metric = ErrorMetric::relative_first;

  bool has_truth() const { return static_cast<bool>(exact_solution) || reference.has_value(); }
  /// Truth at t: the exact solution, or the reference when t matches it.
  std::optional<Eigen::VectorXd> truth(double t) const;
  /// Error of the computed problem state y at t; nullopt without a truth source.
  std::optional<double> error(double t, const Eigen::VectorXd& y) const;
};

struct Benchmark {
  BenchmarkSpec spec;
  FractionalIVP problem;
};

/// D^alpha y = f(t, y) with exact solution (1.5 t^(alpha/2) - t^4)^2, T = 1.
Benchmark example1(double alpha, Formulation formulation = Formulation::automatic);

/// Fractional Brusselator, alpha1 = 1.3 (integro-differential form) and
/// alpha2 = 0.8 (integral form), on [0, 220].
Benchmark brusselator();

/// Multi-term equation y''' + D^(alpha+2) y + y'' + 4y' + D^alpha y + 4y = 6 cos t
/// as three ODEs and one algebraic row, on [0, 5000].
Benchmark multiterm(double alpha);

/// Fractional heat equation with forcing chosen so that
/// u(x,t) = x(1-x)(t^beta + 1)/2, d interior grid points, on [0, 1000].
Benchmark pde1d(double alpha, double beta, Index d);

enum class GridOrdering { by_species, by_gridpoint };

GridOrdering ordering_from_string(const std::string& name);
const char* to_string(GridOrdering o);

/// Three-species reaction-diffusion system with memory on [0, 30].
/// by_species keeps only the tridiagonal part of dG/dy; by_gridpoint is
/// exact with bandwidths 3.
Benchmark reaction_diffusion(double alpha, Index d, GridOrdering ordering);

/// Names accepted by make_benchmark.
std::vector<std::string> benchmark_names();

/// Builds a benchmark by name. Recognised parameters: alpha, beta, d,
/// ordering (0 by_species, 1 by_gridpoint), formulation (0 volt1, 1 volt2,
/// 2 automatic). Missing ones take the documented defaults.
Benchmark make_benchmark(const std::string& name, const std::map<std::string, double>& params);

/// L(z) = z^(alpha+2) + z^alpha + z^3 + z^2 + 4z + 4, principal branch.
std::complex<double> multiterm_characteristic(double alpha, std::complex<double> z);

/// Root of the characteristic function reached by Newton from `seed`.
std::complex<double> multiterm_root(double alpha, std::complex<double> seed = {0.0, 1.65686});

/// Order at which the root continued from the seed crosses the imaginary
/// axis, by bisection on [lo, hi].
double multiterm_stability_threshold(double lo = 0.6, double hi = 0.7, double tol = 1e-8);

}  // namespace fode
