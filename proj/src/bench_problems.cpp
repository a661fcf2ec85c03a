#include "fode/bench_problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fode {

namespace {

bool is_integer(double x) { return x == std::floor(x); }

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

Index index_param(const std::map<std::string, double>& p, const std::string& key, Index fallback) {
  const double v = param(p, key, static_cast<double>(fallback));
  if (!(v >= 1.0) || !is_integer(v)) throw std::invalid_argument(key + " must be a positive integer");
  return static_cast<Index>(v);
}

}  // namespace

Formulation formulation_from_string(const std::string& name) {
  if (name == "volt1") return Formulation::volt1;
  if (name == "volt2") return Formulation::volt2;
  if (name == "auto" || name == "automatic") return Formulation::automatic;
  throw std::invalid_argument("unknown formulation '" + name + "' (volt1, volt2, auto)");
}

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::volt1: return "volt1";
    case Formulation::volt2: return "volt2";
    case Formulation::automatic: return "auto";
  }
  return "unknown";
}

GridOrdering ordering_from_string(const std::string& name) {
  if (name == "by_species" || name == "by-species" || name == "species") return GridOrdering::by_species;
  if (name == "by_gridpoint" || name == "by-gridpoint" || name == "gridpoint") return GridOrdering::by_gridpoint;
  throw std::invalid_argument("unknown ordering '" + name + "' (by_species, by_gridpoint)");
}

const char* to_string(GridOrdering o) {
  return o == GridOrdering::by_species ? "by_species" : "by_gridpoint";
}

std::optional<Eigen::VectorXd> BenchmarkSpec::truth(double t) const {
  if (exact_solution) return exact_solution(t);
  if (reference && std::abs(reference->t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return reference->values;
  return std::nullopt;
}

std::optional<double> BenchmarkSpec::error(double t, const Eigen::VectorXd& y) const {
  const auto e = truth(t);
  if (!e) return std::nullopt;
  const Index n = e->size();
  if (y.size() < n) throw std::invalid_argument("error: state shorter than the reference");
  const Eigen::VectorXd diff = y.head(n) - *e;
  switch (metric) {
    case ErrorMetric::relative_first: return std::abs(diff(0)) / std::abs((*e)(0));
    case ErrorMetric::absolute_first: return std::abs(diff(0));
    case ErrorMetric::relative_max: return diff.cwiseAbs().maxCoeff() / e->cwiseAbs().maxCoeff();
    case ErrorMetric::euclid_relative: return diff.cwiseQuotient(*e).norm();
  }
  return std::nullopt;
}

Benchmark example1(double alpha, Formulation formulation) {
  if (!(alpha > 0.0) || is_integer(alpha)) throw std::invalid_argument("example1: alpha must be a positive non-integer");
  const double g1 = std::tgamma(1.0 + alpha);
  const double c2 = 3.0 * std::tgamma(5.0 + alpha / 2.0) / std::tgamma(5.0 - alpha / 2.0);
  const double c3 = std::tgamma(9.0) / std::tgamma(9.0 - alpha);

  OdeFunction f = [alpha, g1, c2, c3](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    const double base = 1.5 * std::pow(t, alpha / 2.0) - std::pow(t, 4.0);
    const double yp = std::max(y(0), 0.0);
    out(0) = 2.25 * g1 - c2 * std::pow(t, 4.0 - alpha / 2.0) + c3 * std::pow(t, 8.0 - alpha) + base * base * base -
             yp * std::sqrt(yp);
  };
  OdeJacobian df = [](double, const Eigen::VectorXd& y, Eigen::Ref<Eigen::MatrixXd> out) {
    out(0, 0) = -1.5 * std::sqrt(std::max(y(0), 0.0));
  };

  const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
  const auto m = static_cast<std::size_t>(std::ceil(alpha));
  const std::vector<Eigen::VectorXd> derivs0(m - 1, Eigen::VectorXd::Zero(1));

  Formulation used = formulation;
  if (alpha < 1.0) {
    if (formulation == Formulation::volt2) {
      throw std::invalid_argument("example1: the integro-differential form needs alpha > 1");
    }
    used = Formulation::volt1;
  } else if (used == Formulation::automatic) {
    used = alpha < 1.5 ? Formulation::volt1 : Formulation::volt2;
  }

  Benchmark b;
  if (used == Formulation::volt1) {
    b.problem = alpha < 1.0 ? from_caputo_volt1(alpha, f, df, y0) : from_caputo_volt1(alpha, f, df, y0, derivs0);
  } else {
    b.problem = from_caputo_volt2(alpha, f, df, y0, derivs0);
  }
  b.problem.t_end = 1.0;

  b.spec.name = "example1";
  b.spec.description = "scalar Caputo equation with exact solution (1.5 t^(alpha/2) - t^4)^2";
  b.spec.parameters = {{"alpha", alpha}, {"T", 1.0}, {"formulation", static_cast<double>(used)}};
  b.spec.exact_solution = [alpha](double t) {
    const double base = 1.5 * std::pow(t, alpha / 2.0) - std::pow(t, 4.0);
    return Eigen::VectorXd::Constant(1, base * base);
  };
  b.spec.metric = ErrorMetric::relative_first;
  return b;
}

Benchmark brusselator() {
  constexpr double A = 1.0;
  constexpr double B = 3.0;
  constexpr double alpha1 = 1.3;
  constexpr double alpha2 = 0.8;
  constexpr double y10 = 1.2;
  constexpr double y20 = 2.8;
  constexpr double dy10 = 1.0;

  Benchmark b;
  FractionalIVP& p = b.problem;
  p.dim = 2;
  p.mass = Eigen::Vector2d(1.0, 0.0);
  p.integrals = {IntegralTerm{alpha1 - 1.0}, IntegralTerm{alpha2}};
  p.y0 = Eigen::Vector2d(y10, y20);
  p.t_end = 220.0;
  p.layout = HeadLayout::dense;
  p.f = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd& in, Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = dy10 + in(0);
    out(1) = y20 + in(1) - y(1);
  };
  p.g = [](double, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    const double q = y(0) * y(0) * y(1);
    out(0) = A - (B + 1.0) * y(0) + q;
    out(1) = B * y(0) - q;
  };
  p.jacobian = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&, ProblemJacobian& jac) {
    jac.df_dy.setZero();
    jac.df_dy(1, 1) = -1.0;
    jac.df_di.setIdentity();
    const double q1 = 2.0 * y(0) * y(1);
    const double q2 = y(0) * y(0);
    jac.dg_dy(0, 0) = -(B + 1.0) + q1;
    jac.dg_dy(0, 1) = q2;
    jac.dg_dy(1, 0) = B - q1;
    jac.dg_dy(1, 1) = -q2;
  };

  b.spec.name = "brusselator";
  b.spec.description = "fractional Brusselator, orders 1.3 and 0.8, A=1, B=3";
  b.spec.parameters = {{"A", A}, {"B", B}, {"alpha1", alpha1}, {"alpha2", alpha2}, {"T", 220.0}};
  b.spec.reference = ReferenceValues{220.0, Eigen::Vector2d(1.0097684171, 2.1581264031)};
  b.spec.metric = ErrorMetric::euclid_relative;
  return b;
}

Benchmark multiterm(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("multiterm: alpha must lie in (0,1)");
  const double order = 1.0 - alpha;

  Benchmark b;
  FractionalIVP& p = b.problem;
  p.dim = 4;
  p.mass = Eigen::Vector4d(1.0, 1.0, 1.0, 0.0);
  p.integrals = {IntegralTerm{order}, IntegralTerm{order}};
  p.y0 = Eigen::Vector4d(1.0, 1.0, -1.0, 6.0 - (-1.0) - 4.0 * 1.0 - 4.0 * 1.0);
  p.t_end = 5000.0;
  p.layout = HeadLayout::dense;
  p.f = [](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& in, Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = y(1);
    out(1) = y(2);
    out(2) = y(3);
    out(3) = y(3) + in(0) + y(2) + 4.0 * y(1) + in(1) + 4.0 * y(0) - 6.0 * std::cos(t);
  };
  p.g = [](double, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = y(3);
    out(1) = y(1);
  };
  p.jacobian = [](double, const Eigen::VectorXd&, const Eigen::VectorXd&, ProblemJacobian& jac) {
    jac.df_dy.setZero();
    jac.df_dy(0, 1) = 1.0;
    jac.df_dy(1, 2) = 1.0;
    jac.df_dy(2, 3) = 1.0;
    jac.df_dy.row(3) << 4.0, 4.0, 1.0, 1.0;
    jac.df_di.setZero();
    jac.df_di(3, 0) = 1.0;
    jac.df_di(3, 1) = 1.0;
    jac.dg_dy.setZero();
    jac.dg_dy(0, 3) = 1.0;
    jac.dg_dy(1, 1) = 1.0;
  };

  b.spec.name = "multiterm";
  b.spec.description = "multi-term equation with exact solution sqrt(2) sin(t + pi/4), as an index-1 DAE";
  b.spec.parameters = {{"alpha", alpha}, {"T", 5000.0}};
  b.spec.exact_solution = [](double t) {
    const double s = std::numbers::sqrt2 * std::sin(t + std::numbers::pi / 4.0);
    const double c = std::numbers::sqrt2 * std::cos(t + std::numbers::pi / 4.0);
    return Eigen::Vector4d(s, c, -s, -c).eval();
  };
  b.spec.metric = ErrorMetric::absolute_first;
  return b;
}

Benchmark pde1d(double alpha, double beta, Index d) {
  if (!(alpha > 0.0 && alpha < 2.0) || is_integer(alpha)) {
    throw std::invalid_argument("pde1d: alpha must lie in (0,2) and not be 1");
  }
  if (!(beta >= alpha)) throw std::invalid_argument("pde1d: beta must be at least alpha");
  if (d < 2) throw std::invalid_argument("pde1d: need at least 2 grid points");

  const double dx = 1.0 / static_cast<double>(d + 1);
  const double inv_dx2 = 1.0 / (dx * dx);
  Eigen::VectorXd shape(d);
  for (Index i = 0; i < d; ++i) {
    const double x = static_cast<double>(i + 1) * dx;
    shape(i) = 0.5 * x * (1.0 - x);
  }
  const double amp = std::tgamma(beta) * beta / std::tgamma(beta + 1.0 - alpha);
  // u_t(x, 0) is shape(x) for beta = 1 and zero for beta > 1.
  const double slope0 = alpha > 1.0 && beta == 1.0 ? 1.0 : 0.0;

  Benchmark b;
  FractionalIVP& p = b.problem;
  p.dim = d;
  p.mass = Eigen::VectorXd::Zero(d);
  p.integrals.assign(static_cast<std::size_t>(d), IntegralTerm{alpha});
  p.y0 = shape;
  p.t_end = 1000.0;
  p.layout = HeadLayout::banded;
  p.band = Bandwidth{1, 1};
  p.f = [shape, slope0](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& in,
                        Eigen::Ref<Eigen::VectorXd> out) { out = shape * (1.0 + slope0 * t) + in - y; };
  p.g = [shape, amp, alpha, beta, inv_dx2, d](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    const double tb = std::pow(t, beta);
    const double forcing = t > 0.0 ? amp * std::pow(t, beta - alpha) : (beta == alpha ? amp : 0.0);
    for (Index i = 0; i < d; ++i) {
      const double left = i > 0 ? y(i - 1) : 0.0;
      const double right = i + 1 < d ? y(i + 1) : 0.0;
      out(i) = inv_dx2 * (left - 2.0 * y(i) + right) + shape(i) * forcing + (tb + 1.0);
    }
  };
  p.jacobian = [inv_dx2, d](double, const Eigen::VectorXd&, const Eigen::VectorXd&, ProblemJacobian& jac) {
    for (Index i = 0; i < d; ++i) {
      jac.df_dy_band(i, i) = -1.0;
      jac.df_di_diag(i) = 1.0;
      jac.dg_dy_band(i, i) = -2.0 * inv_dx2;
      if (i > 0) jac.dg_dy_band(i, i - 1) = inv_dx2;
      if (i + 1 < d) jac.dg_dy_band(i, i + 1) = inv_dx2;
    }
  };

  b.spec.name = "pde1d";
  b.spec.description = "fractional heat equation on (0,1), exact solution x(1-x)(t^beta+1)/2";
  b.spec.parameters = {{"alpha", alpha}, {"beta", beta}, {"d", static_cast<double>(d)}, {"T", 1000.0}};
  b.spec.exact_solution = [shape, beta](double t) { return (shape * (std::pow(t, beta) + 1.0)).eval(); };
  b.spec.metric = ErrorMetric::relative_max;
  return b;
}

Benchmark reaction_diffusion(double alpha, Index d, GridOrdering ordering) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("reaction_diffusion: alpha must lie in (0,1)");
  if (d < 2) throw std::invalid_argument("reaction_diffusion: need at least 2 grid points");
  constexpr double K = 0.5;
  constexpr double k1 = 1.0;
  constexpr double k2 = 2.0;
  constexpr double k3 = 3.0;

  const Index n = 3 * d;
  const double dx = 1.0 / static_cast<double>(d + 1);
  const double kd = K / (dx * dx);
  const bool species_major = ordering == GridOrdering::by_species;
  auto idx = [d, species_major](Index s, Index i) { return species_major ? s * d + i : 3 * i + s; };

  Eigen::VectorXd y0(n);
  for (Index i = 0; i < d; ++i) {
    const double x = static_cast<double>(i + 1) * dx;
    y0(idx(0, i)) = 0.5 * x * (1.0 - x);
    y0(idx(1, i)) = x * x * (1.0 - x);
    y0(idx(2, i)) = 1.5 * x * (1.0 - x) * (1.0 - x);
  }

  Benchmark b;
  FractionalIVP& p = b.problem;
  p.dim = n;
  p.mass = Eigen::VectorXd::Zero(n);
  p.integrals.assign(static_cast<std::size_t>(n), IntegralTerm{alpha});
  p.y0 = y0;
  p.t_end = 30.0;
  p.layout = HeadLayout::banded;
  p.band = species_major ? Bandwidth{1, 1} : Bandwidth{3, 3};
  p.f = [y0](double, const Eigen::VectorXd& y, const Eigen::VectorXd& in, Eigen::Ref<Eigen::VectorXd> out) {
    out = y0 + in - y;
  };
  p.g = [idx, d, kd](double, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) {
    for (Index i = 0; i < d; ++i) {
      const double u1 = y(idx(0, i));
      const double u2 = y(idx(1, i));
      const double u3 = y(idx(2, i));
      const double r = k1 * u1 * u2;
      const double react[3] = {-r + (k2 + k3) * u3, -r + k2 * u3, r - (k2 + k3) * u3};
      for (Index s = 0; s < 3; ++s) {
        const double left = i > 0 ? y(idx(s, i - 1)) : 0.0;
        const double right = i + 1 < d ? y(idx(s, i + 1)) : 0.0;
        out(idx(s, i)) = kd * (left - 2.0 * y(idx(s, i)) + right) + react[s];
      }
    }
  };
  p.jacobian = [idx, d, kd, species_major](double, const Eigen::VectorXd& y, const Eigen::VectorXd&,
                                           ProblemJacobian& jac) {
    for (Index r = 0; r < 3 * d; ++r) {
      jac.df_dy_band(r, r) = -1.0;
      jac.df_di_diag(r) = 1.0;
    }
    for (Index i = 0; i < d; ++i) {
      const double u1 = y(idx(0, i));
      const double u2 = y(idx(1, i));
      const double dr[3][3] = {{-k1 * u2, -k1 * u1, k2 + k3}, {-k1 * u2, -k1 * u1, k2}, {k1 * u2, k1 * u1, -(k2 + k3)}};
      for (Index s = 0; s < 3; ++s) {
        const Index row = idx(s, i);
        if (i > 0) jac.dg_dy_band(row, idx(s, i - 1)) = kd;
        if (i + 1 < d) jac.dg_dy_band(row, idx(s, i + 1)) = kd;
        for (Index q = 0; q < 3; ++q) {
          const double v = dr[s][q] + (q == s ? -2.0 * kd : 0.0);
          // Cross-species reaction terms lie far off the band in species-major order.
          if (species_major && q != s) continue;
          jac.dg_dy_band(row, idx(q, i)) = v;
        }
      }
    }
  };

  b.spec.name = "reaction_diffusion";
  b.spec.description = "three-species reaction-diffusion system with memory, K=0.5, k=(1,2,3)";
  b.spec.parameters = {{"alpha", alpha},
                       {"d", static_cast<double>(d)},
                       {"ordering", static_cast<double>(ordering)},
                       {"K", K},
                       {"k1", k1},
                       {"k2", k2},
                       {"k3", k3},
                       {"T", 30.0}};
  return b;
}

std::vector<std::string> benchmark_names() {
  return {"example1", "brusselator", "multiterm", "pde1d", "reaction_diffusion"};
}

Benchmark make_benchmark(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "example1") {
    const auto f = static_cast<int>(param(params, "formulation", 2.0));
    if (f < 0 || f > 2) throw std::invalid_argument("formulation must be 0, 1 or 2");
    return example1(param(params, "alpha", 0.5), static_cast<Formulation>(f));
  }
  if (name == "brusselator") return brusselator();
  if (name == "multiterm") return multiterm(param(params, "alpha", 0.5));
  if (name == "pde1d") {
    return pde1d(param(params, "alpha", 1.0 / 3.0), param(params, "beta", 5.0 / 3.0), index_param(params, "d", 100));
  }
  if (name == "reaction_diffusion") {
    const double o = param(params, "ordering", 1.0);
    if (o != 0.0 && o != 1.0) throw std::invalid_argument("ordering must be 0 or 1");
    return reaction_diffusion(param(params, "alpha", 0.5), index_param(params, "d", 1000),
                              static_cast<GridOrdering>(static_cast<int>(o)));
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::complex<double> multiterm_characteristic(double alpha, std::complex<double> z) {
  return std::pow(z, alpha + 2.0) + std::pow(z, alpha) + z * z * z + z * z + 4.0 * z + 4.0;
}

std::complex<double> multiterm_root(double alpha, std::complex<double> seed) {
  std::complex<double> z = seed;
  for (int it = 0; it < 100; ++it) {
    const std::complex<double> l = multiterm_characteristic(alpha, z);
    const std::complex<double> dl = (alpha + 2.0) * std::pow(z, alpha + 1.0) + alpha * std::pow(z, alpha - 1.0) +
                                    3.0 * z * z + 2.0 * z + 4.0;
    const std::complex<double> step = l / dl;
    z -= step;
    if (std::abs(step) <= 1e-15 * std::abs(z)) break;
  }
  return z;
}

double multiterm_stability_threshold(double lo, double hi, double tol) {
  double flo = multiterm_root(lo).real();
  const double fhi = multiterm_root(hi).real();
  if (flo * fhi > 0.0) throw std::runtime_error("multiterm_stability_threshold: no sign change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = multiterm_root(mid).real();
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fode
