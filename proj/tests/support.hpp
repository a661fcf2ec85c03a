#pragma once

#include "fode/augment.hpp"
#include "fode/problem.hpp"
#include "fode/radau.hpp"
#include "fode/structlinalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <type_traits>
#include <vector>

namespace fode::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline Eigen::VectorXd random_vector(Index n, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

template <typename A, typename B>
double rel_diff(const A& a, const B& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// M y' = f(t, y) without memory terms.
inline FractionalIVP plain_problem(Eigen::VectorXd mass, Eigen::VectorXd y0, double t_end,
                                   std::function<void(double, const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>)> f,
                                   std::function<void(double, const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd>)> df) {
  FractionalIVP p;
  p.dim = y0.size();
  p.mass = std::move(mass);
  p.y0 = std::move(y0);
  p.t_end = t_end;
  p.f = [f](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd> out) {
    f(t, y, out);
  };
  p.jacobian = [df](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, ProblemJacobian& jac) {
    df(t, y, jac.df_dy);
  };
  return p;
}

/// J^alpha g at t by product integration: g at interval midpoints, kernel integrated exactly.
inline double riemann_liouville(double alpha, const std::function<double(double)>& g, double t, int n) {
  const double h = t / n;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a = t - k * h;
    const double b = t - (k + 1) * h;
    acc += g((k + 0.5) * h) * (std::pow(a, alpha) - std::pow(std::max(b, 0.0), alpha));
  }
  return acc / std::tgamma(alpha + 1.0);
}

inline BlockSpec random_block(Index terms, int chain) {
  BlockSpec b;
  b.chain = chain;
  b.alpha = chain == 1 ? 0.5 : chain - 0.5;
  b.weights = random_vector(terms, 0.01, 2.0);
  b.exponents.resize(terms);
  for (Index i = 0; i < terms; ++i) b.exponents(i) = log_uniform(1e-2, 1e3);
  b.prefactor = chain == 1 ? 1.0 : uniform(0.5, 3.0);
  return b;
}

/// Arrow-shaped Jacobian with random head, couplings and blocks; one block per entry of `chains`.
inline StructuredJacobian random_jacobian(Index d, HeadLayout layout, Bandwidth band, const std::vector<int>& chains,
                                   Index terms) {
  auto blocks = std::make_shared<BlockList>();
  Index offset = d;
  for (int c : chains) {
    BlockSpec b = random_block(terms, c);
    b.offset = offset;
    offset += b.size();
    blocks->push_back(std::move(b));
  }
  StructuredJacobian jac;
  jac.dim = d;
  jac.blocks = blocks;
  const auto di = static_cast<Index>(chains.size());
  jac.couplings = ProblemJacobian::zeros(layout, d, di, band);
  if (layout == HeadLayout::dense) {
    jac.couplings.df_dy = Eigen::MatrixXd::Random(d, d);
    jac.couplings.df_dy.diagonal().array() -= 2.0 * d;
    jac.couplings.df_di = Eigen::MatrixXd::Random(d, di);
    jac.couplings.dg_dy = Eigen::MatrixXd::Random(di, d);
  } else {
    for (Index i = 0; i < d; ++i) {
      for (Index j = jac.couplings.df_dy_band.row_begin(i); j < jac.couplings.df_dy_band.row_end(i); ++j) {
        jac.couplings.df_dy_band(i, j) = uniform(-1.0, 1.0) - (i == j ? 5.0 : 0.0);
        jac.couplings.dg_dy_band(i, j) = uniform(-1.0, 1.0);
      }
    }
    jac.couplings.df_di_diag = random_vector(d);
  }
  return jac;
}

inline Eigen::VectorXd random_mass(Index d, Index total) {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(total);
  for (Index i = 0; i < d; ++i) m(i) = uniform(0.0, 1.0) < 0.3 ? 0.0 : 1.0;
  return m;
}

template <typename Scalar>
Vector<Scalar> random_rhs(Index n) {
  Vector<Scalar> a(n);
  for (Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<Scalar, double>) {
      a(i) = uniform(-1.0, 1.0);
    } else {
      a(i) = Scalar(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    }
  }
  return a;
}

template <typename Scalar>
Scalar random_shift() {
  if constexpr (std::is_same_v<Scalar, double>) {
    return log_uniform(1e-2, 1e3);
  } else {
    return Scalar(log_uniform(1e-2, 1e3), uniform(-50.0, 50.0));
  }
}

}  // namespace fode::test
