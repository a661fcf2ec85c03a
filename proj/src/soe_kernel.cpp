#include "fode/soe_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fode {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxTerms = 1000000;

void require_order(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1); use the solver's split for alpha>1");
  }
}

void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0,1)");
  }
}

// Shared core: alpha is the order of the exponential factor, delta is given.
KernelParams parameters_with_delta(double alpha, double eps, double t_end, double delta,
                                   double delta_order) {
  const double gamma_1ma_eps = std::tgamma(1.0 - alpha) * eps;
  if (gamma_1ma_eps >= 1.0) {
    throw std::invalid_argument("eps too large for alpha: Gamma(1-alpha)*eps >= 1");
  }
  if (!(t_end > delta)) {
    throw std::invalid_argument("t_end must exceed delta = " + std::to_string(delta));
  }

  double a = 0.5 * kPi * (1.0 - (1.0 - alpha) / ((2.0 - alpha) * std::log(1.0 / eps)));
  if (!(a > 0.0)) {
    throw std::invalid_argument("eps too large for alpha: the quadrature step formula breaks down");
  }
  a = std::clamp(a, 1e-8, 0.5 * kPi - 1e-8);
  const double h = 2.0 * kPi * a / std::log1p(2.0 / eps * std::pow(std::cos(a), alpha - 1.0));

  const double x_lo = std::pow(std::tgamma(2.0 - alpha) * eps, 1.0 / (1.0 - alpha));
  const double x_hi = -std::log(gamma_1ma_eps);

  KernelParams p;
  p.alpha = alpha;
  p.eps = eps;
  p.t_end = t_end;
  p.delta = delta;
  p.delta_order = delta_order;
  p.h = h;
  double m_lo = std::floor(std::log(x_lo / t_end) / h);
  double n_hi = std::max(std::ceil(std::log(x_hi / delta) / h), m_lo + 1.0);

  // The asymptotic thresholds can leave a neglected tail above eps relative to the
  // kernel; widen the index range until each tail is within budget.
  const double scale = h * std::sin(kPi * alpha) / kPi;
  auto node = [&](double i, double t) { return scale * std::exp((1.0 - alpha) * i * h - std::exp(i * h) * t); };
  auto upper_tail = [&](double n) {
    double acc = 0.0;
    for (double i = n;; ++i) {
      const double term = node(i, delta);
      acc += term;
      if (term <= 1e-17 * acc || i > n + 100.0) return acc;
    }
  };
  auto lower_tail = [&](double m) {
    double acc = 0.0;
    for (double i = m - 1.0;; --i) {
      const double term = node(i, t_end);
      acc += term;
      if (term <= 1e-17 * acc || i < m - 1e5) return acc;
    }
  };
  const double budget_hi = eps * fractional_kernel(alpha, delta);
  const double budget_lo = eps * fractional_kernel(alpha, t_end);
  while (upper_tail(n_hi) > budget_hi && n_hi - m_lo < kMaxTerms) ++n_hi;
  while (lower_tail(m_lo) > budget_lo && n_hi - m_lo < kMaxTerms) --m_lo;
  if (!(n_hi - m_lo <= kMaxTerms)) {
    throw std::invalid_argument("sum of exponentials would need more than " + std::to_string(kMaxTerms) +
                                " terms");
  }
  p.m_lo = static_cast<int>(m_lo);
  p.n_hi = static_cast<int>(n_hi);
  return p;
}

}  // namespace

double fractional_kernel(double alpha, double t) {
  return std::exp((alpha - 1.0) * std::log(t) - std::lgamma(alpha));
}

KernelParams choose_parameters(double alpha, double eps, double t_end) {
  require_order(alpha);
  require_eps(eps);
  const double delta = std::pow(std::tgamma(alpha + 1.0) * eps, 1.0 / alpha);
  return parameters_with_delta(alpha, eps, t_end, delta, alpha);
}

KernelParams choose_split_parameters(double order, double eps, double t_end) {
  if (!(order > 1.0) || order == std::floor(order)) {
    throw std::invalid_argument("split kernel order must be a non-integer > 1");
  }
  require_eps(eps);
  const double alpha0 = order - std::ceil(order) + 1.0;
  const double delta = std::exp((std::lgamma(order + 1.0) + std::log(eps)) / order);
  return parameters_with_delta(alpha0, eps, t_end, delta, order);
}

SumOfExponentials build_soe(const KernelParams& params) {
  require_order(params.alpha);
  const int n = params.size();
  SumOfExponentials soe;
  soe.alpha = params.alpha;
  soe.weights.resize(n);
  soe.exponents.resize(n);
  const double scale = params.h * std::sin(kPi * params.alpha) / kPi;
  for (int k = 0; k < n; ++k) {
    const double s = (params.m_lo + k) * params.h;
    soe.weights(k) = scale * std::exp((1.0 - params.alpha) * s);
    soe.exponents(k) = std::exp(s);
  }
  soe.valid_from = params.delta;
  soe.valid_to = params.t_end;
  soe.eps = params.eps;
  soe.params = params;
  return soe;
}

double eval_soe(const SumOfExponentials& soe, double t) {
  return (soe.weights.array() * (-soe.exponents.array() * t).exp()).sum();
}

double verify_soe(const SumOfExponentials& soe, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("verify_soe: need at least 2 samples");
  const double lo = std::log(soe.valid_from);
  const double hi = std::log(soe.valid_to);
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double t = std::exp(lo + (hi - lo) * k / (n_samples - 1));
    const double exact = fractional_kernel(soe.alpha, t);
    worst = std::max(worst, std::abs(exact - eval_soe(soe, t)) / exact);
  }
  return worst;
}

double integrated_kernel_error(const SumOfExponentials& soe, double t, int n_samples) {
  if (n_samples < 2) throw std::invalid_argument("integrated_kernel_error: need at least 2 samples");
  const double lo = std::log(soe.valid_from);
  const double hi = std::log(t);
  const double ds = (hi - lo) / (n_samples - 1);
  // Substituting s = e^u turns the integral into one of |k - soe|(e^u) e^u du.
  double acc = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double s = std::exp(lo + ds * k);
    const double v = std::abs(fractional_kernel(soe.alpha, s) - eval_soe(soe, s)) * s;
    acc += (k == 0 || k == n_samples - 1) ? 0.5 * v : v;
  }
  return acc * ds;
}

double perturbation_bound_half(double l_f, double m_f, double t) {
  if (!(l_f > 0.0) || !(m_f > 0.0)) {
    throw std::invalid_argument("perturbation_bound_half: l_f and m_f must be positive");
  }
  if (t < 0.0) throw std::invalid_argument("perturbation_bound_half: t must be non-negative");
  const double sqrt_pi = std::sqrt(kPi);
  const double growth = std::exp(l_f * l_f * t) * (1.0 + std::erf(l_f * std::sqrt(t)));
  return m_f / (2.0 * l_f) * (-sqrt_pi + (2.0 * l_f + sqrt_pi) * growth);
}

void write_soe(std::ostream& os, const SumOfExponentials& soe) {
  const auto& p = soe.params;
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "# " << soe.alpha << ' ' << p.eps << ' ' << p.t_end << ' ' << p.delta << ' ' << p.h << ' '
     << p.m_lo << ' ' << p.n_hi << '\n';
  for (Eigen::Index k = 0; k < soe.size(); ++k) {
    os << (p.m_lo + k) << ' ' << soe.weights(k) << ' ' << soe.exponents(k) << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace fode
