#include "fode/soe_kernel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace fode;

namespace {

struct Cell {
  double alpha, eps, h;
  int m, n;
};

// Kernel parameters for T = 1000.
const Cell kTable[] = {
    {0.1, 1e-5, 0.65, -31, 148},   {0.2, 1e-5, 0.66, -33, 93},    {0.3, 1e-5, 0.67, -36, 62},
    {0.4, 1e-5, 0.69, -39, 47},    {0.5, 1e-5, 0.70, -44, 37},    {0.6, 1e-5, 0.72, -51, 31},
    {0.7, 1e-5, 0.73, -63, 26},    {0.8, 1e-5, 0.75, -87, 23},    {0.9, 1e-5, 0.78, -159, 20},
    {0.1, 1e-10, 0.37, -91, 649},  {0.2, 1e-10, 0.37, -99, 326},  {0.3, 1e-10, 0.38, -109, 218},
    {0.4, 1e-10, 0.38, -122, 163}, {0.5, 1e-10, 0.39, -141, 131}, {0.6, 1e-10, 0.39, -169, 109},
    {0.7, 1e-10, 0.40, -215, 93},  {0.8, 1e-10, 0.40, -308, 81},  {0.9, 1e-10, 0.41, -586, 71},
};

}  // namespace

TEST_SUITE("soe_kernel") {
  TEST_CASE("parameters for T = 1000 across alpha and eps") {
    for (const Cell& c : kTable) {
      CAPTURE(c.alpha);
      CAPTURE(c.eps);
      const KernelParams p = choose_parameters(c.alpha, c.eps, 1000.0);
      CHECK(std::abs(p.h - c.h) <= 0.01);
      CHECK(std::abs(p.m_lo - c.m) <= 1);
      CHECK(std::abs(p.n_hi - c.n) <= 1);
    }
  }

  TEST_CASE("parameters for alpha = 1/2, T = 1") {
    struct Row {
      double eps, h, delta;
      int m, n;
    };
    const Row rows[] = {{1e-4, 0.839, 7.85e-9, -23, 25},    {1e-5, 0.697, 7.85e-11, -34, 37},
                        {1e-6, 0.596, 7.85e-13, -47, 52},   {1e-7, 0.522, 7.85e-15, -63, 68},
                        {1e-8, 0.464, 7.85e-17, -80, 87},   {1e-9, 0.418, 7.85e-19, -100, 108},
                        {1e-10, 0.380, 7.85e-21, -122, 131}};
    // The 1e-8 row prints h = 0.469, but its N = 87 needs h <= ln(x^*/delta)/86 = 0.4647.
    {
      const double x_hi = -std::log(std::tgamma(0.5) * 1e-8);
      const double delta = std::pow(std::tgamma(1.5) * 1e-8, 2.0);
      CHECK(std::log(x_hi / delta) / 86.0 < 0.469);
    }
    for (const Row& r : rows) {
      CAPTURE(r.eps);
      const KernelParams p = choose_parameters(0.5, r.eps, 1.0);
      CHECK(p.h == doctest::Approx(r.h).epsilon(2e-3));
      CHECK(p.delta == doctest::Approx(r.delta).epsilon(1e-3));
      CHECK(p.m_lo == r.m);
      CHECK(p.n_hi == r.n);
    }
  }

  TEST_CASE("delta formula") {
    const KernelParams p = choose_parameters(0.3, 1e-6, 10.0);
    CHECK(p.delta == doctest::Approx(std::pow(std::tgamma(1.3) * 1e-6, 1.0 / 0.3)).epsilon(1e-14));
    // Gamma(2) = 1, so delta tends to eps as alpha tends to 1.
    double prev = 0.0;
    for (double alpha : {0.9, 0.95, 0.97}) {
      const double ratio = choose_parameters(alpha, 1e-6, 10.0).delta / 1e-6;
      CHECK(ratio > prev);
      CHECK(ratio < 1.0);
      prev = ratio;
    }
  }

  TEST_CASE("M and N are the outward roundings") {
    for (const Cell& c : kTable) {
      const KernelParams p = choose_parameters(c.alpha, c.eps, 1000.0);
      const double x_lo = std::pow(std::tgamma(2.0 - c.alpha) * c.eps, 1.0 / (1.0 - c.alpha));
      const double x_hi = -std::log(std::tgamma(1.0 - c.alpha) * c.eps);
      CHECK(1000.0 * std::exp(p.m_lo * p.h) <= x_lo);
      CHECK(1000.0 * std::exp((p.m_lo + 1) * p.h) > x_lo);
      CHECK(p.delta * std::exp(p.n_hi * p.h) >= x_hi);
      CHECK(p.delta * std::exp((p.n_hi - 1) * p.h) < x_hi);
    }
  }

  TEST_CASE("index range is widened when a neglected tail exceeds eps") {
    const double alpha = 0.218234, eps = 6.30915e-05, t_end = 3301.78;
    const KernelParams p = choose_parameters(alpha, eps, t_end);
    const double x_hi = -std::log(std::tgamma(1.0 - alpha) * eps);
    const int n_rule = static_cast<int>(std::ceil(std::log(x_hi / p.delta) / p.h));
    CHECK(p.n_hi == n_rule + 1);
    // Direct sum of the first neglected nodes at t = delta.
    double tail = 0.0;
    for (int i = p.n_hi; i < p.n_hi + 50; ++i) {
      tail += p.h * std::sin(std::numbers::pi * alpha) / std::numbers::pi *
              std::exp((1.0 - alpha) * i * p.h - std::exp(i * p.h) * p.delta);
    }
    CHECK(tail <= eps * std::pow(p.delta, alpha - 1.0) / std::tgamma(alpha));
    CHECK(verify_soe(build_soe(p), 1000) <= 3.0 * eps);
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_WITH_AS(choose_parameters(1.5, 1e-5, 1000.0),
                         "alpha must lie in (0,1); use the solver's split for alpha>1", std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(0.0, 1e-5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(1.0, 1e-5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(0.5, 1.0, 1.0), std::invalid_argument);
    // Gamma(0.02) * 0.5 > 1
    CHECK_THROWS_AS(choose_parameters(0.98, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(0.1, 0.9, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_parameters(0.5, 1e-5, 1e-12), std::invalid_argument);
  }

  TEST_CASE("build_soe terms") {
    const KernelParams p = choose_parameters(0.5, 1e-5, 1000.0);
    const SumOfExponentials soe = build_soe(p);
    REQUIRE(soe.size() == 81);
    CHECK((soe.weights.array() > 0.0).all());
    CHECK((soe.exponents.array() > 0.0).all());
    for (Index k = 1; k < soe.size(); ++k) CHECK(soe.exponents(k) > soe.exponents(k - 1));
    const Index zero = -p.m_lo;
    CHECK(soe.exponents(zero) == 1.0);
    CHECK(soe.weights(zero) == doctest::Approx(p.h * std::sin(std::numbers::pi * 0.5) / std::numbers::pi));
    CHECK(soe.valid_from == p.delta);
    CHECK(soe.valid_to == 1000.0);
  }

  TEST_CASE("eval_soe") {
    SumOfExponentials one;
    one.weights = Eigen::VectorXd::Ones(1);
    one.exponents = Eigen::VectorXd::Ones(1);
    CHECK(eval_soe(one, 0.0) == 1.0);

    const SumOfExponentials soe = build_soe(choose_parameters(0.5, 1e-5, 1000.0));
    const double k1 = 1.0 / std::sqrt(std::numbers::pi);
    CHECK(std::abs(eval_soe(soe, 1.0) - k1) / k1 <= 3e-5);
    CHECK(eval_soe(soe, 1000.0) >= 0.0);
  }

  TEST_CASE("sampled relative error stays below 3 eps") {
    for (double alpha : {0.5, 0.1}) {
      const SumOfExponentials soe = build_soe(choose_parameters(alpha, 1e-5, 1000.0));
      // Independent sampling against the kernel from std::tgamma.
      double worst = 0.0;
      for (int k = 0; k < 1000; ++k) {
        const double t = std::exp(std::log(soe.valid_from) + (std::log(1000.0) - std::log(soe.valid_from)) * k / 999);
        const double exact = std::pow(t, alpha - 1.0) / std::tgamma(alpha);
        double approx = 0.0;
        for (Index i = 0; i < soe.size(); ++i) approx += soe.weights(i) * std::exp(-soe.exponents(i) * t);
        worst = std::max(worst, std::abs(approx - exact) / exact);
      }
      CHECK(worst <= 3e-5);
      CHECK(verify_soe(soe, 1000) == doctest::Approx(worst).epsilon(1e-6));
      CHECK(verify_soe(soe, 2) <= 3e-5);
    }
    CHECK_THROWS_AS(verify_soe(build_soe(choose_parameters(0.5, 1e-5, 1.0)), 1), std::invalid_argument);
  }

  TEST_CASE("certificate on random parameters") {
    for (int trial = 0; trial < 50; ++trial) {
      const double alpha = test::uniform(0.1, 0.9);
      const double eps = test::log_uniform(1e-10, 1e-4);
      const double t_end = test::log_uniform(1.0, 1e4);
      CAPTURE(alpha);
      CAPTURE(eps);
      CAPTURE(t_end);
      const SumOfExponentials soe = build_soe(choose_parameters(alpha, eps, t_end));
      CHECK(verify_soe(soe, 1000) <= 3.0 * eps);
      CHECK((soe.weights.array() > 0.0).all());
      CHECK((soe.exponents.tail(soe.size() - 1).array() > soe.exponents.head(soe.size() - 1).array()).all());
    }
  }

  TEST_CASE("integrated kernel error") {
    for (int trial = 0; trial < 10; ++trial) {
      const double alpha = test::uniform(0.1, 0.9);
      const double eps = test::log_uniform(1e-10, 1e-4);
      const double t_end = test::log_uniform(1.0, 1e4);
      const SumOfExponentials soe = build_soe(choose_parameters(alpha, eps, t_end));
      CHECK(integrated_kernel_error(soe, t_end, 4000) <= 3.0 * eps * std::pow(t_end, alpha) / std::tgamma(alpha + 1.0));
    }
  }

  TEST_CASE("split parameters use the fractional factor") {
    const KernelParams p = choose_split_parameters(1.3, 1e-6, 1.0);
    CHECK(p.alpha == doctest::Approx(0.3));
    CHECK(p.delta == doctest::Approx(std::pow(std::tgamma(2.3) * 1e-6, 1.0 / 1.3)).epsilon(1e-12));
    CHECK_THROWS_AS(choose_split_parameters(2.0, 1e-6, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_split_parameters(0.5, 1e-6, 1.0), std::invalid_argument);
  }

  TEST_CASE("perturbation bound for alpha = 1/2") {
    CHECK(perturbation_bound_half(1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(perturbation_bound_half(0.3, 2.5, 0.0) == doctest::Approx(2.5).epsilon(1e-14));

    // u = l J^(1/2) u + m (1 + sqrt t) expanded as a Neumann series:
    // J^(1/2) t^b = Gamma(b+1)/Gamma(b+3/2) t^(b+1/2).
    auto series = [](double l, double m, double t) {
      double acc = 0.0;
      for (int k = 0; k < 400; ++k) {
        const double lk = std::pow(l, k);
        acc += lk * (std::pow(t, 0.5 * k) / std::tgamma(1.0 + 0.5 * k) +
                     std::tgamma(1.5) * std::pow(t, 0.5 * (k + 1)) / std::tgamma(1.5 + 0.5 * k));
      }
      return m * acc;
    };
    for (double t : {0.1, 1.0, 3.0}) {
      CHECK(perturbation_bound_half(1.0, 1.0, t) == doctest::Approx(series(1.0, 1.0, t)).epsilon(1e-10));
      CHECK(perturbation_bound_half(0.7, 2.0, t) == doctest::Approx(series(0.7, 2.0, t)).epsilon(1e-10));
    }

    // Product-rectangle quadrature of the Volterra equation on 10^4 points.
    const int n = 10000;
    const double t_end = 1.0;
    const double h = t_end / n;
    std::vector<double> u(n + 1);
    const double c = 2.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i <= n; ++i) {
      const double ti = i * h;
      double acc = 0.0;
      for (int k = 0; k < i; ++k) acc += u[k] * (std::sqrt(ti - k * h) - std::sqrt(ti - (k + 1) * h));
      u[i] = c * acc + 1.0 + std::sqrt(ti);
    }
    CHECK(std::abs(perturbation_bound_half(1.0, 1.0, 1.0) - u[n]) / u[n] <= 1e-3);

    double prev = 0.0;
    for (double t = 0.0; t <= 5.0; t += 0.25) {
      const double v = perturbation_bound_half(1.0, 1.0, t);
      CHECK(v > prev);
      prev = v;
    }
    CHECK_THROWS_AS(perturbation_bound_half(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(perturbation_bound_half(1.0, -1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("export format round trip") {
    const SumOfExponentials soe = build_soe(choose_parameters(0.5, 1e-5, 1000.0));
    std::stringstream ss;
    write_soe(ss, soe);
    std::string hash;
    double alpha, eps, t_end, delta, h;
    int m, n;
    ss >> hash >> alpha >> eps >> t_end >> delta >> h >> m >> n;
    CHECK(hash == "#");
    CHECK(alpha == soe.alpha);
    CHECK(eps == soe.params.eps);
    CHECK(t_end == 1000.0);
    CHECK(delta == soe.params.delta);
    CHECK(h == soe.params.h);
    CHECK(m == -44);
    CHECK(n == 37);
    int lines = 0;
    int index;
    double c, g;
    while (ss >> index >> c >> g) {
      CHECK(index == m + lines);
      CHECK(c == soe.weights(lines));
      CHECK(g == soe.exponents(lines));
      ++lines;
    }
    CHECK(lines == 81);
  }
}
