// Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
// exits nonzero if any selected criterion fails.
//
//   fode_acceptance            run all
//   fode_acceptance --only 7   run one

#include "fode/bench_problems.hpp"
#include "fode/radau.hpp"
#include "fode/soe_kernel.hpp"
#include "fode/structlinalg.hpp"
#include "support.hpp"

#include <chrono>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>

using namespace fode;
using Complex = std::complex<double>;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Run {
  SolveReport report;
  AugmentedSystem sys;
  double error = 0.0;
};

Run solve(const Benchmark& b, double tol, double eps, LinalgMode mode, std::vector<double> outputs = {}) {
  Run r;
  r.sys = augment(b.problem, eps, b.problem.t_end);
  IntegratorConfig cfg;
  cfg.rtol = cfg.atol = tol;
  if (outputs.empty()) outputs = {b.problem.t_end};
  r.report = integrate(r.sys, cfg, mode, outputs);
  if (r.report.ok()) {
    const auto e = b.spec.error(r.report.t_samples.back(), r.report.y_samples.back());
    if (e) r.error = *e;
  }
  return r;
}

double max_rel_deviation(const SolveReport& a, const SolveReport& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.y_samples.size(); ++k) {
    num = std::max(num, (a.y_samples[k] - b.y_samples[k]).cwiseAbs().maxCoeff());
    den = std::max(den, b.y_samples[k].cwiseAbs().maxCoeff());
  }
  return num / den;
}

void time_limit(Verdict& v, Clock::time_point t0, double limit) {
  const double elapsed = seconds_since(t0);
  v.detail << "; runtime " << elapsed << " s";
  v.require(elapsed < limit, "runtime below " + std::to_string(static_cast<int>(limit)) + " s");
}

// 1. Kernel parameters for T = 1000.
Verdict criterion1() {
  const auto t0 = Clock::now();
  Verdict v;
  struct Cell {
    double alpha, eps, h;
    int m, n;
  };
  const Cell cells[] = {
      {0.1, 1e-5, 0.65, -31, 148},   {0.2, 1e-5, 0.66, -33, 93},    {0.3, 1e-5, 0.67, -36, 62},
      {0.4, 1e-5, 0.69, -39, 47},    {0.5, 1e-5, 0.70, -44, 37},    {0.6, 1e-5, 0.72, -51, 31},
      {0.7, 1e-5, 0.73, -63, 26},    {0.8, 1e-5, 0.75, -87, 23},    {0.9, 1e-5, 0.78, -159, 20},
      {0.1, 1e-10, 0.37, -91, 649},  {0.2, 1e-10, 0.37, -99, 326},  {0.3, 1e-10, 0.38, -109, 218},
      {0.4, 1e-10, 0.38, -122, 163}, {0.5, 1e-10, 0.39, -141, 131}, {0.6, 1e-10, 0.39, -169, 109},
      {0.7, 1e-10, 0.40, -215, 93},  {0.8, 1e-10, 0.40, -308, 81},  {0.9, 1e-10, 0.41, -586, 71},
  };
  int matched = 0;
  std::ostringstream misses;
  for (const Cell& c : cells) {
    const KernelParams p = choose_parameters(c.alpha, c.eps, 1000.0);
    const bool ok = std::abs(p.h - c.h) <= 0.01 && std::abs(p.m_lo - c.m) <= 1 && std::abs(p.n_hi - c.n) <= 1;
    if (ok) {
      ++matched;
    } else {
      misses << "; mismatch at alpha=" << c.alpha << " eps=" << c.eps << " (h " << p.h << ", M " << p.m_lo
               << ", N " << p.n_hi << ")";
    }
  }
  v.detail << matched << "/18 cells match" << misses.str();
  v.require(matched == 18, "all cells");
  time_limit(v, t0, 1.0);
  return v;
}

// 2. Sampled relative kernel error for random parameters.
Verdict criterion2() {
  const auto t0 = Clock::now();
  Verdict v;
  double worst_ratio = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double alpha = test::uniform(0.1, 0.9);
    const double eps = test::log_uniform(1e-10, 1e-4);
    const double t_end = test::log_uniform(1.0, 1e4);
    const SumOfExponentials soe = build_soe(choose_parameters(alpha, eps, t_end));
    worst_ratio = std::max(worst_ratio, verify_soe(soe, 1000) / eps);
  }
  v.detail << "worst sampled error / eps = " << worst_ratio;
  v.require(worst_ratio <= 3.0, "error <= 3 eps");
  time_limit(v, t0, 10.0);
  return v;
}

// 3. Example 1, alpha = 1/2, Tol = 1e-7, varying eps.
Verdict criterion3() {
  const auto t0 = Clock::now();
  Verdict v;
  const Benchmark b = example1(0.5);
  const double eps_tracked[] = {1e-4, 1e-5, 1e-6};
  const double printed[] = {6.35e-5, 6.36e-6, 5.77e-7};
  for (int k = 0; k < 3; ++k) {
    const Run r = solve(b, 1e-7, eps_tracked[k], LinalgMode::dense_head);
    v.detail << (k ? ", " : "") << "eps=" << eps_tracked[k] << ": " << r.error;
    v.require(r.report.ok(), "solve succeeds");
    v.require(r.error <= 10.0 * printed[k] && r.error >= printed[k] / 10.0, "within factor 10 of printed error");
  }
  for (double eps : {1e-7, 1e-8, 1e-9, 1e-10}) {
    const Run r = solve(b, 1e-7, eps, LinalgMode::dense_head);
    v.detail << ", eps=" << eps << ": " << r.error;
    v.require(r.report.ok(), "solve succeeds");
    v.require(r.error <= 5e-6, "plateau below 5e-6");
  }
  time_limit(v, t0, 5.0);
  return v;
}

// 4. Structured solve against full dense LU.
Verdict criterion4() {
  const auto t0 = Clock::now();
  Verdict v;
  double worst = 0.0;
  auto run_instances = [&](auto scalar_tag) {
    using Scalar = decltype(scalar_tag);
    for (int trial = 0; trial < 100; ++trial) {
      const Index d = test::uniform_int(1, 5);
      std::vector<int> chains(static_cast<std::size_t>(test::uniform_int(1, 3)));
      for (int& c : chains) c = test::uniform_int(1, 3);
      const StructuredJacobian jac = test::random_jacobian(d, HeadLayout::dense, {}, chains, test::uniform_int(1, 6));
      const Eigen::VectorXd mass = test::random_mass(d, jac.total_dim());
      const Scalar s = test::random_shift<Scalar>();
      const Matrix<Scalar> dense = materialize_dense<Scalar>(jac, mass, s);
      const Vector<Scalar> a = test::random_rhs<Scalar>(jac.total_dim());
      const Vector<Scalar> ref = dense.partialPivLu().solve(a);
      const Vector<Scalar> u = StructuredFactorization<Scalar>(jac, mass, s, LinalgMode::dense_head).solve(a);
      worst = std::max(worst, test::rel_diff(u, ref));
    }
  };
  run_instances(0.0);
  run_instances(Complex());
  v.detail << "worst random-instance deviation " << worst;
  v.require(worst <= 1e-10, "random instances within 1e-10");

  const Benchmark b = example1(0.5);
  const std::vector<double> outputs = uniform_outputs(1.0, 20);
  const Run dense = solve(b, 1e-7, 1e-7, LinalgMode::full_dense, outputs);
  const Run fast = solve(b, 1e-7, 1e-7, LinalgMode::dense_head, outputs);
  const double dev = max_rel_deviation(fast.report, dense.report);
  v.detail << "; example 1 trajectory deviation " << dev;
  v.require(dense.report.ok() && fast.report.ok(), "both solves succeed");
  v.require(dev <= 1e-10, "trajectories within 1e-10");
  time_limit(v, t0, 5.0);
  return v;
}

// 5. Structured vs dense speed on Example 1 at Tol = eps = 1e-9.
Verdict criterion5() {
  const auto t0 = Clock::now();
  Verdict v;
  const Benchmark b = example1(0.5);
  double dense_time = 1e300, fast_time = 1e300;
  Run dense, fast;
  for (int rep = 0; rep < 3; ++rep) {
    dense = solve(b, 1e-9, 1e-9, LinalgMode::full_dense);
    fast = solve(b, 1e-9, 1e-9, LinalgMode::dense_head);
    dense_time = std::min(dense_time, dense.report.wall_time);
    fast_time = std::min(fast_time, fast.report.wall_time);
  }
  const double speedup = dense_time / fast_time;
  v.detail << "dense " << dense_time << " s, structured " << fast_time << " s, speedup " << speedup
           << ", augmented dimension " << fast.sys.total_dim;
  v.require(dense.report.ok() && fast.report.ok(), "both solves succeed");
  v.require(speedup >= 5.0, "speedup >= 5");
  time_limit(v, t0, 30.0);
  return v;
}

// 6. Brusselator against the reference values at T = 220.
Verdict criterion6() {
  const auto t0 = Clock::now();
  Verdict v;
  const Benchmark b = brusselator();
  double prev = 1e300;
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    const Run r = solve(b, eps, eps, LinalgMode::dense_head);
    v.detail << (eps == 1e-4 ? "" : ", ") << "Tol=eps=" << eps << ": " << r.error;
    v.require(r.report.ok(), "solve succeeds");
    v.require(r.error < prev, "error decreases with eps");
    if (eps == 1e-6) v.require(r.error <= 5e-4, "error at 1e-6 below 5e-4");
    prev = r.error;
  }
  time_limit(v, t0, 60.0);
  return v;
}

// 7. Multi-term DAE on [0, 5000].
Verdict criterion7() {
  const auto t0 = Clock::now();
  Verdict v;
  const Benchmark stable = multiterm(0.5);
  const Run r = solve(stable, 1e-5, 1e-5, LinalgMode::dense_head);
  v.detail << "alpha=0.5: error " << r.error << ", " << r.report.naccpt << " accepted steps";
  v.require(r.report.ok(), "alpha=0.5 solve succeeds");
  v.require(r.error <= 1e-4, "alpha=0.5 error below 1e-4");
  const Run u = solve(multiterm(0.655), 1e-5, 1e-5, LinalgMode::dense_head);
  v.detail << "; alpha=0.655: max|y| " << u.report.max_abs_y << " (" << to_string(u.report.status) << ")";
  v.require(u.report.max_abs_y > 100.0, "alpha=0.655 max|y| above 100");
  time_limit(v, t0, 60.0);
  return v;
}

// 8. Integral and integro-differential formulations for alpha > 1.
Verdict criterion8() {
  const auto t0 = Clock::now();
  Verdict v;
  for (double alpha : {1.1, 1.5, 1.9}) {
    for (Formulation f : {Formulation::volt1, Formulation::volt2}) {
      const Run r = solve(example1(alpha, f), 1e-6, 1e-6, LinalgMode::dense_head);
      v.detail << (alpha == 1.1 && f == Formulation::volt1 ? "" : ", ") << "alpha=" << alpha << " " << to_string(f)
               << ": " << r.error;
      v.require(r.report.ok(), "solve succeeds");
      v.require(r.error <= 1e-4, "error below 1e-4");
    }
  }
  time_limit(v, t0, 30.0);
  return v;
}

// 9. Fractional heat equation, banded mode.
Verdict criterion9() {
  const auto t0 = Clock::now();
  Verdict v;
  double time100 = 0.0, time1000 = 0.0;
  for (Index d : {100, 300, 1000}) {
    const Benchmark b = pde1d(1.0 / 3.0, 5.0 / 3.0, d);
    const int repeats = d == 300 ? 1 : 5;
    double best = 1e300;
    Run r;
    for (int k = 0; k < repeats; ++k) {
      r = solve(b, 1e-6, 1e-6, LinalgMode::banded_head);
      best = std::min(best, r.report.wall_time);
    }
    v.detail << (d == 100 ? "" : "; ") << "d=" << d << ": error " << r.error << ", " << r.report.naccpt
             << " steps, " << best << " s";
    v.require(r.report.ok(), "solve succeeds");
    v.require(r.error <= 1e-5, "error below 1e-5");
    if (d == 100) time100 = best;
    if (d == 1000) time1000 = best;
  }
  const double ratio = time1000 / time100;
  v.detail << "; time ratio " << ratio;
  v.require(ratio <= 15.0, "time ratio at most 15");
  time_limit(v, t0, 120.0);
  return v;
}

// 10. Reaction-diffusion with truncated and exact banded Jacobians.
Verdict criterion10() {
  const auto t0 = Clock::now();
  Verdict v;
  const Index d = 1000;
  const Benchmark tri = reaction_diffusion(0.5, d, GridOrdering::by_species);
  const Benchmark hepta = reaction_diffusion(0.5, d, GridOrdering::by_gridpoint);
  const Run a = solve(tri, 1e-5, 1e-5, LinalgMode::banded_head);
  const Run b = solve(hepta, 1e-5, 1e-5, LinalgMode::banded_head);
  v.detail << "3-diagonal: nstep " << a.report.nstep << ", nfcn " << a.report.nfcn << ", njac " << a.report.njac
           << "; 7-diagonal: nstep " << b.report.nstep << ", nfcn " << b.report.nfcn << ", njac " << b.report.njac;
  v.require(a.report.ok() && b.report.ok(), "both solves succeed");
  v.require(a.report.nstep >= 14.5 && a.report.nstep <= 43.5, "3-diagonal steps within 50% of 29");
  v.require(b.report.nstep >= 14 && b.report.nstep <= 42, "7-diagonal steps within 50% of 28");
  v.require(b.report.njac < a.report.njac, "7-diagonal uses fewer Jacobians");
  if (a.report.ok() && b.report.ok()) {
    // Map the species-major state onto the gridpoint-major one.
    const Eigen::VectorXd& ya = a.report.y_samples.back();
    const Eigen::VectorXd& yb = b.report.y_samples.back();
    double diff = 0.0;
    for (Index i = 0; i < d; ++i) {
      for (Index s = 0; s < 3; ++s) diff = std::max(diff, std::abs(ya(s * d + i) - yb(3 * i + s)));
    }
    const double rel = diff / yb.cwiseAbs().maxCoeff();
    v.detail << "; solutions differ by " << rel;
    v.require(rel <= 1e-4, "solutions agree within 1e-4");
  }
  time_limit(v, t0, 120.0);
  return v;
}

// 11. Order five and stiffness independence.
Verdict criterion11() {
  const auto t0 = Clock::now();
  Verdict v;
  auto scalar = [](double t_end, std::function<double(double, double)> f, double dfdy) {
    FractionalIVP p = test::plain_problem(
        Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), t_end,
        [f](double t, const Eigen::VectorXd& y, Eigen::Ref<Eigen::VectorXd> out) { out(0) = f(t, y(0)); },
        [dfdy](double, const Eigen::VectorXd&, Eigen::Ref<Eigen::MatrixXd> out) { out(0, 0) = dfdy; });
    return augment(p, 1e-6, t_end);
  };

  const AugmentedSystem smooth = scalar(2.0, [](double t, double y) { return -y + std::sin(t); }, -1.0);
  const double exact = 1.5 * std::exp(-2.0) + 0.5 * (std::sin(2.0) - std::cos(2.0));
  IntegratorConfig fixed;
  fixed.rtol = fixed.atol = 1e-14;
  fixed.newton_tol = 1e-12;
  std::vector<double> lh, le;
  for (int n : {4, 8, 16, 32, 64}) {
    fixed.fixed_step = 2.0 / n;
    const SolveReport r = integrate(smooth, fixed, LinalgMode::dense_head, std::vector<double>{2.0});
    lh.push_back(std::log(fixed.fixed_step));
    le.push_back(std::log(std::abs(r.y_samples[0](0) - exact)));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lh.size(); ++k) {
    mx += lh[k] / lh.size();
    my += le[k] / lh.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lh.size(); ++k) {
    sxy += (lh[k] - mx) * (le[k] - my);
    sxx += (lh[k] - mx) * (lh[k] - mx);
  }
  const double slope = sxy / sxx;
  v.detail << "fixed-step slope " << slope;
  v.require(std::abs(slope - 5.0) <= 0.3, "slope 5.0 +- 0.3");

  IntegratorConfig adaptive;
  adaptive.rtol = adaptive.atol = 1e-6;
  std::vector<long> steps;
  for (double lambda : {-1e4, -1e6, -1e8}) {
    const AugmentedSystem stiff =
        scalar(1.0, [lambda](double t, double y) { return lambda * (y - std::cos(t)) - std::sin(t); }, lambda);
    const SolveReport r = integrate(stiff, adaptive, LinalgMode::dense_head, std::vector<double>{1.0});
    v.require(r.ok(), "stiff solve succeeds");
    v.require(std::abs(r.y_samples[0](0) - std::cos(1.0)) <= 1e-6, "stiff solution matches cos 1");
    steps.push_back(r.nstep);
  }
  v.detail << "; stiff steps for lambda=-1e4,-1e6,-1e8: " << steps[0] << ", " << steps[1] << ", " << steps[2];
  v.require(steps[1] <= 50, "at most 50 steps for lambda=-1e6");
  v.require(std::abs(steps[0] - steps[1]) <= 2 && std::abs(steps[2] - steps[1]) <= 2,
            "step count independent of lambda");
  time_limit(v, t0, 5.0);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--only") == 0 && k + 1 < argc) {
      only = std::atoi(argv[++k]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  const std::function<Verdict()> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                               criterion5, criterion6, criterion7, criterion8,
                                               criterion9, criterion10, criterion11};
  if (only < 0 || only > 11) {
    std::fprintf(stderr, "criterion must be 1..11\n");
    return 2;
  }
  bool all = true;
  for (int k = 1; k <= 11; ++k) {
    if (only != 0 && k != only) continue;
    Verdict v;
    try {
      v = criteria[k - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    std::printf("criterion %2d: %s  %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
