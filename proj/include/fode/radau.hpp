#pragma once

#include "fode/augment.hpp"
#include "fode/structlinalg.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace fode {

/// Settings of the Radau IIA integrator. Defaults follow RADAU5.
struct IntegratorConfig {
  double rtol = 1e-6;
  double atol = 1e-6;
  /// Optional per-component tolerances, of length dim() or total_dim;
  /// auxiliary states use the scalar values when only dim() entries are given.
  Eigen::VectorXd rtol_vec;
  Eigen::VectorXd atol_vec;
  /// Map (rtol, atol) to the internal values 0.1 rtol^(2/3), 0.1 rtol^(2/3) atol/rtol.
  bool transform_tolerances = true;

  double h_init = 0.0;  ///< 0 selects initial_step()
  double h_max = 0.0;   ///< 0 means the whole interval
  long max_steps = 1000000;
  int newton_max_iter = 7;
  double newton_tol = 0.0;  ///< 0 selects max(10 u / rtol, min(0.03, sqrt(rtol)))
  bool jacobian_reuse = true;
  double thet = 1e-3;  ///< contraction rate below which the Jacobian is kept
  double safety = 0.9;
  double fac_min = 0.2;  ///< smallest step ratio h_new / h
  double fac_max = 8.0;  ///< largest step ratio h_new / h
  double keep_step_lo = 1.0;
  double keep_step_hi = 1.2;
  bool gustafsson = true;
  int max_singular = 5;
  int max_newton_failures = 10;

  /// Constant step size; no error control when positive.
  double fixed_step = 0.0;
};

enum class SolveStatus { success, max_steps, newton_failure, step_underflow };

const char* to_string(SolveStatus status);

struct SolveReport {
  std::vector<double> t_samples;
  std::vector<Eigen::VectorXd> y_samples;  ///< the d problem components at t_samples

  long nstep = 0;
  long naccpt = 0;
  long nrejct = 0;
  long nfcn = 0;
  long njac = 0;
  long ndec = 0;  ///< factorization pairs (real and complex)
  long nsol = 0;  ///< real and complex solves counted separately
  long newton_iterations = 0;

  double wall_time = 0.0;
  SolveStatus status = SolveStatus::success;
  std::string message;

  double t_final = 0.0;
  Eigen::VectorXd final_state;     ///< full augmented state at t_final
  std::vector<double> step_sizes;  ///< accepted steps
  double max_abs_y = 0.0;          ///< max |y_i| over accepted steps, problem components only

  bool ok() const { return status == SolveStatus::success; }
};

/// Integrates diag(mass) Y' = F(t, Y) from 0 to sys.t_end.
///
/// `outputs` must be increasing within [0, t_end]; each is evaluated with the
/// collocation polynomial of the step that contains it.
SolveReport integrate(const AugmentedSystem& sys, const IntegratorConfig& cfg, LinalgMode mode,
                      std::span<const double> outputs);

/// First step from the tolerance-scaled RMS norm of the initial derivative
/// over the differential rows; 1e-6 of the interval when that derivative
/// vanishes. Never exceeds h_max.
double initial_step(const AugmentedSystem& sys, const IntegratorConfig& cfg);

/// n equally spaced points ending at t_end (n = 1 gives {t_end}).
std::vector<double> uniform_outputs(double t_end, int n);

}  // namespace fode
