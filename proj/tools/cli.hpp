#pragma once

#include "fode/bench_problems.hpp"
#include "fode/radau.hpp"
#include "fode/structlinalg.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace fode::cli {

/// Usage or configuration error; reported with exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode { kOk = 0, kUsage = 1, kSolveFailed = 2, kCheckFailed = 3 };

struct RunConfig {
  std::string problem = "example1";
  double tol = 1e-6;
  std::optional<double> eps;  // defaults to tol
  std::optional<double> t_end;
  std::optional<Index> grid_d;
  std::string linalg = "auto";  // auto | dense | structured | banded
  std::string formulation = "auto";
  int outputs = 1;
  std::string out_csv;
  std::string out_stats;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::string> ordering;
  long max_steps = 1000000;

  double eps_value() const { return eps.value_or(tol); }
};

/// Keys accepted by apply_setting and in config files.
const std::vector<std::string>& config_keys();

/// Sets one RunConfig field from text. Unknown keys and malformed values throw ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat "key = value" file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

void validate(const RunConfig& cfg);

std::map<std::string, double> benchmark_params(const RunConfig& cfg);

/// The benchmark with the t_end override applied.
Benchmark build_problem(const RunConfig& cfg);

LinalgMode resolve_linalg(const std::string& name, const FractionalIVP& p);

struct SolveResult {
  Benchmark bench;
  AugmentedSystem sys;
  LinalgMode mode = LinalgMode::dense_head;
  SolveReport report;
  std::optional<double> error;  // at the last sample, when a truth exists there
};

SolveResult run_solve(const RunConfig& cfg);
SolveResult run_solve(const RunConfig& cfg, LinalgMode mode);

void write_csv(std::ostream& os, const SolveResult& r);
nlohmann::json stats_json(const RunConfig& cfg, const SolveResult& r);
nlohmann::json kernel_json(const SumOfExponentials& soe);

struct KernelOptions {
  double alpha = 0.5;
  double eps = 1e-6;
  double t_end = 1.0;
  std::string out;
};

struct BenchOptions {
  int repeats = 1;
  std::optional<Index> scale_to;       // compare grid_d against this size instead of modes
  std::optional<double> min_speedup;   // mode comparison: structured/dense
  std::optional<double> max_ratio;     // scaling: t(scale_to)/t(grid_d)
  double agreement = 1e-10;
};

int cmd_kernel(const KernelOptions& opt, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, const BenchOptions& opt, std::ostream& out, std::ostream& err);
int cmd_list(bool as_json, std::ostream& out);

/// Central finite differences of F and G at (t, y, I), stored in the layout of `p`.
/// Meant for prototyping new problems and for checking analytic Jacobians.
ProblemJacobian finite_difference_jacobian(const FractionalIVP& p, double t, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& integrals);

/// Largest relative deviation between two sampled trajectories.
double trajectory_difference(const SolveReport& a, const SolveReport& b);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fode::cli
