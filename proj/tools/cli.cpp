#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fode::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + value + "'");
  }
  if (used != value.size()) throw ConfigError(key + ": not a number: '" + value + "'");
  return v;
}

long parse_int(const std::string& key, const std::string& value) {
  const double v = parse_real(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError(key + ": not an integer: '" + value + "'");
  return static_cast<long>(v);
}

bool is_builtin(const std::string& name) {
  const auto names = benchmark_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* metric_name(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::relative_first: return "relative_first";
    case ErrorMetric::absolute_first: return "absolute_first";
    case ErrorMetric::relative_max: return "relative_max";
    case ErrorMetric::euclid_relative: return "euclid_relative";
  }
  return "unknown";
}

const char* linalg_name(LinalgMode m) {
  switch (m) {
    case LinalgMode::full_dense: return "dense";
    case LinalgMode::dense_head: return "structured";
    case LinalgMode::banded_head: return "banded";
  }
  return "unknown";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"problem", "tol",      "eps",       "t_end", "grid_d",
                                                "linalg",  "formulation", "outputs", "out_csv", "out_stats",
                                                "alpha",   "beta",     "ordering", "max_steps"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") cfg.problem = value;
  else if (key == "tol") cfg.tol = parse_real(key, value);
  else if (key == "eps") cfg.eps = parse_real(key, value);
  else if (key == "t_end") cfg.t_end = parse_real(key, value);
  else if (key == "grid_d") cfg.grid_d = parse_int(key, value);
  else if (key == "linalg") cfg.linalg = value;
  else if (key == "formulation") cfg.formulation = value;
  else if (key == "outputs") cfg.outputs = static_cast<int>(parse_int(key, value));
  else if (key == "out_csv") cfg.out_csv = value;
  else if (key == "out_stats") cfg.out_stats = value;
  else if (key == "alpha") cfg.alpha = parse_real(key, value);
  else if (key == "beta") cfg.beta = parse_real(key, value);
  else if (key == "ordering") cfg.ordering = value;
  else if (key == "max_steps") cfg.max_steps = parse_int(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (out.count(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

void validate(const RunConfig& cfg) {
  if (!is_builtin(cfg.problem)) throw ConfigError("unknown problem '" + cfg.problem + "' (see 'fode list')");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw ConfigError("tol must lie in (0,1)");
  if (!(cfg.eps_value() > 0.0 && cfg.eps_value() < 1.0)) throw ConfigError("eps must lie in (0,1)");
  if (cfg.outputs < 1) throw ConfigError("outputs must be at least 1");
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (cfg.t_end && !(*cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (cfg.grid_d && *cfg.grid_d < 2) throw ConfigError("grid_d must be at least 2");
  if (cfg.linalg != "auto" && cfg.linalg != "dense" && cfg.linalg != "structured" && cfg.linalg != "banded") {
    throw ConfigError("linalg must be auto, dense, structured or banded");
  }
  try {
    formulation_from_string(cfg.formulation);
    if (cfg.ordering) ordering_from_string(*cfg.ordering);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::map<std::string, double> benchmark_params(const RunConfig& cfg) {
  std::map<std::string, double> p;
  if (cfg.alpha) p["alpha"] = *cfg.alpha;
  if (cfg.beta) p["beta"] = *cfg.beta;
  if (cfg.grid_d) p["d"] = static_cast<double>(*cfg.grid_d);
  if (cfg.ordering) p["ordering"] = static_cast<double>(ordering_from_string(*cfg.ordering));
  p["formulation"] = static_cast<double>(formulation_from_string(cfg.formulation));
  return p;
}

Benchmark build_problem(const RunConfig& cfg) {
  validate(cfg);
  Benchmark b;
  try {
    b = make_benchmark(cfg.problem, benchmark_params(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.t_end) b.problem.t_end = *cfg.t_end;
  return b;
}

LinalgMode resolve_linalg(const std::string& name, const FractionalIVP& p) {
  if (name == "auto") return p.layout == HeadLayout::banded ? LinalgMode::banded_head : LinalgMode::dense_head;
  const LinalgMode m = linalg_mode_from_string(name);
  if (m == LinalgMode::banded_head && p.layout != HeadLayout::banded) {
    throw ConfigError("linalg=banded needs a problem with banded structure");
  }
  return m;
}

SolveResult run_solve(const RunConfig& cfg) {
  Benchmark b = build_problem(cfg);
  const LinalgMode mode = resolve_linalg(cfg.linalg, b.problem);
  return run_solve(cfg, mode);
}

SolveResult run_solve(const RunConfig& cfg, LinalgMode mode) {
  SolveResult r;
  r.bench = build_problem(cfg);
  r.mode = mode;
  try {
    r.sys = augment(r.bench.problem, cfg.eps_value(), r.bench.problem.t_end);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (mode == LinalgMode::full_dense && r.sys.total_dim > kDenseCap) {
    throw ConfigError("linalg=dense needs total dimension <= " + std::to_string(kDenseCap) + ", got " +
                      std::to_string(r.sys.total_dim));
  }
  IntegratorConfig ic;
  ic.rtol = ic.atol = cfg.tol;
  ic.max_steps = cfg.max_steps;
  const std::vector<double> outputs = uniform_outputs(r.sys.t_end, cfg.outputs);
  r.report = integrate(r.sys, ic, mode, outputs);
  if (r.report.ok() && !r.report.t_samples.empty()) {
    r.error = r.bench.spec.error(r.report.t_samples.back(), r.report.y_samples.back());
  }
  return r;
}

void write_csv(std::ostream& os, const SolveResult& r) {
  const Index d = r.bench.problem.dim;
  const bool with_err = static_cast<bool>(r.bench.spec.exact_solution);
  std::string line = "t";
  for (Index i = 0; i < d; ++i) line += ",y_" + std::to_string(i + 1);
  if (with_err) line += ",err";
  os << line << '\n';
  for (std::size_t k = 0; k < r.report.t_samples.size(); ++k) {
    const double t = r.report.t_samples[k];
    const Eigen::VectorXd& y = r.report.y_samples[k];
    line = format_real(t);
    for (Index i = 0; i < d; ++i) line += "," + format_real(y(i));
    if (with_err) {
      const auto e = r.bench.spec.error(t, y);
      line += "," + (e ? format_real(*e) : std::string());
    }
    os << line << '\n';
  }
}

nlohmann::json kernel_json(const SumOfExponentials& soe) {
  const KernelParams& p = soe.params;
  return {{"alpha", soe.alpha}, {"eps", p.eps},   {"t_end", p.t_end},   {"delta", p.delta},
          {"h", p.h},           {"M", p.m_lo},    {"N", p.n_hi},        {"terms", soe.size()},
          {"split", soe.alpha > 1.0}};
}

nlohmann::json stats_json(const RunConfig& cfg, const SolveResult& r) {
  using nlohmann::json;
  const SolveReport& rep = r.report;
  json kernels = json::array();
  for (const auto& [alpha, soe] : r.sys.kernels) kernels.push_back(kernel_json(soe));
  json error = nullptr;
  if (r.error) {
    error = {{"t", rep.t_samples.back()}, {"value", *r.error}, {"metric", metric_name(r.bench.spec.metric)}};
  }
  return {
      {"problem", {{"name", r.bench.spec.name}, {"description", r.bench.spec.description},
                   {"parameters", r.bench.spec.parameters}}},
      {"config", {{"tol", cfg.tol}, {"eps", cfg.eps_value()}, {"t_end", r.sys.t_end},
                  {"linalg", linalg_name(r.mode)}, {"formulation", cfg.formulation}, {"outputs", cfg.outputs}}},
      {"dimensions", {{"problem", r.sys.dim()}, {"integrals", r.sys.num_blocks()}, {"augmented", r.sys.total_dim}}},
      {"kernels", kernels},
      {"status", to_string(rep.status)},
      {"message", rep.message},
      {"t_final", rep.t_final},
      {"counters", {{"nstep", rep.nstep}, {"naccpt", rep.naccpt}, {"nrejct", rep.nrejct}, {"nfcn", rep.nfcn},
                    {"njac", rep.njac}, {"ndec", rep.ndec}, {"nsol", rep.nsol},
                    {"newton_iterations", rep.newton_iterations}}},
      {"max_abs_y", rep.max_abs_y},
      {"wall_time", rep.wall_time},
      {"error", error},
  };
}

int cmd_kernel(const KernelOptions& opt, std::ostream& out, std::ostream& err) {
  SumOfExponentials soe;
  try {
    soe = build_soe(choose_parameters(opt.alpha, opt.eps, opt.t_end));
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  const KernelParams& p = soe.params;
  const double max_err = verify_soe(soe, 1000);
  out << "alpha " << format_real(p.alpha) << "  eps " << format_real(p.eps) << "  T " << format_real(p.t_end)
      << '\n'
      << "delta " << format_real(p.delta) << '\n'
      << "h " << format_real(p.h) << '\n'
      << "M " << p.m_lo << '\n'
      << "N " << p.n_hi << '\n'
      << "terms " << soe.size() << '\n'
      << "max relative error on [delta, T] " << format_real(max_err) << '\n';
  if (!opt.out.empty()) {
    std::ostringstream os;
    write_soe(os, soe);
    try {
      write_file(opt.out, os.str());
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
  }
  return kOk;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SolveResult r;
  try {
    r = run_solve(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    if (!cfg.out_csv.empty()) {
      std::ostringstream os;
      write_csv(os, r);
      write_file(cfg.out_csv, os.str());
    }
    if (!cfg.out_stats.empty()) write_file(cfg.out_stats, stats_json(cfg, r).dump(2) + "\n");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  const SolveReport& rep = r.report;
  out << r.bench.spec.name << ": " << to_string(rep.status) << " at t=" << format_real(rep.t_final) << '\n'
      << "steps " << rep.nstep << " (accepted " << rep.naccpt << ", rejected " << rep.nrejct << "), f evals "
      << rep.nfcn << ", jacobians " << rep.njac << ", decompositions " << rep.ndec << '\n'
      << "linalg " << linalg_name(r.mode) << ", augmented dimension " << r.sys.total_dim << ", wall time "
      << rep.wall_time << " s\n";
  if (r.error) out << "error " << format_real(*r.error) << " (" << metric_name(r.bench.spec.metric) << ")\n";
  if (!rep.ok()) {
    err << "error: integration failed: " << rep.message << '\n';
    return kSolveFailed;
  }
  return kOk;
}

ProblemJacobian finite_difference_jacobian(const FractionalIVP& p, double t, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& integrals) {
  const Index d = p.dim;
  const Index ni = p.num_integrals();
  Eigen::MatrixXd df_dy(d, d), df_di(d, ni), dg_dy(ni, d);
  Eigen::VectorXd fp(d), fm(d), gp(ni), gm(ni);
  auto step = [](double x) { return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x)); };
  for (Index k = 0; k < d; ++k) {
    Eigen::VectorXd yp = y, ym = y;
    const double hk = step(y(k));
    yp(k) += hk;
    ym(k) -= hk;
    p.f(t, yp, integrals, fp);
    p.f(t, ym, integrals, fm);
    df_dy.col(k) = (fp - fm) / (yp(k) - ym(k));
    if (ni > 0) {
      p.g(t, yp, gp);
      p.g(t, ym, gm);
      dg_dy.col(k) = (gp - gm) / (yp(k) - ym(k));
    }
  }
  for (Index j = 0; j < ni; ++j) {
    Eigen::VectorXd ip = integrals, im = integrals;
    const double hj = step(integrals(j));
    ip(j) += hj;
    im(j) -= hj;
    p.f(t, y, ip, fp);
    p.f(t, y, im, fm);
    df_di.col(j) = (fp - fm) / (ip(j) - im(j));
  }

  ProblemJacobian out = p.jacobian_storage();
  if (p.layout == HeadLayout::dense) {
    out.df_dy = df_dy;
    out.df_di = df_di;
    out.dg_dy = dg_dy;
    return out;
  }
  for (Index i = 0; i < d; ++i) {
    for (Index c = out.df_dy_band.row_begin(i); c < out.df_dy_band.row_end(i); ++c) out.df_dy_band(i, c) = df_dy(i, c);
  }
  if (ni > 0) {
    out.df_di_diag = df_di.diagonal();
    for (Index i = 0; i < ni; ++i) {
      for (Index c = out.dg_dy_band.row_begin(i); c < out.dg_dy_band.row_end(i); ++c) out.dg_dy_band(i, c) = dg_dy(i, c);
    }
  }
  return out;
}

double trajectory_difference(const SolveReport& a, const SolveReport& b) {
  if (a.t_samples != b.t_samples) return std::numeric_limits<double>::infinity();
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < a.y_samples.size(); ++k) {
    diff = std::max(diff, (a.y_samples[k] - b.y_samples[k]).cwiseAbs().maxCoeff());
    scale = std::max(scale, b.y_samples[k].cwiseAbs().maxCoeff());
  }
  return scale > 0.0 ? diff / scale : diff;
}

namespace {

// Best of `repeats` runs, by wall time.
SolveResult timed(const RunConfig& cfg, LinalgMode mode, int repeats) {
  SolveResult best = run_solve(cfg, mode);
  for (int k = 1; k < repeats; ++k) {
    SolveResult r = run_solve(cfg, mode);
    if (r.report.wall_time < best.report.wall_time) best = std::move(r);
  }
  return best;
}

std::string describe(const SolveResult& r) {
  std::ostringstream os;
  os << "steps " << r.report.nstep << "  time " << r.report.wall_time << " s";
  if (r.error) os << "  error " << *r.error;
  if (!r.report.ok()) os << "  [" << to_string(r.report.status) << "]";
  return os.str();
}

}  // namespace

int cmd_bench(const RunConfig& cfg, const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.repeats < 1) {
    err << "error: repeats must be at least 1\n";
    return kUsage;
  }
  try {
    if (opt.scale_to) {
      RunConfig small = cfg;
      const Benchmark probe = build_problem(cfg);
      if (!probe.spec.parameters.count("d")) throw ConfigError("--scale-to needs a problem with a grid size");
      const auto d0 = static_cast<Index>(probe.spec.parameters.at("d"));
      RunConfig large = cfg;
      large.grid_d = *opt.scale_to;
      const LinalgMode mode = resolve_linalg(cfg.linalg, probe.problem);
      const SolveResult a = timed(small, mode, opt.repeats);
      const SolveResult b = timed(large, mode, opt.repeats);
      const double ratio = b.report.wall_time / a.report.wall_time;
      out << "linalg " << linalg_name(mode) << '\n'
          << "d=" << d0 << "  " << describe(a) << '\n'
          << "d=" << *opt.scale_to << "  " << describe(b) << '\n'
          << "time ratio " << ratio << " for size ratio " << static_cast<double>(*opt.scale_to) / d0 << '\n';
      if (!a.report.ok() || !b.report.ok()) return kSolveFailed;
      if (opt.max_ratio && !(ratio <= *opt.max_ratio)) {
        err << "error: time ratio " << ratio << " exceeds " << *opt.max_ratio << '\n';
        return kCheckFailed;
      }
      return kOk;
    }

    const Benchmark probe = build_problem(cfg);
    std::vector<LinalgMode> modes = {LinalgMode::full_dense, LinalgMode::dense_head};
    if (probe.problem.layout == HeadLayout::banded) modes.push_back(LinalgMode::banded_head);
    std::vector<SolveResult> runs;
    for (LinalgMode m : modes) {
      runs.push_back(timed(cfg, m, opt.repeats));
      out << linalg_name(m) << "  " << describe(runs.back()) << '\n';
    }
    int code = kOk;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (!runs[k].report.ok()) code = kSolveFailed;
    }
    if (code != kOk) return code;
    for (std::size_t k = 1; k < runs.size(); ++k) {
      const double diff = trajectory_difference(runs[k].report, runs[0].report);
      const double speedup = runs[0].report.wall_time / runs[k].report.wall_time;
      out << linalg_name(modes[k]) << " vs dense: speedup " << speedup << ", max relative deviation " << diff
          << '\n';
      if (!(diff <= opt.agreement)) {
        err << "error: " << linalg_name(modes[k]) << " deviates from dense by " << diff << " > " << opt.agreement
            << '\n';
        code = kCheckFailed;
      }
      if (opt.min_speedup && k == 1 && !(speedup >= *opt.min_speedup)) {
        err << "error: speedup " << speedup << " below " << *opt.min_speedup << '\n';
        code = kCheckFailed;
      }
    }
    return code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int cmd_list(bool as_json, std::ostream& out) {
  using nlohmann::json;
  json all = json::array();
  for (const std::string& name : benchmark_names()) {
    std::map<std::string, double> params;
    if (name == "reaction_diffusion") params["d"] = 10;  // the descriptor does not depend on d
    const Benchmark b = make_benchmark(name, params);
    const BenchmarkSpec& s = b.spec;
    json ref = nullptr;
    if (s.reference) ref = {{"t", s.reference->t}, {"values", std::vector<double>(s.reference->values.begin(), s.reference->values.end())}};
    if (!as_json) {
      out << name << "  " << s.description << '\n';
      continue;
    }
    json params_out = s.parameters;
    if (name == "reaction_diffusion") params_out["d"] = 1000;
    all.push_back({{"name", name},
                   {"description", s.description},
                   {"parameters", params_out},
                   {"exact_solution", static_cast<bool>(s.exact_solution)},
                   {"reference", ref},
                   {"metric", metric_name(s.metric)},
                   {"layout", b.problem.layout == HeadLayout::banded ? "banded" : "dense"}});
  }
  if (as_json) out << all.dump(2) << '\n';
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional ODE solver: sum-of-exponentials kernels and Radau IIA"};
  app.require_subcommand(1);

  KernelOptions kopt;
  CLI::App* kernel = app.add_subcommand("kernel", "build a sum-of-exponentials table for t^(alpha-1)/Gamma(alpha)");
  kernel->add_option("--alpha", kopt.alpha, "kernel order in (0,1)")->required();
  kernel->add_option("--eps", kopt.eps, "relative accuracy")->required();
  kernel->add_option("--t_end", kopt.t_end, "right end T")->required();
  kernel->add_option("--out", kopt.out, "coefficient file");

  std::map<std::string, std::string> raw;
  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--problem", raw["problem"], "built-in problem name or config file");
    sub->add_option("--tol", raw["tol"], "rtol = atol");
    sub->add_option("--eps", raw["eps"], "kernel accuracy (default tol)");
    sub->add_option("--t_end", raw["t_end"], "final time");
    sub->add_option("--grid_d", raw["grid_d"], "grid points (pde1d, reaction_diffusion)");
    sub->add_option("--linalg", raw["linalg"], "auto | dense | structured | banded");
    sub->add_option("--formulation", raw["formulation"], "volt1 | volt2 | auto");
    sub->add_option("--outputs", raw["outputs"], "number of equally spaced output points");
    sub->add_option("--out_csv", raw["out_csv"], "solution CSV");
    sub->add_option("--out_stats", raw["out_stats"], "statistics JSON");
    sub->add_option("--alpha", raw["alpha"], "fractional order");
    sub->add_option("--beta", raw["beta"], "pde1d solution exponent");
    sub->add_option("--ordering", raw["ordering"], "reaction_diffusion: by_species | by_gridpoint");
    sub->add_option("--max_steps", raw["max_steps"], "step limit of the integrator");
  };
  CLI::App* solve = app.add_subcommand("solve", "integrate a problem, write CSV and stats JSON");
  add_run_options(solve);

  BenchOptions bopt;
  long scale_to = 0;
  double min_speedup = 0.0, max_ratio = 0.0;
  CLI::App* bench = app.add_subcommand("bench", "compare linear algebra modes or grid sizes");
  add_run_options(bench);
  bench->add_option("--repeats", bopt.repeats, "runs per configuration, best time kept");
  bench->add_option("--scale-to", scale_to, "compare grid_d with this grid size");
  bench->add_option("--min-speedup", min_speedup, "fail if structured/dense speedup is lower");
  bench->add_option("--max-ratio", max_ratio, "fail if the scaling time ratio is higher");
  bench->add_option("--agreement", bopt.agreement, "allowed relative trajectory deviation");

  bool as_json = false;
  CLI::App* list = app.add_subcommand("list", "list built-in problems");
  list->add_flag("--json", as_json, "machine-readable descriptors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  if (kernel->parsed()) return cmd_kernel(kopt, out, err);
  if (list->parsed()) return cmd_list(as_json, out);

  CLI::App* sub = solve->parsed() ? solve : bench;
  RunConfig cfg;
  try {
    std::map<std::string, std::string> given;
    for (const auto& [key, value] : raw) {
      if (sub->count("--" + key) > 0) given[key] = value;
    }
    if (given.count("problem") && !is_builtin(given["problem"]) && std::filesystem::is_regular_file(given["problem"])) {
      const auto file = read_config_file(given["problem"]);
      if (file.count("problem") && !is_builtin(file.at("problem"))) {
        throw ConfigError("config file must name a built-in problem");
      }
      given.erase("problem");
      for (const auto& [key, value] : file) apply_setting(cfg, key, value);
    }
    for (const auto& [key, value] : given) apply_setting(cfg, key, value);
    validate(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  if (solve->parsed()) return cmd_solve(cfg, out, err);
  if (bench->count("--scale-to")) bopt.scale_to = scale_to;
  if (bench->count("--min-speedup")) bopt.min_speedup = min_speedup;
  if (bench->count("--max-ratio")) bopt.max_ratio = max_ratio;
  return cmd_bench(cfg, bopt, out, err);
}

}  // namespace fode::cli
