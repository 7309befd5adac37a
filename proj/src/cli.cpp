#include "homog/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "homog/error.hpp"
#include "homog/maximal.hpp"
#include "homog/path_io.hpp"
#include "homog/report.hpp"
#include "homog/sobolev.hpp"
#include "homog/weights.hpp"

namespace homog {

namespace fs = std::filesystem;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"weights",  "sobolev",    "corrector", "diffusivity",
                                              "simulate", "invariance", "full-report"};
  return names;
}

namespace {

fs::path make_output_dir(const fs::path& base, const std::string& command, bool force) {
  fs::path dir = base;
  if (!force) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream stamp;
    stamp << command << '-' << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    dir = base / stamp.str();
    for (int i = 2; fs::exists(dir); ++i) dir = base / (stamp.str() + "-" + std::to_string(i));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.directory", "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("output.directory", "cannot write " + file.string());
}

void write_field(const fs::path& file, const ScalarField& f) {
  std::ofstream out(file);
  write_field_csv(out, f);
}

struct Context {
  const ExperimentConfig& cfg;
  TorusGrid grid;
  ScalarField potential;
  fs::path dir;
  std::ostream& out;
};

ScalarField plain_weight(const Context& c) {
  const ScalarField m = maximal_function(exp_field(c.potential, +1), c.cfg.maximal);
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / m[i];
  return ScalarField(c.grid, std::move(w), FieldKind::weight);
}

void print_matrix(std::ostream& out, const char* name, const Matrix3& m, int d) {
  out << "  " << name << " = [";
  for (int i = 0; i < d; ++i) {
    out << (i ? "; " : "");
    for (int j = 0; j < d; ++j) out << (j ? " " : "") << std::setprecision(8) << m[i][j];
  }
  out << "]\n";
}

Json weights_part(Context& c, std::optional<WeightReport>& keep) {
  keep.emplace(weight_from_potential(c.potential, c.cfg.maximal, c.cfg.weights));
  const WeightReport& r = *keep;
  if (c.cfg.output.csv) {
    write_field(c.dir / "potential.csv", c.potential);
    write_field(c.dir / "weight.csv", r.weight);
  }
  c.out << "weights: upper bound " << std::setprecision(8) << r.upper_bound;
  for (const auto& [p, v] : r.ap_constants) c.out << ", A_" << p << " " << v;
  if (r.aps_constant) c.out << ", A_{2,s,1/d} " << *r.aps_constant << " (bound " << *r.aps_bound << ")";
  c.out << '\n';
  return to_json(r);
}

Json sobolev_part(Context& c, const ScalarField& w) {
  const double r_star = c.cfg.r_star.value_or(default_r_star(c.grid.dim()));
  const InequalityReport rep = verify_sobolev(c.potential, w, r_star, c.cfg.sobolev_family);
  const double r = c.cfg.classical_r > 0.0 ? c.cfg.classical_r : 0.5 * c.grid.dim() + 1.0;
  const ClassicalSobolev cl = classical_sobolev_constant(c.cfg.potential, c.grid, r);
  c.out << "sobolev: r* " << r_star << ", max ratio " << std::setprecision(8) << rep.max_ratio << ", poincare "
        << rep.poincare_max_ratio << ", classical factor "
        << (cl.applicable ? std::to_string(cl.factor) : "n/a (" + cl.reason + ")") << '\n';
  Json j = to_json(rep);
  j["classical"] = to_json(cl);
  j["classical"]["r"] = r;
  return j;
}

struct Solved {
  CorrectorSolution sol;
  DiffusivityMatrix sigma;
};

Solved solve(Context& c, const ScalarField& w) {
  const WeightedOperator op = assemble_operator(c.potential);
  Solved s{solve_correctors(op, c.cfg.solver), {}};
  s.sigma = effective_diffusivity(s.sol, c.potential, w);
  s.sigma.preset = to_string(c.cfg.potential.preset);
  if (c.cfg.output.csv) {
    for (std::size_t i = 0; i < s.sol.components.size(); ++i) {
      write_field(c.dir / ("corrector_" + std::to_string(i + 1) + ".csv"), s.sol.components[i]);
    }
  }
  c.out << "diffusivity (n = " << c.grid.cells_per_side() << "):\n";
  print_matrix(c.out, "sigma_bar", s.sigma.sigma_bar, c.grid.dim());
  c.out << "  k = " << s.sigma.k_constant << ", CG iterations";
  for (int it : s.sol.iterations) c.out << ' ' << it;
  c.out << '\n';
  return s;
}

Json refinement_part(Context& c) {
  const RefinementTable t = refinement_study(c.cfg.potential, c.cfg.dim, c.cfg.n_list, c.cfg.solver);
  c.out << "refinement:\n";
  for (const auto& r : t.rows) {
    c.out << "  n = " << std::setw(6) << r.n << "  sigma_11 = " << std::setprecision(10) << r.sigma_bar[0][0] << '\n';
  }
  c.out << "  extrapolated sigma_11 = " << t.extrapolated[0][0] << '\n';
  return to_json(t);
}

void print_mc(std::ostream& out, const McReport& r) {
  for (const auto& s : r.scales) {
    out << "  eps " << s.epsilon << ": var " << std::setprecision(6) << s.covariance[0][0] << " (rel err "
        << s.covariance_relerr << "), KS p " << (s.gaussianity.empty() ? NAN : s.gaussianity[0].p_value)
        << ", sup median " << s.sup_quantiles[1] << '\n';
  }
  if (r.k_check) {
    out << "  k: " << r.k_check->k_estimate.mean << " +- " << r.k_check->k_estimate.se << " vs "
        << r.k_check->k_reference << '\n';
  }
  if (r.bracket) out << "  bracket rel err " << r.bracket->relerr << " +- " << r.bracket->relerr_se << '\n';
  for (const auto& e : r.excursions) {
    out << "  excursion eta " << e.eta << ": P " << e.probability << " <= bound " << e.bound << '\n';
  }
  if (r.density) out << "  density sup " << r.density->sup_fine << " / " << r.density->sup_coarse << '\n';
}

}  // namespace

McReport monte_carlo_report(const ExperimentConfig& cfg, const PathModel& model, const DiffusivityMatrix& sigma,
                            const CorrectorSolution& sol) {
  McReport r;
  r.dim = model.grid().dim();
  r.dt = cfg.sim.dt;
  r.dt_guard = model.dt_guard();
  r.sigma_bar_reference = sigma;
  if (cfg.sim.dt > r.dt_guard) {
    std::ostringstream w;
    w << "dt " << cfg.sim.dt << " exceeds the step guard h^2/2 min e^V = " << r.dt_guard;
    r.warnings.push_back(w.str());
  }
  r.scales = invariance_check(model, sigma, cfg.invariance.epsilons, cfg.sim, cfg.invariance.tolerances);
  r.sup_median_decreasing = sup_median_decreasing(r.scales);

  SimConfig k_cfg = cfg.sim;
  k_cfg.num_paths = cfg.checks.k_paths;
  k_cfg.T = cfg.checks.k_T;
  r.k_check = time_change_constant(model, k_cfg);

  SimConfig b_cfg = cfg.sim;
  b_cfg.num_paths = cfg.checks.bracket_paths;
  b_cfg.T = cfg.checks.bracket_T;
  b_cfg.dt = cfg.checks.bracket_dt;
  r.bracket = bracket_check(model, b_cfg);

  SimConfig e_cfg = cfg.sim;
  e_cfg.num_paths = cfg.checks.excursion_paths;
  const ScalarField& f = sol.components.front();
  r.excursions = excursion_bound_check(model, f, cfg.checks.excursion_epsilon, cfg.checks.excursion_etas, e_cfg);

  SimConfig d_cfg = cfg.sim;
  d_cfg.num_paths = cfg.checks.density_paths;
  d_cfg.start = StartLaw::reversible;
  try {
    r.density = density_bound_check(model, cfg.checks.density_t, cfg.checks.density_bins, d_cfg);
  } catch (const std::invalid_argument& e) {
    r.warnings.push_back(std::string("density check skipped: ") + e.what());
  }
  return r;
}

std::vector<std::string> failed_checks(const McReport& r) {
  std::vector<std::string> out;
  for (const auto& s : r.scales) {
    if (!s.covariance_ok) out.push_back("covariance at eps " + std::to_string(s.epsilon));
    if (!s.gaussian_ok) out.push_back("gaussianity at eps " + std::to_string(s.epsilon));
  }
  if (r.scales.size() >= 2 && !r.sup_median_decreasing) out.push_back("corrector sup median not decreasing");
  if (r.k_check && std::abs(r.k_check->z_score) > 3.0) out.push_back("time-change constant");
  if (r.bracket) {
    if (std::abs(r.bracket->relerr) > 3.0 * r.bracket->relerr_se) out.push_back("bracket identity");
    for (const auto& e : r.bracket->mean_increment) {
      if (std::abs(e.mean) > 3.0 * e.se) out.push_back("martingale mean increment");
    }
  }
  for (const auto& e : r.excursions) {
    if (e.violated) out.push_back("excursion bound at eta " + std::to_string(e.eta));
  }
  return out;
}

int validate(const fs::path& config, std::ostream& out) {
  const auto diags = validate_config(config);
  int errors = 0;
  for (const auto& d : diags) {
    const bool err = d.severity == Diagnostic::Severity::error;
    errors += err ? 1 : 0;
    out << (err ? "error: " : "warning: ") << d.key << ": " << d.message << '\n';
  }
  if (diags.empty()) out << "ok\n";
  return errors ? kExitConfig : kExitOk;
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), options.command) == names.end()) {
      throw ConfigError("command", "unknown command '" + options.command + "'");
    }
    ExperimentConfig cfg = load_config(options.config);
    if (options.output) cfg.output.directory = *options.output;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string& cmd = options.command;
    const TorusGrid grid(cfg.dim, cfg.n);
    Context c{cfg, grid, sample_potential(cfg.potential, grid), make_output_dir(cfg.output.directory, cmd, options.force),
              out};
    write_text(c.dir / "manifest.json", dump(manifest(cfg, cmd)));

    Json report;
    report["schema_version"] = kReportSchemaVersion;
    report["command"] = cmd;
    std::vector<std::string> failures;
    const bool full = cmd == "full-report";
    std::optional<WeightReport> wrep;

    if (cmd == "weights" || cmd == "sobolev" || full) report["weights"] = weights_part(c, wrep);
    if (cmd == "sobolev" || full) report["sobolev"] = sobolev_part(c, wrep->weight);
    if (cmd == "corrector" || cmd == "diffusivity" || cmd == "simulate" || cmd == "invariance" || full) {
      const ScalarField w = wrep ? wrep->weight : plain_weight(c);
      const Solved s = solve(c, w);
      report["diffusivity"] = to_json(s.sigma);
      if (cmd == "corrector") report["iterations"] = s.sol.iterations;
      if ((cmd == "diffusivity" || full) && !cfg.n_list.empty()) report["refinement"] = refinement_part(c);
      if (cmd == "simulate") {
        const PathModel model(cfg.potential, grid, w, &s.sol);
        PathEnsemble paths = simulate_paths(model, cfg.sim);
        paths = time_change(std::move(paths), w, c.potential);
        paths = corrector_martingale(std::move(paths), s.sol, w, c.potential);
        if (cfg.output.paths_format == "binary") {
          std::ofstream f(c.dir / "paths.bin", std::ios::binary);
          write_paths_binary(f, paths);
        } else if (cfg.output.paths_format == "csv") {
          std::ofstream f(c.dir / "paths.csv");
          write_paths_csv(f, paths);
        }
        double roundtrip = 0.0;
        std::vector<double> ratio;
        for (const auto& p : paths.paths) {
          roundtrip = std::max(roundtrip, clock_round_trip_error(p));
          if (p.times.back() > 0.0) ratio.push_back(p.clock.back() / p.times.back());
        }
        const Estimate k = mean_se(ratio);
        report["simulation"] = {{"num_paths", paths.paths.size()},
                                {"samples_per_path", paths.paths.empty() ? 0 : paths.paths.front().times.size()},
                                {"clock_rate", {{"mean", k.mean}, {"se", k.se}}},
                                {"clock_round_trip_error", roundtrip},
                                {"dt_guard", model.dt_guard()}};
        out << "simulate: " << paths.paths.size() << " paths, A_T/T = " << k.mean << " +- " << k.se << '\n';
      }
      if (cmd == "invariance" || full) {
        const PathModel model(cfg.potential, grid, w, &s.sol);
        const McReport mc = monte_carlo_report(cfg, model, s.sigma, s.sol);
        out << "monte carlo:\n";
        print_mc(out, mc);
        report["mc_report"] = to_json(mc);
        failures = failed_checks(mc);
        if (cmd == "invariance") write_text(c.dir / "mc_report.json", dump(to_json(mc)));
      }
    }
    const std::string file = (full ? std::string("full_report") : cmd) + ".json";
    write_text(c.dir / file, dump(report));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << "wrote " << (c.dir / file).string() << " (" << std::fixed << std::setprecision(2) << secs << " s)\n"
        << std::defaultfloat;
    if (!failures.empty()) {
      for (const auto& f : failures) err << "check failed: " << f << '\n';
      if (options.strict) return kExitStatistics;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "solver error: solver.max_iterations / solver.tolerance: " << e.what() << " (residual " << e.achieved_residual() << " after " << e.iterations()
        << " iterations)\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace homog
