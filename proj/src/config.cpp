#include "homog/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include "homog/error.hpp"

namespace homog {

namespace {

namespace pt = boost::property_tree;

template <class T>
bool parse_scalar(const std::string& raw, T& out) {
  std::istringstream in(boost::algorithm::trim_copy(raw));
  in >> out;
  return !in.fail() && in.eof();
}

bool parse_scalar(const std::string& raw, bool& out) {
  const std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(raw));
  if (v == "true" || v == "yes" || v == "on" || v == "1") {
    out = true;
    return true;
  }
  if (v == "false" || v == "no" || v == "off" || v == "0") {
    out = false;
    return true;
  }
  return false;
}

bool parse_scalar(const std::string& raw, std::string& out) {
  out = boost::algorithm::trim_copy(raw);
  return true;
}

// Reads typed values, recording every problem instead of stopping.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<Diagnostic>& diags) : tree_(tree), diags_(diags) {}

  template <class T>
  void get(const std::string& key, T& target) {
    const auto raw = find(key);
    if (!raw) return;
    T value{};
    if (!parse_scalar(*raw, value)) {
      error(key, "cannot parse '" + *raw + "'");
      return;
    }
    target = value;
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& target) {
    const auto raw = find(key);
    if (!raw) return;
    std::vector<T> out;
    std::vector<std::string> parts;
    const std::string trimmed = boost::algorithm::trim_copy(*raw);
    if (!trimmed.empty()) boost::algorithm::split(parts, trimmed, boost::is_any_of(","));
    for (const auto& p : parts) {
      T value{};
      if (!parse_scalar(p, value)) {
        error(key, "cannot parse list element '" + p + "'");
        return;
      }
      out.push_back(value);
    }
    target = std::move(out);
  }

  void error(const ConfigError& e) {
    // what() carries a "key: " prefix already.
    const char* msg = e.what();
    const std::size_t skip = e.key().size() + 2;
    error(e.key(), std::strlen(msg) > skip ? std::string(msg + skip) : std::string(msg));
  }

  void error(const std::string& key, const std::string& msg) {
    diags_.push_back({Diagnostic::Severity::error, key, msg});
  }

  void report_unknown() {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        error(section, "key outside any section");
        continue;
      }
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) error(full, "unknown key");
      }
    }
  }

 private:
  std::optional<std::string> find(const std::string& key) {
    used_.insert(key);
    const auto node = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    return *node;
  }

  const pt::ptree& tree_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> used_;
};

ExperimentConfig read(const pt::ptree& tree, std::vector<Diagnostic>& diags) {
  ExperimentConfig c;
  Reader r(tree, diags);

  r.get("grid.dim", c.dim);
  r.get("grid.n", c.n);
  r.get_list("grid.n_list", c.n_list);

  std::string preset;
  r.get("potential.preset", preset);
  if (!preset.empty()) {
    try {
      c.potential.preset = parse_preset(preset);
    } catch (const ConfigError& e) {
      r.error(e);
    }
  }
  r.get("potential.amplitude", c.potential.amplitude);
  r.get("potential.frequency", c.potential.frequency);
  r.get("potential.beta", c.potential.beta);
  r.get("potential.smoothing", c.potential.smoothing);
  std::vector<double> center;
  r.get_list("potential.center", center);
  if (center.size() > static_cast<std::size_t>(kMaxDim)) {
    r.error("potential.center", "at most 3 coordinates");
  } else {
    for (std::size_t a = 0; a < center.size(); ++a) c.potential.center[a] = center[a];
  }

  r.get_list("maximal.lengths", c.maximal.lengths);
  r.get("maximal.exhaustive", c.maximal.exhaustive);

  r.get_list("weights.ap_exponents", c.weights.ap_exponents);
  r.get("weights.dyadic", c.weights.sampling.dyadic);
  r.get("weights.random_cubes", c.weights.sampling.random_cubes);
  r.get("weights.seed", c.weights.sampling.seed);
  r.get("weights.exhaustive", c.weights.sampling.exhaustive);
  r.get("weights.coifman_rochberg", c.weights.coifman_rochberg);

  double r_star = 0.0;
  r.get("sobolev.r_star", r_star);
  if (r_star != 0.0) c.r_star = r_star;
  r.get("sobolev.count", c.sobolev_family.count);
  r.get("sobolev.max_frequency", c.sobolev_family.max_frequency);
  r.get("sobolev.min_terms", c.sobolev_family.min_terms);
  r.get("sobolev.max_terms", c.sobolev_family.max_terms);
  r.get("sobolev.seed", c.sobolev_family.seed);
  r.get("sobolev.classical_r", c.classical_r);

  r.get("solver.tolerance", c.solver.tolerance);
  r.get("solver.max_iterations", c.solver.max_iterations);
  r.get("solver.jacobi", c.solver.jacobi);

  r.get("simulation.dt", c.sim.dt);
  r.get("simulation.T", c.sim.T);
  r.get("simulation.epsilon", c.sim.epsilon);
  r.get("simulation.num_paths", c.sim.num_paths);
  r.get("simulation.seed", c.sim.seed);
  r.get("simulation.record_every", c.sim.record_every);
  std::string text;
  r.get("simulation.interpolation", text);
  if (!text.empty()) {
    try {
      c.sim.interpolation = parse_interpolation(text);
    } catch (const ConfigError& e) {
      r.error(e);
    }
  }
  text.clear();
  r.get("simulation.start", text);
  if (!text.empty()) {
    try {
      c.sim.start = parse_start_law(text);
    } catch (const ConfigError& e) {
      r.error(e);
    }
  }
  std::vector<double> x0;
  r.get_list("simulation.x0", x0);
  if (x0.size() > static_cast<std::size_t>(kMaxDim)) {
    r.error("simulation.x0", "at most 3 coordinates");
  } else {
    for (std::size_t a = 0; a < x0.size(); ++a) c.sim.x0[a] = x0[a];
  }

  r.get_list("invariance.epsilons", c.invariance.epsilons);
  r.get("invariance.covariance_tolerance", c.invariance.tolerances.covariance_relative);
  r.get("invariance.ks_alpha", c.invariance.tolerances.ks_alpha);

  r.get("checks.k_paths", c.checks.k_paths);
  r.get("checks.k_T", c.checks.k_T);
  r.get("checks.bracket_paths", c.checks.bracket_paths);
  r.get("checks.bracket_T", c.checks.bracket_T);
  r.get("checks.bracket_dt", c.checks.bracket_dt);
  r.get_list("checks.excursion_etas", c.checks.excursion_etas);
  r.get("checks.excursion_epsilon", c.checks.excursion_epsilon);
  r.get("checks.excursion_paths", c.checks.excursion_paths);
  r.get("checks.density_t", c.checks.density_t);
  r.get("checks.density_bins", c.checks.density_bins);
  r.get("checks.density_paths", c.checks.density_paths);

  std::string dir;
  r.get("output.directory", dir);
  if (!dir.empty()) c.output.directory = dir;
  r.get("output.csv", c.output.csv);
  r.get("output.paths_format", c.output.paths_format);

  r.report_unknown();
  return c;
}

pt::ptree parse_tree(const std::string& text, std::vector<Diagnostic>& diags) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    diags.push_back({Diagnostic::Severity::error, "config", e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  return tree;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config", "cannot open " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void add(std::vector<Diagnostic>& out, const std::string& key, const std::string& msg,
         Diagnostic::Severity sev = Diagnostic::Severity::error) {
  out.push_back({sev, key, msg});
}

}  // namespace

std::vector<Diagnostic> check_config(const ExperimentConfig& c) {
  std::vector<Diagnostic> out;
  if (c.dim < 1 || c.dim > kMaxDim) add(out, "grid.dim", "dim must be 1, 2 or 3");
  if (c.n < 2) add(out, "grid.n", "n must be >= 2");
  for (std::size_t i = 0; i < c.n_list.size(); ++i) {
    if (c.n_list[i] < 2) add(out, "grid.n_list", "every n must be >= 2");
    if (i > 0 && c.n_list[i] <= c.n_list[i - 1]) add(out, "grid.n_list", "n_list must be strictly increasing");
  }
  const int dim = std::clamp(c.dim, 1, kMaxDim);
  for (const auto& [key, msg] : check_potential(c.potential, dim)) add(out, key, msg);
  for (int k : c.maximal.lengths) {
    if (k < 1 || k > c.n) add(out, "maximal.lengths", "length " + std::to_string(k) + " outside 1..n");
  }
  for (double p : c.weights.ap_exponents) {
    if (!(p >= 1.0)) add(out, "weights.ap_exponents", "every exponent must be >= 1");
  }
  if (c.r_star) {
    const auto s = sobolev_exponent_s(dim);
    if (!(*c.r_star > 2.0) || (s && !(*c.r_star < *s))) {
      add(out, "sobolev.r_star", "r_star must lie in (2, s) with s = 2d/(d-1)");
    }
  }
  if (c.sobolev_family.count < 1) add(out, "sobolev.count", "count must be >= 1");
  if (c.sobolev_family.min_terms < 1 || c.sobolev_family.max_terms < c.sobolev_family.min_terms) {
    add(out, "sobolev.max_terms", "need 1 <= min_terms <= max_terms");
  }
  if (!(c.solver.tolerance > 0.0)) add(out, "solver.tolerance", "tolerance must be > 0");
  if (c.solver.max_iterations < 0) add(out, "solver.max_iterations", "max_iterations must be >= 0");
  for (const auto& [key, msg] : check_sim_config(c.sim)) add(out, key, msg);
  for (double e : c.invariance.epsilons) {
    if (!(e > 0.0 && e <= 1.0)) add(out, "invariance.epsilons", "every epsilon must lie in (0, 1]");
  }
  for (double eta : c.checks.excursion_etas) {
    if (!(eta > 0.0)) add(out, "checks.excursion_etas", "eta must be > 0");
  }
  if (c.checks.density_bins < 2 || c.checks.density_bins % 2) {
    add(out, "checks.density_bins", "density_bins must be an even number >= 2");
  } else if (c.n % c.checks.density_bins) {
    add(out, "checks.density_bins", "density_bins must divide grid.n");
  }
  if (c.output.paths_format != "binary" && c.output.paths_format != "csv" && c.output.paths_format != "none") {
    add(out, "output.paths_format", "paths_format must be binary, csv or none");
  }
  // The step guard needs the sampled potential; only checked when the rest is sound.
  if (out.empty() && c.n <= 4096) {
    try {
      const TorusGrid grid(c.dim, c.n);
      const ScalarField v = sample_potential(c.potential, grid);
      double min_exp = std::numeric_limits<double>::infinity();
      for (double x : v.values()) min_exp = std::min(min_exp, std::exp(x));
      const double guard = 0.5 * grid.spacing() * grid.spacing() * min_exp;
      if (c.sim.dt > guard) {
        std::ostringstream msg;
        msg << "dt = " << c.sim.dt << " exceeds the step guard h^2/2 min e^V = " << guard;
        add(out, "simulation.dt", msg.str(), Diagnostic::Severity::warning);
      }
    } catch (const std::exception& e) {
      add(out, "potential", e.what());
    }
  }
  return out;
}

std::vector<Diagnostic> validate_config_text(const std::string& text) {
  std::vector<Diagnostic> diags;
  const auto tree = parse_tree(text, diags);
  if (!diags.empty()) return diags;
  const ExperimentConfig c = read(tree, diags);
  for (auto& d : check_config(c)) diags.push_back(std::move(d));
  return diags;
}

std::vector<Diagnostic> validate_config(const std::filesystem::path& file) {
  try {
    return validate_config_text(slurp(file));
  } catch (const ConfigError& e) {
    return {{Diagnostic::Severity::error, e.key(), e.what()}};
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<Diagnostic> diags;
  const auto tree = parse_tree(text, diags);
  ExperimentConfig c;
  if (diags.empty()) c = read(tree, diags);
  if (diags.empty()) diags = check_config(c);
  for (const auto& d : diags) {
    if (d.severity == Diagnostic::Severity::error) throw ConfigError(d.key, d.message);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) { return parse_config(slurp(file)); }

}  // namespace homog
