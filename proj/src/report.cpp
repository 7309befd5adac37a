#include "homog/report.hpp"

#include <cmath>
#include <sstream>

namespace homog {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json opt(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

Json matrix(const Matrix3& m, int d) {
  Json rows = Json::array();
  for (int i = 0; i < d; ++i) {
    Json row = Json::array();
    for (int j = 0; j < d; ++j) row.push_back(num(m[i][j]));
    rows.push_back(row);
  }
  return rows;
}

Json estimate(const Estimate& e) { return Json{{"mean", num(e.mean)}, {"se", num(e.se)}}; }

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string key_of(double p) {
  std::ostringstream s;
  s << p;
  return s.str();
}

Json scale_json(const ScaleResult& s, int d) {
  Json g = Json::array();
  for (const auto& k : s.gaussianity) g.push_back({{"statistic", num(k.statistic)}, {"p_value", num(k.p_value)}});
  return Json{{"epsilon", s.epsilon},
              {"num_paths", s.num_paths},
              {"dt", s.dt},
              {"covariance", matrix(s.covariance, d)},
              {"covariance_se", matrix(s.covariance_se, d)},
              {"covariance_relerr", num(s.covariance_relerr)},
              {"corrector_sup_quantiles",
               {{"q10", num(s.sup_quantiles[0])}, {"q50", num(s.sup_quantiles[1])}, {"q90", num(s.sup_quantiles[2])}}},
              {"gaussianity", g},
              {"k_estimate", estimate(s.k)},
              {"covariance_ok", s.covariance_ok},
              {"gaussian_ok", s.gaussian_ok}};
}

}  // namespace

Json to_json(const WeightReport& r) {
  Json ap = Json::object();
  for (const auto& [p, c] : r.ap_constants) ap[key_of(p)] = num(c);
  double wmin = INFINITY, wmax = 0.0;
  for (double w : r.weight.values()) {
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
  }
  return Json{{"weight_upper_bound", num(r.upper_bound)},
              {"integral_exp_plus", num(r.integral_exp_plus)},
              {"weight_min", num(wmin)},
              {"weight_max", num(wmax)},
              {"ap_constants", ap},
              {"aps_constant", opt(r.aps_constant)},
              {"aps_bound", opt(r.aps_bound)},
              {"s", opt(r.s)},
              {"r_star", num(r.r_star)},
              {"coifman_rochberg_a1", opt(r.coifman_rochberg_a1)}};
}

Json to_json(const InequalityReport& r) {
  return Json{{"num_test_functions", r.num_test_functions},
              {"max_ratio", num(r.max_ratio)},
              {"poincare_max_ratio", num(r.poincare_max_ratio)},
              {"infinite_ratios", r.infinite_ratios},
              {"violating_function", r.violating_function ? Json(*r.violating_function) : Json(nullptr)},
              {"r_star", num(r.r_star)}};
}

Json to_json(const ClassicalSobolev& c) {
  return Json{{"applicable", c.applicable}, {"reason", c.reason},       {"factor", num(c.factor)},
              {"p", num(c.p)},              {"q", num(c.q)},            {"integrals", numbers(c.integrals)}};
}

Json to_json(const DiffusivityMatrix& m) {
  return Json{{"dim", m.dim},
              {"n", m.n},
              {"preset", m.preset},
              {"sigma_bar", matrix(m.sigma_bar, m.dim)},
              {"sigma_unnormalized", matrix(m.sigma_unnormalized, m.dim)},
              {"sigma_time_changed", matrix(m.sigma_time_changed, m.dim)},
              {"k_constant", num(m.k_constant)},
              {"integral_exp_minus", num(m.integral_exp_minus)},
              {"integral_weight", num(m.integral_weight)},
              {"normalization", m.normalization},
              {"residuals", numbers(m.residuals)},
              {"min_eigenvalue", num(m.min_eigenvalue)}};
}

Json to_json(const RefinementTable& t) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    Json row{{"n", r.n},
             {"sigma_bar", matrix(r.sigma_bar, t.dim)},
             {"iterations", r.max_iterations},
             {"residual", num(r.max_residual)}};
    if (i < t.oracle_errors.size()) row["oracle_error"] = num(t.oracle_errors[i]);
    rows.push_back(row);
  }
  Json orders = Json::array();
  for (const auto& o : t.observed_order) orders.push_back(matrix(o, t.dim));
  return Json{{"dim", t.dim},
              {"rows", rows},
              {"observed_order", orders},
              {"extrapolated", matrix(t.extrapolated, t.dim)},
              {"oracle", opt(t.oracle)}};
}

Json to_json(const McReport& r) {
  const int d = r.dim;
  Json j;
  j["dim"] = d;
  j["dt"] = r.dt;
  j["dt_guard"] = num(r.dt_guard);
  const ScaleResult* finest = r.scales.empty() ? nullptr : &r.scales.back();
  j["covariance"] = finest ? matrix(finest->covariance, d) : Json(nullptr);
  j["covariance_se"] = finest ? matrix(finest->covariance_se, d) : Json(nullptr);
  if (r.k_check) {
    j["k_estimate"] = {{"mean", num(r.k_check->k_estimate.mean)},
                       {"se", num(r.k_check->k_estimate.se)},
                       {"reference", num(r.k_check->k_reference)},
                       {"relative_difference", num(r.k_check->relative_difference)},
                       {"z_score", num(r.k_check->z_score)}};
  } else {
    j["k_estimate"] = nullptr;
  }
  j["corrector_sup_quantiles"] = finest ? scale_json(*finest, d)["corrector_sup_quantiles"] : Json(nullptr);
  if (r.bracket) {
    Json inc = Json::array();
    for (const auto& e : r.bracket->mean_increment) inc.push_back(estimate(e));
    j["bracket_relerr"] = num(r.bracket->relerr);
    j["bracket"] = {{"predicted", num(r.bracket->predicted)},
                    {"realized", num(r.bracket->realized)},
                    {"relerr", num(r.bracket->relerr)},
                    {"relerr_se", num(r.bracket->relerr_se)},
                    {"martingale_mean_increment", inc}};
  } else {
    j["bracket_relerr"] = nullptr;
  }
  Json ex = Json::array();
  for (const auto& c : r.excursions) {
    ex.push_back({{"eta", c.eta},
                  {"epsilon", c.epsilon},
                  {"probability", num(c.probability)},
                  {"probability_se", num(c.probability_se)},
                  {"bound", num(c.bound)},
                  {"num_paths", c.num_paths},
                  {"violated", c.violated}});
  }
  j["excursion_checks"] = ex;
  if (r.density) {
    j["density_sup"] = num(r.density->sup_fine);
    j["density"] = {{"t", r.density->t},
                    {"bins_fine", r.density->bins_fine},
                    {"sup_fine", num(r.density->sup_fine)},
                    {"sup_coarse", num(r.density->sup_coarse)},
                    {"relative_spread", num(r.density->relative_spread)}};
  } else {
    j["density_sup"] = nullptr;
  }
  j["gaussianity"] = finest ? scale_json(*finest, d)["gaussianity"] : Json::array();
  Json scales = Json::array();
  for (const auto& s : r.scales) scales.push_back(scale_json(s, d));
  j["scales"] = scales;
  j["sup_median_decreasing"] = r.sup_median_decreasing;
  j["sigma_bar_reference"] = r.sigma_bar_reference ? to_json(*r.sigma_bar_reference) : Json(nullptr);
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const ExperimentConfig& c) {
  Json center = Json::array(), x0 = Json::array();
  for (int a = 0; a < c.dim && a < kMaxDim; ++a) {
    center.push_back(c.potential.center[a]);
    x0.push_back(c.sim.x0[a]);
  }
  return Json{
      {"grid", {{"dim", c.dim}, {"n", c.n}, {"n_list", c.n_list}}},
      {"potential",
       {{"preset", to_string(c.potential.preset)},
        {"amplitude", c.potential.amplitude},
        {"frequency", c.potential.frequency},
        {"beta", c.potential.beta},
        {"center", center},
        {"smoothing", c.potential.smoothing}}},
      {"maximal", {{"lengths", c.maximal.lengths}, {"exhaustive", c.maximal.exhaustive}}},
      {"weights",
       {{"ap_exponents", c.weights.ap_exponents},
        {"dyadic", c.weights.sampling.dyadic},
        {"random_cubes", c.weights.sampling.random_cubes},
        {"seed", c.weights.sampling.seed},
        {"exhaustive", c.weights.sampling.exhaustive},
        {"coifman_rochberg", c.weights.coifman_rochberg}}},
      {"sobolev",
       {{"r_star", opt(c.r_star)},
        {"count", c.sobolev_family.count},
        {"max_frequency", c.sobolev_family.max_frequency},
        {"min_terms", c.sobolev_family.min_terms},
        {"max_terms", c.sobolev_family.max_terms},
        {"seed", c.sobolev_family.seed},
        {"classical_r", c.classical_r}}},
      {"solver",
       {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}, {"jacobi", c.solver.jacobi}}},
      {"simulation",
       {{"dt", c.sim.dt},
        {"T", c.sim.T},
        {"epsilon", c.sim.epsilon},
        {"num_paths", c.sim.num_paths},
        {"seed", c.sim.seed},
        {"interpolation", to_string(c.sim.interpolation)},
        {"start", to_string(c.sim.start)},
        {"x0", x0},
        {"record_every", c.sim.record_every}}},
      {"invariance",
       {{"epsilons", c.invariance.epsilons},
        {"covariance_tolerance", c.invariance.tolerances.covariance_relative},
        {"ks_alpha", c.invariance.tolerances.ks_alpha}}},
      {"checks",
       {{"k_paths", c.checks.k_paths},
        {"k_T", c.checks.k_T},
        {"bracket_paths", c.checks.bracket_paths},
        {"bracket_T", c.checks.bracket_T},
        {"bracket_dt", c.checks.bracket_dt},
        {"excursion_etas", c.checks.excursion_etas},
        {"excursion_epsilon", c.checks.excursion_epsilon},
        {"excursion_paths", c.checks.excursion_paths},
        {"density_t", c.checks.density_t},
        {"density_bins", c.checks.density_bins},
        {"density_paths", c.checks.density_paths}}},
      {"output",
       {{"directory", c.output.directory.string()},
        {"csv", c.output.csv},
        {"paths_format", c.output.paths_format}}}};
}

Json manifest(const ExperimentConfig& c, const std::string& command) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"command", command},
              {"seed", c.sim.seed},
              {"config", to_json(c)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace homog
