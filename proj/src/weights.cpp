#include "homog/weights.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "homog/error.hpp"

namespace homog {

namespace detail {

std::vector<std::pair<CellIndex, int>> sample_cubes(const TorusGrid& grid, const CubeSampling& sample) {
  const int n = grid.cells_per_side();
  const int d = grid.dim();
  std::vector<std::pair<CellIndex, int>> cubes;

  auto add_all_corners = [&](int k, int step) {
    const int per_axis = n / step;
    std::size_t count = 1;
    for (int a = 0; a < d; ++a) count *= static_cast<std::size_t>(per_axis);
    for (std::size_t j = 0; j < count; ++j) {
      CellIndex c{0, 0, 0};
      std::size_t r = j;
      for (int a = 0; a < d; ++a) {
        c[a] = static_cast<int>(r % static_cast<std::size_t>(per_axis)) * step;
        r /= static_cast<std::size_t>(per_axis);
      }
      cubes.emplace_back(c, k);
    }
  };

  if (sample.exhaustive) {
    for (int k = 1; k <= n; ++k) add_all_corners(k, 1);
    return cubes;
  }
  if (sample.dyadic) {
    for (int k = n; k >= 1; k /= 2) {
      add_all_corners(k, k);
      if (k % 2 != 0) break;
    }
  }
  std::mt19937_64 rng(sample.seed);
  std::uniform_int_distribution<int> side(1, n);
  std::uniform_int_distribution<int> corner(0, n - 1);
  for (std::size_t i = 0; i < sample.random_cubes; ++i) {
    const int k = side(rng);
    CellIndex c{0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = corner(rng);
    cubes.emplace_back(c, k);
  }
  return cubes;
}

}  // namespace detail

namespace {

void require_positive(const ScalarField& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw std::invalid_argument("weight must be strictly positive and finite (cell " +
                                  std::to_string(i) + ")");
    }
  }
}

double cube_min(const ScalarField& w, const CellIndex& start, int k) {
  const TorusGrid& g = w.grid();
  const int d = g.dim();
  std::size_t count = 1;
  for (int a = 0; a < d; ++a) count *= static_cast<std::size_t>(k);
  double m = INFINITY;
  for (std::size_t j = 0; j < count; ++j) {
    std::size_t r = j;
    CellIndex c{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      c[a] = start[a] + static_cast<int>(r % static_cast<std::size_t>(k));
      r /= static_cast<std::size_t>(k);
    }
    m = std::min(m, w[g.index(c)]);
  }
  return m;
}

void keep_max(CubeSupremum& best, double value, const CellIndex& start, int k) {
  ++best.cubes_tested;
  if (value > best.value || best.length == 0) {
    best.value = value;
    best.start = start;
    best.length = k;
  }
}

}  // namespace

CubeSupremum muckenhoupt_supremum(const ScalarField& w, double p, const CubeSampling& sample) {
  if (!(p >= 1.0)) throw ConfigError("weights.ap_exponents", "A_p requires p >= 1");
  require_positive(w);
  const TorusGrid& g = w.grid();
  const PeriodicPrefixSums w_sums(w);
  CubeSupremum best;
  const auto cubes = detail::sample_cubes(g, sample);

  if (p == 1.0) {
    for (const auto& [start, k] : cubes) {
      keep_max(best, w_sums.cube_average(start, k) / cube_min(w, start, k), start, k);
    }
    return best;
  }
  std::vector<double> dual(w.size());
  const double expo = -1.0 / (p - 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) dual[i] = std::pow(w[i], expo);
  const PeriodicPrefixSums dual_sums(g, dual);
  for (const auto& [start, k] : cubes) {
    const double a = w_sums.cube_average(start, k);
    const double b = dual_sums.cube_average(start, k);
    keep_max(best, a * std::pow(b, p - 1.0), start, k);
  }
  return best;
}

double check_muckenhoupt(const ScalarField& w, double p, const CubeSampling& sample) {
  return muckenhoupt_supremum(w, p, sample).value;
}

std::optional<double> sobolev_exponent_s(int dim) {
  if (dim < 2) return std::nullopt;
  return 2.0 * dim / (dim - 1.0);
}

double default_r_star(int dim) {
  const auto s = sobolev_exponent_s(dim);
  return s ? 0.5 * (2.0 + *s) : 4.0;
}

CubeSupremum aps_supremum(const ScalarField& w, const ScalarField& potential, double s, double p,
                          const CubeSampling& sample) {
  const TorusGrid& g = w.grid();
  if (g.dim() < 2) {
    throw ConfigError("grid.dim", "the A_{p,s,1/d} check needs d >= 2 (s = 2d/(d-1) is undefined for d = 1)");
  }
  if (!(p > 1.0)) throw ConfigError("weights.aps_p", "A_{p,s,1/d} requires p > 1");
  if (!(s > 0.0)) throw ConfigError("weights.s", "s must be positive");
  if (!(potential.grid() == g)) throw std::invalid_argument("check_aps: grid mismatch");
  require_positive(w);

  const int d = g.dim();
  std::vector<double> dual(potential.size());
  for (std::size_t i = 0; i < dual.size(); ++i) {
    dual[i] = std::exp(potential[i] / (p - 1.0));
    if (!std::isfinite(dual[i])) throw RangeError(i, "exp(V/(p-1)) overflows");
  }
  const PeriodicPrefixSums w_sums(w);
  const PeriodicPrefixSums dual_sums(g, dual);
  CubeSupremum best;
  for (const auto& [start, k] : detail::sample_cubes(g, sample)) {
    const double measure = std::pow(k * g.spacing(), d);
    const double int_w = measure * w_sums.cube_average(start, k);
    const double int_dual = measure * dual_sums.cube_average(start, k);
    const double value =
        std::pow(int_w, 1.0 / s) * std::pow(int_dual, (p - 1.0) / p) / std::pow(measure, 1.0 - 1.0 / d);
    keep_max(best, value, start, k);
  }
  return best;
}

double check_aps(const ScalarField& w, const ScalarField& potential, double s, double p,
                 const CubeSampling& sample) {
  return aps_supremum(w, potential, s, p, sample).value;
}

WeightReport weight_from_potential(const ScalarField& potential, const MaximalConfig& cfg,
                                   const WeightOptions& options) {
  if (potential.kind() != FieldKind::potential) {
    throw std::invalid_argument("weight_from_potential expects a potential field");
  }
  const ScalarField expv = exp_field(potential, +1);
  const ScalarField m = maximal_function(expv, cfg);
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / m[i];

  const double int_exp = integrate_exp(potential, +1);
  WeightReport report{ScalarField(potential.grid(), std::move(w), FieldKind::weight), 0.0, 0.0, {}, {}, {}, {}, 0.0, {}};
  report.integral_exp_plus = int_exp;
  report.upper_bound = 1.0 / int_exp;
  const int d = potential.grid().dim();
  report.s = sobolev_exponent_s(d);
  report.r_star = default_r_star(d);

  for (double p : options.ap_exponents) {
    report.ap_constants[p] = check_muckenhoupt(report.weight, p, options.sampling);
  }
  if (report.s) {
    report.aps_constant = check_aps(report.weight, potential, *report.s, 2.0, options.sampling);
    report.aps_bound = std::pow(int_exp, 0.5 - 1.0 / *report.s);
  }
  if (options.coifman_rochberg) {
    std::vector<double> root(m.size());
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(m[i]);
    const ScalarField rf(potential.grid(), std::move(root), FieldKind::weight);
    report.coifman_rochberg_a1 = check_muckenhoupt(rf, 1.0, options.sampling);
  }
  return report;
}

}  // namespace homog
