#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "homog/diffusion.hpp"
#include "homog/error.hpp"
#include "homog/parallel.hpp"
#include "homog/path_io.hpp"
#include "homog/rng.hpp"
#include "homog/stats.hpp"
#include "homog/weights.hpp"
#include "oracles.hpp"

using namespace homog;

namespace {

ScalarField ones(const TorusGrid& g) {
  return ScalarField(g, std::vector<double>(g.total_cells(), 1.0), FieldKind::weight);
}

struct CosineSetup {
  PotentialSpec spec;
  TorusGrid grid{1, 64};
  ScalarField potential;
  ScalarField weight;
  CorrectorSolution corrector;

  CosineSetup()
      : spec(make_spec()),
        potential(sample_potential(spec, grid)),
        weight(weight_from_potential(potential, {}, {{}, {}, false}).weight),
        corrector(solve_correctors(assemble_operator(potential))) {}

  static PotentialSpec make_spec() {
    PotentialSpec s;
    s.preset = Preset::cosine;
    return s;
  }
  PathModel model() const { return PathModel(spec, grid, weight, &corrector); }
};

struct ZeroSetup {
  TorusGrid grid;
  ScalarField potential;
  CorrectorSolution corrector;
  explicit ZeroSetup(int dim)
      : grid(dim, 16), potential(sample_potential({}, grid)), corrector(solve_correctors(assemble_operator(potential))) {}
  PathModel model() const { return PathModel({}, grid, ones(grid), &corrector); }
};

// Probability mass of 8 equal bins under the piecewise-constant density
// proportional to the given cell values (1D).
std::vector<double> bin_masses(std::span<const double> cell_values, int bins) {
  std::vector<double> m(static_cast<std::size_t>(bins), 0.0);
  double total = 0.0;
  const std::size_t per = cell_values.size() / static_cast<std::size_t>(bins);
  for (std::size_t i = 0; i < cell_values.size(); ++i) {
    m[i / per] += cell_values[i];
    total += cell_values[i];
  }
  for (double& x : m) x /= total;
  return m;
}

void check_histogram(const std::vector<double>& xs, const std::vector<double>& expected, double z) {
  const int bins = static_cast<int>(expected.size());
  std::vector<double> counts(expected.size(), 0.0);
  for (double x : xs) {
    const double y = x - std::floor(x);
    counts[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(y * bins)))] += 1.0;
  }
  const double n = static_cast<double>(xs.size());
  for (std::size_t b = 0; b < expected.size(); ++b) {
    const double se = std::sqrt(expected[b] * (1.0 - expected[b]) / n);
    CHECK(std::abs(counts[b] / n - expected[b]) <= z * se);
  }
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Philox4x32Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Philox4x32Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Philox4x32Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream moments and independence of streams") {
  NormalStream a(42, 7, 0), b(42, 7, 1), c(42, 8, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal(), y = b.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    cross += x * y;
  }
  CHECK(std::abs(s1 / n) <= 5.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) <= 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) <= 5.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(cross / n) <= 5.0 / std::sqrt(n));
  NormalStream a2(42, 7, 0);
  CHECK(a2.normal() != c.normal());
}

TEST_CASE("statistics helpers") {
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.1) == doctest::Approx(1.3));
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const Estimate e = mean_se(x);
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(kolmogorov_tail(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
  CHECK(kolmogorov_tail(1.358) == doctest::Approx(0.05).epsilon(0.01));
  NormalStream s(3, 0);
  std::vector<double> z(5000), shifted(5000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = s.normal();
    shifted[i] = z[i] + 0.2;
  }
  CHECK(ks_normal(z, 0.0, 1.0).p_value > 1e-3);
  CHECK(ks_normal(shifted, 0.0, 1.0).p_value < 1e-6);
}

TEST_CASE("configuration checks name their keys") {
  SimConfig cfg;
  cfg.dt = 0.0;
  cfg.epsilon = 2.0;
  const auto problems = check_sim_config(cfg);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].first == "simulation.dt");
  CHECK(problems[1].first == "simulation.epsilon");
  CHECK(check_sim_config(SimConfig{}).empty());
  CHECK(parse_start_law("weight") == StartLaw::weight);
  CHECK_THROWS_AS(parse_start_law("uniform"), ConfigError);
}

TEST_CASE("rough potentials are rejected for simulation") {
  const TorusGrid g(2, 16);
  PotentialSpec spec;
  spec.preset = Preset::log_singular;
  spec.center = {0.5, 0.5, 0.0};
  try {
    PathModel m(spec, g);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "potential.smoothing");
  }
  spec.smoothing = 0.05;
  CHECK_NOTHROW(PathModel(spec, g));
  spec.preset = Preset::checkerboard;
  try {
    PathModel m(spec, g);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "potential.preset");
  }
}

TEST_CASE("zero potential: Brownian paths, identity clock and martingale") {
  const ZeroSetup z(1);
  const PathModel model = z.model();
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.T = 1.0;
  cfg.num_paths = 50;
  cfg.x0 = {0.3, 0.0, 0.0};
  PathEnsemble ens = simulate_paths(model, cfg);
  REQUIRE(ens.paths.size() == 50);
  for (std::size_t p = 0; p < ens.paths.size(); ++p) {
    NormalStream rng(cfg.seed, p, 0);
    double x = 0.3;
    const auto& rec = ens.paths[p];
    REQUIRE(rec.positions.size() == 101);
    for (std::size_t k = 1; k < rec.positions.size(); ++k) {
      x += std::sqrt(cfg.dt) * rng.normal();
      CHECK(rec.positions[k][0] == x);
    }
  }
  ens = time_change(std::move(ens), ones(z.grid), z.potential);
  ens = corrector_martingale(std::move(ens), z.corrector, ones(z.grid), z.potential);
  for (const auto& rec : ens.paths) {
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      CHECK(rec.clock[k] == doctest::Approx(rec.times[k]).epsilon(1e-12).scale(1.0));
      CHECK(rec.martingale[k][0] == rec.positions[k][0]);
      CHECK(rec.bracket_pred[k][0][0] == doctest::Approx(rec.times[k]).epsilon(1e-12).scale(1.0));
    }
    REQUIRE(rec.timechanged.size() >= 100);
    for (std::size_t j = 0; j + 1 < rec.timechanged.size(); ++j) {
      CHECK(rec.timechanged[j][0] == doctest::Approx(rec.positions[j][0]).epsilon(1e-9).scale(1.0));
    }
    CHECK(clock_round_trip_error(rec) <= 1e-12);
  }
}

TEST_CASE("zero potential: streamed summaries") {
  for (int dim : {1, 2}) {
    const ZeroSetup z(dim);
    const PathModel model = z.model();
    StreamConfig sc;
    sc.sim.dt = 1e-2;
    sc.sim.T = 2.0;
    sc.sim.num_paths = 4000;
    sc.martingale = true;
    const auto res = stream_paths(model, sc);
    std::vector<double> disp(res.size());
    for (std::size_t p = 0; p < res.size(); ++p) {
      const auto& s = res[p];
      CHECK(s.clock_end == doctest::Approx(2.0).epsilon(1e-12));
      for (int i = 0; i < dim; ++i) {
        CHECK(s.martingale_end[i] == s.end[i]);
        for (int j = 0; j < dim; ++j) {
          CHECK(s.bracket[i][j] == doctest::Approx(i == j ? 2.0 : 0.0).epsilon(1e-12).scale(1.0));
        }
      }
      disp[p] = (s.end[0] - s.start[0]) * (s.end[0] - s.start[0]);
    }
    const Estimate var = mean_se(disp);
    CHECK(std::abs(var.mean - 2.0) <= 4.0 * var.se);
  }
}

TEST_CASE("streamed and recorded runs agree") {
  const CosineSetup c;
  const PathModel model = c.model();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.5;
  cfg.num_paths = 8;
  cfg.start = StartLaw::reversible;
  PathEnsemble ens = simulate_paths(model, cfg);
  ens = time_change(std::move(ens), c.weight, c.potential);
  ens = corrector_martingale(std::move(ens), c.corrector, c.weight, c.potential);
  StreamConfig sc;
  sc.sim = cfg;
  sc.clock = true;
  sc.martingale = true;
  const auto res = stream_paths(model, sc);
  for (std::size_t p = 0; p < res.size(); ++p) {
    const auto& rec = ens.paths[p];
    CHECK(res[p].start[0] == rec.positions.front()[0]);
    CHECK(res[p].end[0] == doctest::Approx(rec.positions.back()[0]).epsilon(1e-12));
    CHECK(res[p].clock_end == doctest::Approx(rec.clock.back()).epsilon(1e-10));
    CHECK(res[p].martingale_end[0] == doctest::Approx(rec.martingale.back()[0]).epsilon(1e-10));
    CHECK(res[p].bracket[0][0] == doctest::Approx(rec.bracket_pred.back()[0][0]).epsilon(1e-10));
    double qv = 0.0;
    for (std::size_t k = 1; k < rec.martingale.size(); ++k) {
      const double dm = rec.martingale[k][0] - rec.martingale[k - 1][0];
      qv += dm * dm;
    }
    CHECK(res[p].realized_qv[0][0] == doctest::Approx(qv).epsilon(1e-9));
    CHECK(clock_round_trip_error(rec) <= 1e-12);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const CosineSetup c;
  const PathModel model = c.model();
  StreamConfig sc;
  sc.sim.dt = 1e-3;
  sc.sim.T = 0.2;
  sc.sim.num_paths = 64;
  sc.sim.start = StartLaw::weight;
  sc.martingale = true;
  sc.clock_horizon = 0.3;
  sc.sup = SupTarget::corrector_norm;
  set_thread_count(1);
  const auto one = stream_paths(model, sc);
  set_thread_count(8);
  const auto eight = stream_paths(model, sc);
  set_thread_count(0);
  REQUIRE(one.size() == eight.size());
  for (std::size_t p = 0; p < one.size(); ++p) {
    CHECK(one[p].end[0] == eight[p].end[0]);
    CHECK(one[p].at_clock[0] == eight[p].at_clock[0]);
    CHECK(one[p].sup == eight[p].sup);
    CHECK(one[p].realized_qv[0][0] == eight[p].realized_qv[0][0]);
  }
}

TEST_CASE("start laws sample the requested densities") {
  const CosineSetup c;
  const PathModel model = c.model();
  SimConfig cfg;
  std::vector<double> x(40000);
  cfg.start = StartLaw::reversible;
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = model.initial_point(cfg, p)[0];
  check_histogram(x, bin_masses(exp_field(c.potential, -1).values(), 8), 4.5);
  cfg.start = StartLaw::weight;
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = model.initial_point(cfg, p)[0];
  check_histogram(x, bin_masses(c.weight.values(), 8), 4.5);
  cfg.start = StartLaw::fixed_point;
  cfg.x0 = {0.25, 0.0, 0.0};
  CHECK(model.initial_point(cfg, 3)[0] == 0.25);
}

TEST_CASE("the reversible law is preserved by the dynamics") {
  const CosineSetup c;
  const PathModel model = c.model();
  StreamConfig sc;
  sc.sim.dt = 1e-3;
  sc.sim.T = 1.0;
  sc.sim.num_paths = 20000;
  sc.sim.start = StartLaw::reversible;
  const auto res = stream_paths(model, sc);
  std::vector<double> x(res.size());
  for (std::size_t p = 0; p < res.size(); ++p) x[p] = res[p].end[0];
  // the continuum law, integrated per bin
  std::vector<double> expected(8);
  double total = 0.0;
  for (int b = 0; b < 8; ++b) {
    expected[b] = oracle::integrate([](double y) { return std::exp(-std::cos(2.0 * std::numbers::pi * y)); },
                                    b / 8.0, (b + 1) / 8.0);
    total += expected[b];
  }
  for (double& e : expected) e /= total;
  check_histogram(x, expected, 4.5);
}

TEST_CASE("standard errors shrink like the square root of the sample size") {
  const CosineSetup c;
  const PathModel model = c.model();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 2.0;
  cfg.num_paths = 100;
  const KCheck small = time_change_constant(model, cfg);
  cfg.num_paths = 400;
  const KCheck large = time_change_constant(model, cfg);
  const double ratio = small.k_estimate.se / large.k_estimate.se;
  CHECK(ratio >= 2.0 / 1.5);
  CHECK(ratio <= 2.0 * 1.5);
  CHECK(large.k_reference == doctest::Approx(c.weight.integral() / integrate_exp(c.potential, -1)));
}

TEST_CASE("excursion probabilities") {
  const CosineSetup c;
  const PathModel model = c.model();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.num_paths = 200;
  const ScalarField zero(c.grid, std::vector<double>(c.grid.total_cells(), 0.0), FieldKind::generic);
  for (const auto& e : excursion_bound_check(model, zero, 0.5, {0.5, 1.0}, cfg)) {
    CHECK(e.probability == 0.0);
    CHECK(e.bound == 0.0);
    CHECK_FALSE(e.violated);
  }
  const auto res = excursion_bound_check(model, c.corrector.components[0], 0.5, {0.01, 0.05, 0.1}, cfg);
  REQUIRE(res.size() == 3);
  CHECK(res[0].probability >= res[1].probability);
  CHECK(res[1].probability >= res[2].probability);
  CHECK(res[0].bound == doctest::Approx(10.0 * res[2].bound));
  CHECK_THROWS_AS(excursion_bound_check(model, zero, 0.5, {0.0}, cfg), ConfigError);
}

TEST_CASE("density estimate of the time-changed process") {
  const TorusGrid g(1, 16);
  std::vector<Point> uniform(1600);
  for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = {(static_cast<double>(i) + 0.5) / 1600.0, 0.0, 0.0};
  CHECK(density_sup(uniform, ones(g), 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(density_sup(uniform, ones(g), 16 * 2), std::invalid_argument);
  CHECK_THROWS_AS(density_sup(std::span<const Point>(uniform).first(100), ones(g), 4), std::invalid_argument);

  const ZeroSetup z(1);
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.num_paths = 4000;
  cfg.start = StartLaw::weight;
  const DensityCheck d = density_bound_check(z.model(), 0.5, 4, cfg);
  CHECK(d.sup_fine >= 1.0);
  CHECK(d.sup_fine <= 1.15);
  CHECK(d.sup_coarse <= d.sup_fine + 1e-12);
}

TEST_CASE("invariance at zero potential") {
  const ZeroSetup z(2);
  const PathModel model = z.model();
  DiffusivityMatrix id;
  id.dim = 2;
  id.sigma_bar[0][0] = id.sigma_bar[1][1] = 1.0;
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.num_paths = 4000;
  const auto scales = invariance_check(model, id, {0.5, 0.25}, cfg);
  REQUIRE(scales.size() == 2);
  for (const auto& s : scales) {
    for (int a = 0; a < 2; ++a) CHECK(std::abs(s.covariance[a][a] - 1.0) <= 4.0 * s.covariance_se[a][a]);
    CHECK(std::abs(s.covariance[0][1]) <= 4.0 * s.covariance_se[0][1]);
    CHECK(s.k.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.sup_quantiles[1] == 0.0);
  }
  CHECK_FALSE(sup_median_decreasing(scales));
}

TEST_CASE("path files round trip") {
  const CosineSetup c;
  const PathModel model = c.model();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.05;
  cfg.num_paths = 3;
  cfg.record_every = 10;
  PathEnsemble ens = simulate_paths(model, cfg);
  ens = time_change(std::move(ens), c.weight, c.potential);
  ens = corrector_martingale(std::move(ens), c.corrector, c.weight, c.potential);
  std::stringstream buf;
  write_paths_binary(buf, ens);
  const PathEnsemble back = read_paths_binary(buf);
  CHECK(back.dim == ens.dim);
  CHECK(back.n == ens.n);
  CHECK(back.config.dt == ens.config.dt);
  CHECK(back.config.record_every == 10);
  REQUIRE(back.paths.size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto& a = ens.paths[p];
    const auto& b = back.paths[p];
    CHECK(a.times == b.times);
    CHECK(a.positions == b.positions);
    CHECK(a.projected == b.projected);
    CHECK(a.clock == b.clock);
    CHECK(a.timechanged_step == b.timechanged_step);
    CHECK(a.timechanged == b.timechanged);
    CHECK(a.martingale == b.martingale);
    CHECK(a.bracket_pred == b.bracket_pred);
  }
  std::stringstream bad("NOTPATHS");
  CHECK_THROWS_AS(read_paths_binary(bad), std::runtime_error);
  std::string truncated = buf.str();
  std::stringstream again;
  write_paths_binary(again, ens);
  truncated = again.str().substr(0, again.str().size() / 2);
  std::stringstream cut(truncated);
  CHECK_THROWS_AS(read_paths_binary(cut), std::runtime_error);

  std::stringstream csv;
  write_paths_csv(csv, ens);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "path,sample,t,x_1,y_1,clock,m_1");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 3 * 6);
}
