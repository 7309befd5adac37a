#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "homog/error.hpp"
#include "homog/torus.hpp"
#include "oracles.hpp"

using namespace homog;

TEST_CASE("grid construction validates its arguments") {
  CHECK_THROWS_AS(TorusGrid(0, 8), ConfigError);
  CHECK_THROWS_AS(TorusGrid(4, 8), ConfigError);
  CHECK_THROWS_AS(TorusGrid(2, 1), ConfigError);
  try {
    TorusGrid(2, 1);
  } catch (const ConfigError& e) {
    CHECK(e.key() == "grid.n");
  }
  const TorusGrid g(2, 8);
  CHECK(g.total_cells() == 64);
  CHECK(g.spacing() == 0.125);
  CHECK(g.cell_volume() == 1.0 / 64);
}

TEST_CASE("indices, coordinates and neighbours wrap periodically") {
  const TorusGrid g(3, 5);
  for (std::size_t i = 0; i < g.total_cells(); ++i) {
    CHECK(g.index(g.coords(i)) == i);
    for (int a = 0; a < 3; ++a) {
      CHECK(g.neighbor(g.neighbor(i, a, 1), a, -1) == i);
      CHECK(g.neighbor(i, a, 5) == i);
      CHECK(g.neighbor(i, a, -7) == g.neighbor(i, a, 3));
    }
  }
  CHECK(g.index({-1, 0, 0}) == g.index({4, 0, 0}));
  const Point c = g.center(g.index({2, 0, 4}));
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[2] == doctest::Approx(0.9));
}

TEST_CASE("scalar fields reject inconsistent values") {
  const TorusGrid g(1, 4);
  CHECK_THROWS_AS(ScalarField(g, {1.0, 2.0}, FieldKind::generic), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(g, {1.0, 0.0, 1.0, 1.0}, FieldKind::weight), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(g, {1.0, INFINITY, 1.0, 1.0}, FieldKind::exp_potential), std::invalid_argument);
  const ScalarField f(g, {1.0, 2.0, 3.0, 4.0}, FieldKind::generic);
  CHECK(f.integral() == doctest::Approx(2.5));
  CHECK(f.mean() == doctest::Approx(2.5));
}

TEST_CASE("presets sample the documented formulas") {
  const TorusGrid g(2, 16);
  PotentialSpec cos_spec;
  cos_spec.preset = Preset::cosine;
  cos_spec.amplitude = 0.7;
  PotentialSpec sep = cos_spec;
  sep.preset = Preset::separable_cosine;
  const ScalarField v = sample_potential(cos_spec, g);
  const ScalarField s = sample_potential(sep, g);
  for (std::size_t i = 0; i < g.total_cells(); ++i) {
    const Point x = g.center(i);
    CHECK(v[i] == doctest::Approx(0.7 * std::cos(2 * std::numbers::pi * (x[0] + x[1]))).epsilon(1e-12));
    CHECK(s[i] == doctest::Approx(0.7 * (std::cos(2 * std::numbers::pi * x[0]) + std::cos(2 * std::numbers::pi * x[1])))
                      .epsilon(1e-12));
  }
  PotentialSpec checker;
  checker.preset = Preset::checkerboard;
  checker.amplitude = 2.0;
  const ScalarField cb = sample_potential(checker, g);
  for (std::size_t i = 0; i < g.total_cells(); ++i) CHECK(std::abs(cb[i]) == 2.0);
  CHECK(cb[g.index({0, 0, 0})] == -cb[g.index({8, 0, 0})]);
}

TEST_CASE("log_singular is floored at half a cell and smoothed on request") {
  const TorusGrid g(2, 8);
  PotentialSpec spec;
  spec.preset = Preset::log_singular;
  spec.beta = 1.0;
  spec.center = {0.5, 0.5, 0.0};
  const ScalarField v = sample_potential(spec, g);
  // the four cells around the centre sit at distance h sqrt(2)/2
  const double h = g.spacing();
  CHECK(v[g.index({4, 4, 0})] == doctest::Approx(-std::log(h * std::sqrt(2.0) / 2)));
  double vmax = -INFINITY;
  for (double x : v.values()) vmax = std::max(vmax, x);
  CHECK(vmax <= -std::log(h / 2) + 1e-12);
  spec.smoothing = 0.1;
  const ScalarField vs = sample_potential(spec, g);
  CHECK(vs[g.index({4, 4, 0})] == doctest::Approx(-0.5 * std::log(h * h / 2 + 0.01)));
}

TEST_CASE("shifting the centre by one cell permutes the samples exactly") {
  const TorusGrid g(2, 32);
  PotentialSpec spec;
  spec.preset = Preset::log_singular;
  spec.beta = 1.0;
  spec.center = {0.25, 0.5, 0.0};
  PotentialSpec shifted = spec;
  shifted.center[0] += g.spacing();
  const ScalarField a = sample_potential(spec, g);
  const ScalarField b = sample_potential(shifted, g);
  for (std::size_t i = 0; i < g.total_cells(); ++i) CHECK(b[g.neighbor(i, 0, 1)] == a[i]);
}

TEST_CASE("potential checks name the key at fault") {
  PotentialSpec spec;
  spec.preset = Preset::log_singular;
  spec.beta = 2.5;
  const auto problems = check_potential(spec, 2);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].first == "potential.beta");
  CHECK(problems[0].second.find("beta < d") != std::string::npos);
  CHECK_THROWS_AS(sample_potential(spec, TorusGrid(2, 8)), ConfigError);
  CHECK_THROWS_AS(parse_preset("wobbly"), ConfigError);
  CHECK(parse_preset("separable_cosine") == Preset::separable_cosine);
}

TEST_CASE("integrate_exp matches the Bessel oracle and reports overflow") {
  PotentialSpec spec;
  spec.preset = Preset::cosine;
  const ScalarField v = sample_potential(spec, TorusGrid(1, 64));
  CHECK(integrate_exp(v, +1) == doctest::Approx(oracle::bessel_i0(1.0)).epsilon(1e-13));
  CHECK(integrate_exp(v, -1) == doctest::Approx(oracle::bessel_i0(1.0)).epsilon(1e-13));
  spec.amplitude = 1000.0;
  const ScalarField big = sample_potential(spec, TorusGrid(1, 8));
  CHECK_THROWS_AS(integrate_exp(big, +1), RangeError);
  const ScalarField e = exp_field(v, -1);
  CHECK(e.kind() == FieldKind::exp_potential);
  CHECK(e[3] == std::exp(-v[3]));
}

TEST_CASE("periodic box sums agree with direct summation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim : {1, 2, 3}) {
    const TorusGrid g(dim, dim == 3 ? 6 : 9);
    std::vector<double> vals(g.total_cells());
    for (auto& x : vals) x = u(rng);
    const ScalarField f(g, vals, FieldKind::generic);
    const PeriodicPrefixSums sums(f);
    std::uniform_int_distribution<int> pos(-20, 20), len(1, g.cells_per_side());
    for (int trial = 0; trial < 200; ++trial) {
      CellIndex start{0, 0, 0}, length{1, 1, 1};
      for (int a = 0; a < dim; ++a) {
        start[a] = pos(rng);
        length[a] = len(rng);
      }
      double direct = 0.0;
      for (std::size_t i = 0; i < g.total_cells(); ++i) {
        const CellIndex c = g.coords(i);
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          const int n = g.cells_per_side();
          const int off = ((c[a] - start[a]) % n + n) % n;
          inside = inside && off < length[a];
        }
        if (inside) direct += vals[i];
      }
      CHECK(sums.box_sum(start, length) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(sums.cube_average({3, 1, 0}, 1) == f[g.index({3, 1, 0})]);
    CHECK(sums.cube_average({2, 2, 2}, g.cells_per_side()) == sums.total() / static_cast<double>(g.total_cells()));
  }
}

TEST_CASE("fields dump to CSV with coordinates") {
  const TorusGrid g(2, 2);
  const ScalarField f(g, {1.0, 2.0, 3.0, 4.0}, FieldKind::generic);
  std::ostringstream out;
  write_field_csv(out, f);
  const std::string s = out.str();
  CHECK(s.rfind("index,x_1,x_2,value\n", 0) == 0);
  CHECK(s.find("3,0.75,0.75,4") != std::string::npos);
}
