#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homog/error.hpp"
#include "homog/sobolev.hpp"
#include "homog/weights.hpp"
#include "oracles.hpp"

using namespace homog;

namespace {

ScalarField ones(const TorusGrid& g) { return ScalarField(g, std::vector<double>(g.total_cells(), 1.0), FieldKind::weight); }

}  // namespace

TEST_CASE("single mode with zero potential matches the closed form") {
  const TorusGrid g(2, 64);
  const ScalarField v = sample_potential({}, g);
  const TrigPolynomial mode{{{1, 0, 0}, 1.0, 0.0}};
  const auto f = sample_centered(mode, g);
  const double ratio = sobolev_ratio(v, ones(g), f, 3.0);
  const double expected = oracle::single_mode_sobolev_ratio(3.0);
  CHECK(expected == doctest::Approx(std::pow(4.0 / (3.0 * std::numbers::pi), 2.0 / 3.0) / (2 * std::numbers::pi * std::numbers::pi)));
  CHECK(std::abs(ratio - expected) <= 1e-4);
}

TEST_CASE("the zero function has ratio zero") {
  const TorusGrid g(2, 8);
  const ScalarField v = sample_potential({}, g);
  const std::vector<double> zero(g.total_cells(), 0.0);
  CHECK(sobolev_ratio(v, ones(g), zero, 3.0) == 0.0);
}

TEST_CASE("test functions are centred and reproducible") {
  TestFamily fam;
  fam.count = 20;
  fam.max_frequency = 5;
  const auto a = draw_family(fam, 2, 32);
  const auto b = draw_family(fam, 2, 64);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      CHECK(a[i][j].k == b[i][j].k);
      CHECK(a[i][j].cos_coeff == b[i][j].cos_coeff);
      CHECK((a[i][j].k[0] != 0 || a[i][j].k[1] != 0));
      CHECK(std::abs(a[i][j].k[0]) <= 5);
    }
    const auto f = sample_centered(a[i], TorusGrid(2, 32));
    double s = 0.0;
    for (double x : f) s += x;
    CHECK(std::abs(s) < 1e-10);
  }
}

TEST_CASE("sampled trigonometric polynomials match direct evaluation") {
  const TorusGrid g(2, 16);
  const TrigPolynomial p{{{2, -3, 0}, 0.5, -1.5}, {{0, 1, 0}, 2.0, 0.25}};
  const auto f = sample_centered(p, g);
  for (std::size_t i = 0; i < g.total_cells(); ++i) {
    const Point x = g.center(i);
    double v = 0.0;
    for (const auto& t : p) {
      const double ang = 2 * std::numbers::pi * (t.k[0] * x[0] + t.k[1] * x[1]);
      v += t.cos_coeff * std::cos(ang) + t.sin_coeff * std::sin(ang);
    }
    CHECK(f[i] == doctest::Approx(v).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("verify_sobolev on the separable cosine") {
  PotentialSpec spec;
  spec.preset = Preset::separable_cosine;
  TestFamily fam;
  fam.count = 200;
  fam.max_frequency = 8;
  std::vector<double> c;
  for (int n : {32, 64}) {
    const ScalarField v = sample_potential(spec, TorusGrid(2, n));
    const WeightReport w = weight_from_potential(v, {}, {{}, {}, false});
    const InequalityReport r = verify_sobolev(v, w.weight, 3.0, fam);
    CHECK(r.num_test_functions == 200);
    CHECK(r.infinite_ratios == 0);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.max_ratio > 0.0);
    CHECK(r.poincare_max_ratio > 0.0);
    REQUIRE(r.violating_function.has_value());
    c.push_back(r.max_ratio);
  }
  CHECK(c[1] <= 1.1 * c[0]);
  CHECK(std::abs(c[1] / c[0] - 1.0) < 0.1);
}

TEST_CASE("r* outside (2, s) is rejected") {
  const TorusGrid g(2, 8);
  const ScalarField v = sample_potential({}, g);
  CHECK_THROWS_AS(verify_sobolev(v, ones(g), 2.0, {}), ConfigError);
  CHECK_THROWS_AS(verify_sobolev(v, ones(g), 4.0, {}), ConfigError);
}

TEST_CASE("classical Sobolev factor") {
  SUBCASE("zero potential gives one") {
    const auto c = classical_sobolev_constant({}, TorusGrid(2, 16), 2.0);
    CHECK(c.applicable);
    CHECK(c.factor == doctest::Approx(1.0));
  }
  SUBCASE("cosine is finite, with p above 2d/(d+2)") {
    PotentialSpec spec;
    spec.preset = Preset::cosine;
    const auto c = classical_sobolev_constant(spec, TorusGrid(2, 32), 2.0);
    REQUIRE(c.applicable);
    CHECK(c.p > 1.0);
    CHECK(c.p < 2.0);
    const double q = c.p / (2 - c.p);
    CHECK(q == doctest::Approx(c.q));
    // int e^{q cos(2 pi (x + y))} = I_0(q)
    CHECK(c.factor == doctest::Approx(std::pow(oracle::bessel_i0(q), (2 - c.p) / (2 * c.p))).epsilon(1e-10));
  }
  SUBCASE("e^{2V} = dist^-3 is not integrable in two dimensions") {
    PotentialSpec spec;
    spec.preset = Preset::log_singular;
    spec.beta = 1.5;
    spec.center = {0.5, 0.5, 0.0};
    const auto c = classical_sobolev_constant(spec, TorusGrid(2, 32), 2.0);
    CHECK_FALSE(c.applicable);
    CHECK_FALSE(c.reason.empty());
  }
  SUBCASE("r at most d/2 is not applicable") {
    CHECK_FALSE(classical_sobolev_constant({}, TorusGrid(2, 8), 1.0).applicable);
  }
}
