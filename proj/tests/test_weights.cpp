#include <doctest.h>

#include <cmath>

#include "homog/error.hpp"
#include "homog/weights.hpp"
#include "oracles.hpp"

using namespace homog;

namespace {

ScalarField power_weight(int n, double a) {
  // |x - 1/2|^a sampled at cell centres; n even keeps the centre on a face
  const TorusGrid g(1, n);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = std::pow(std::abs((i + 0.5) / n - 0.5), a);
  return ScalarField(g, std::move(w), FieldKind::weight);
}

CubeSampling exhaustive() {
  CubeSampling s;
  s.exhaustive = true;
  return s;
}

}  // namespace

TEST_CASE("zero potential gives the unit weight") {
  const TorusGrid g(2, 16);
  const ScalarField v = sample_potential({}, g);
  const WeightReport r = weight_from_potential(v, {});
  for (double x : r.weight.values()) CHECK(x == 1.0);
  CHECK(r.upper_bound == 1.0);
  for (const auto& [p, c] : r.ap_constants) CHECK(c == 1.0);
  CHECK(*r.aps_constant <= 1.0 + 1e-15);
  CHECK(r.weight.kind() == FieldKind::weight);
}

TEST_CASE("cosine weight respects the global bound") {
  PotentialSpec spec;
  spec.preset = Preset::cosine;
  const ScalarField v = sample_potential(spec, TorusGrid(1, 256));
  const WeightReport r = weight_from_potential(v, {});
  const double bound = 1.0 / oracle::bessel_i0(1.0);
  for (double x : r.weight.values()) {
    CHECK(x > 0.0);
    CHECK(x <= bound + 1e-5);
    CHECK(x <= r.upper_bound * (1 + 1e-12));
  }
  CHECK_FALSE(r.s.has_value());
  CHECK_FALSE(r.aps_constant.has_value());
  CHECK(r.r_star > 2.0);
}

TEST_CASE("s and the default r* in two and three dimensions") {
  CHECK(*sobolev_exponent_s(2) == 4.0);
  CHECK(*sobolev_exponent_s(3) == 3.0);
  CHECK(default_r_star(2) == 3.0);
  CHECK(default_r_star(3) == 2.5);
  PotentialSpec spec;
  spec.preset = Preset::separable_cosine;
  WeightOptions opts;
  opts.sampling.random_cubes = 200;
  const WeightReport r = weight_from_potential(sample_potential(spec, TorusGrid(2, 16)), {}, opts);
  CHECK(*r.s == 4.0);
  CHECK(r.r_star > 2.0);
  CHECK(r.r_star < *r.s);
}

TEST_CASE("A_p constants match exhaustive enumeration in 1D") {
  PotentialSpec spec;
  spec.preset = Preset::cosine;
  spec.amplitude = 2.0;
  const ScalarField v = sample_potential(spec, TorusGrid(1, 48));
  const WeightReport r = weight_from_potential(v, {});
  const std::vector<double> w(r.weight.values().begin(), r.weight.values().end());
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    CHECK(check_muckenhoupt(r.weight, p, exhaustive()) ==
          doctest::Approx(oracle::muckenhoupt_1d_exhaustive(w, p)).epsilon(1e-12));
  }
}

TEST_CASE("A_p constants decrease in p on a fixed cube sample") {
  PotentialSpec spec;
  spec.preset = Preset::separable_cosine;
  const WeightReport r = weight_from_potential(sample_potential(spec, TorusGrid(2, 32)), {});
  CubeSampling s;
  s.random_cubes = 2000;
  double prev = INFINITY;
  for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
    const double c = check_muckenhoupt(r.weight, p, s);
    CHECK(c >= 1.0 - 1e-12);
    CHECK(c <= prev * (1 + 1e-12));
    prev = c;
  }
}

TEST_CASE("power weights: stable inside A_2, growing outside") {
  std::vector<double> inside, outside;
  for (int n : {64, 128, 256}) {
    inside.push_back(check_muckenhoupt(power_weight(n, 0.5), 2.0, exhaustive()));
    outside.push_back(check_muckenhoupt(power_weight(n, 1.5), 2.0, exhaustive()));
  }
  CHECK(std::abs(inside[2] / inside[1] - 1.0) < 0.05);
  CHECK(outside[1] > 1.2 * outside[0]);
  CHECK(outside[2] > 1.2 * outside[1]);
}

TEST_CASE("exponents below one are rejected") {
  const ScalarField w = power_weight(16, 0.5);
  CHECK_THROWS_AS(check_muckenhoupt(w, 0.5, {}), ConfigError);
}

TEST_CASE("A_{2,s,1/d}") {
  SUBCASE("rejected in one dimension") {
    const ScalarField v = sample_potential({}, TorusGrid(1, 16));
    const ScalarField w(v.grid(), std::vector<double>(16, 1.0), FieldKind::weight);
    CHECK_THROWS_AS(check_aps(w, v, 4.0, 2.0, {}), ConfigError);
  }
  SUBCASE("zero potential ratios stay below one") {
    const ScalarField v = sample_potential({}, TorusGrid(2, 16));
    const ScalarField w(v.grid(), std::vector<double>(256, 1.0), FieldKind::weight);
    CHECK(check_aps(w, v, 4.0, 2.0, exhaustive()) <= 1.0 + 1e-14);
  }
  SUBCASE("separable cosine stays below the global bound") {
    PotentialSpec spec;
    spec.preset = Preset::separable_cosine;
    const ScalarField v = sample_potential(spec, TorusGrid(2, 32));
    const WeightReport r = weight_from_potential(v, {});
    const double bound = std::pow(integrate_exp(v, +1), 0.5 - 1.0 / 4.0);
    CHECK(check_aps(r.weight, v, 4.0, 2.0, exhaustive()) <= bound + 1e-9);
    CHECK(*r.aps_bound == doctest::Approx(bound));
  }
  SUBCASE("log singular potential: finite and stable under refinement") {
    PotentialSpec spec;
    spec.preset = Preset::log_singular;
    spec.beta = 1.0;
    spec.center = {0.5, 0.5, 0.0};
    CubeSampling dyadic_only;
    dyadic_only.random_cubes = 0;
    std::vector<double> sup;
    for (int n : {64, 128}) {
      const ScalarField v = sample_potential(spec, TorusGrid(2, n));
      const WeightReport r = weight_from_potential(v, {}, {{}, dyadic_only, false});
      sup.push_back(check_aps(r.weight, v, 4.0, 2.0, dyadic_only));
      CHECK(std::isfinite(sup.back()));
    }
    CHECK(std::abs(sup[1] / sup[0] - 1.0) < 0.1);
  }
}
