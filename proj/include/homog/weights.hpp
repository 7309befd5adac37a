#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "homog/maximal.hpp"
#include "homog/torus.hpp"

namespace homog {

/// Which cubes stand in for "all cubes" when estimating a supremum.
/// The estimate is a lower bound on the continuum constant.
struct CubeSampling {
  bool dyadic = true;               // all dyadic cubes n/2^l
  std::size_t random_cubes = 10000; // plus uniformly random (side, corner)
  std::uint64_t seed = 20240611;
  bool exhaustive = false;          // every (side, corner); overrides the above
};

struct CubeSupremum {
  double value = 0.0;
  CellIndex start{0, 0, 0};
  int length = 0;
  std::size_t cubes_tested = 0;
};

/// Sup over sampled cubes of the A_p product
///   (avg w)(avg w^{-1/(p-1)})^{p-1}   for p > 1,
///   (avg w)/(min w)                   for p = 1.
/// Throws ConfigError for p < 1 and std::invalid_argument when w is not
/// strictly positive.
CubeSupremum muckenhoupt_supremum(const ScalarField& w, double p, const CubeSampling& sample);
double check_muckenhoupt(const ScalarField& w, double p, const CubeSampling& sample);

/// Sup over sampled cubes I of
///   (int_I w)^{1/s} (int_I e^{V/(p-1)})^{(p-1)/p} / |I|^{1-1/d}.
/// Rejects d = 1 (no admissible s) and p <= 1.
CubeSupremum aps_supremum(const ScalarField& w, const ScalarField& potential, double s, double p,
                          const CubeSampling& sample);
double check_aps(const ScalarField& w, const ScalarField& potential, double s, double p,
                 const CubeSampling& sample);

/// s = 2d/(d-1); empty for d = 1.
std::optional<double> sobolev_exponent_s(int dim);
/// Midpoint of (2, s); 4 in one dimension where every r* > 2 is admissible.
double default_r_star(int dim);

struct WeightOptions {
  std::vector<double> ap_exponents{2.0, 3.0};
  CubeSampling sampling;
  bool coifman_rochberg = true;  // A_1 constant of M(e^V)^{1/2}
};

struct WeightReport {
  ScalarField weight;  // kind = weight
  double upper_bound = 0.0;       // (int e^V)^{-1}
  double integral_exp_plus = 0.0; // int e^V
  std::map<double, double> ap_constants;
  std::optional<double> aps_constant;
  std::optional<double> aps_bound;  // (int e^V)^{1/2 - 1/s}
  std::optional<double> s;
  double r_star = 0.0;
  std::optional<double> coifman_rochberg_a1;
};

/// w = 1 / M(e^V) together with its bound and the sampled constants.
WeightReport weight_from_potential(const ScalarField& potential, const MaximalConfig& cfg,
                                   const WeightOptions& options = {});

namespace detail {
/// The sampled cube family as (corner, side) pairs, deterministic in seed.
std::vector<std::pair<CellIndex, int>> sample_cubes(const TorusGrid& grid, const CubeSampling& sample);
}  // namespace detail

}  // namespace homog
