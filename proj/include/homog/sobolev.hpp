#pragma once

// Empirical weighted Sobolev / Poincare constants over random centred
// trigonometric polynomials, and the unweighted Holder-route constant.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/torus.hpp"

namespace homog {

/// Random sparse trigonometric polynomials
///   f(x) = sum_j a_j cos(2 pi k_j.x) + b_j sin(2 pi k_j.x),
/// with k_j uniform in [-K, K]^d \ {0}, a_j, b_j ~ N(0, 1), and the grid
/// mean subtracted after sampling.
struct TestFamily {
  std::size_t count = 1000;
  int max_frequency = 0;  // K; 0 means n/4
  int min_terms = 1;
  int max_terms = 4;
  std::uint64_t seed = 7;
};

struct TrigTerm {
  std::array<int, kMaxDim> k{0, 0, 0};
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

using TrigPolynomial = std::vector<TrigTerm>;

std::string describe(const TrigPolynomial& f, int dim);

/// The family members, deterministic in the seed and independent of n
/// once K is fixed.
std::vector<TrigPolynomial> draw_family(const TestFamily& family, int dim, int n);

/// Cell-centre samples of f, mean removed.
std::vector<double> sample_centered(const TrigPolynomial& f, const TorusGrid& grid);

struct InequalityReport {
  std::size_t num_test_functions = 0;
  double max_ratio = 0.0;           // empirical Sobolev constant
  std::optional<std::string> violating_function;  // maximiser, or the first infinite ratio
  double poincare_max_ratio = 0.0;
  std::size_t infinite_ratios = 0;
  double r_star = 0.0;
  std::vector<double> ratios;       // per test function, family order
};

/// (int |f|^r w)^{2/r} / int |grad f|^2 e^{-V} for a single centred f, with
/// the same face-difference energy as the corrector operator. f = 0 gives 0.
double sobolev_ratio(const ScalarField& potential, const ScalarField& weight, std::span<const double> f,
                     double r_star);

/// Throws ConfigError("sobolev.r_star") unless 2 < r_star (and r_star < s
/// when d >= 2).
InequalityReport verify_sobolev(const ScalarField& potential, const ScalarField& weight, double r_star,
                                const TestFamily& family);

struct ClassicalSobolev {
  bool applicable = false;
  std::string reason;
  double factor = 0.0;  // (int e^{qV})^{(2-p)/(2p)}
  double p = 0.0;       // exponent just above 2d/(d+2)
  double q = 0.0;       // p / (2 - p), the power of e^V that is integrated
  std::vector<double> integrals;  // int e^{qV} at n, 2n, 4n
};

/// Factor picked up when the unweighted Sobolev inequality is combined with
/// Holder through L^p, p just above 2d/(d+2). Needs e^V in L^r with
/// r > d/2, judged from the quadrature of e^{qV} at n, 2n and 4n.
ClassicalSobolev classical_sobolev_constant(const PotentialSpec& spec, const TorusGrid& grid, double r);

}  // namespace homog
