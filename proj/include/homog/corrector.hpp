#pragma once

// Discrete cell problem for L = (1/2) e^V div(e^{-V} grad): a cell-centred
// finite-volume operator with harmonic-mean face weights, a projected
// conjugate-gradient solver for its singular systems, and the effective
// diffusivity assembled from the correctors.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/torus.hpp"

namespace homog {

using Matrix3 = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// (K f)_x = sum over faces a_face (f_x - f_nb) / h^2, symmetric positive
/// semidefinite with the constants as kernel. In the discrete inner
/// product h^d sum, <f, K f> = int |grad f|^2 e^{-V}, i.e. twice the
/// Dirichlet form.
class WeightedOperator {
 public:
  WeightedOperator(TorusGrid grid, std::array<std::vector<double>, kMaxDim> faces);

  const TorusGrid& grid() const noexcept { return grid_; }
  /// Weight of the face between cell i and cell i + e_axis, stored at i.
  std::span<const double> face_weights(int axis) const noexcept { return faces_[axis]; }

  void apply(std::span<const double> u, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> u) const;
  /// h^d sum_faces a (difference / h)^2 = 2 xi(u, u).
  double energy(std::span<const double> u) const;
  /// xi(u, g) = (1/2) h^d sum_faces a du dg / h^2.
  double dirichlet_form(std::span<const double> u, std::span<const double> g) const;
  std::vector<double> diagonal() const;

 private:
  TorusGrid grid_;
  std::array<std::vector<double>, kMaxDim> faces_;
};

/// Face weight = harmonic mean of e^{-V} in the two adjacent cells.
/// Throws RangeError naming a cell where e^{-V} or e^{V} is not finite.
WeightedOperator assemble_operator(const ScalarField& potential);

struct CgOptions {
  double tolerance = 1e-10;  // relative residual
  int max_iterations = 0;    // 0 means 50 n
  bool jacobi = true;
};

struct CgResult {
  std::vector<double> x;  // mean zero
  double relative_residual = 0.0;
  int iterations = 0;
};

/// Solves K x = rhs on the mean-zero subspace. rhs must have zero mean (up
/// to rounding); a visibly nonzero mean is an assembly bug and raises
/// std::logic_error. Throws SolverError when the iteration cap is hit.
CgResult solve_projected_cg(const WeightedOperator& op, std::span<const double> rhs,
                            const CgOptions& options = {});

/// b_i with K v_i + b_i = 0 the discrete form of div(e^{-V}(e_i + grad v_i)) = 0.
std::vector<double> corrector_source(const WeightedOperator& op, int direction);

struct CorrectorSolution {
  std::vector<ScalarField> components;  // v_1..v_d, kind corrector, mean zero
  /// gradients[i][axis][x] = (v_i(x + e_axis) - v_i(x)) / h.
  std::vector<std::array<std::vector<double>, kMaxDim>> gradients;
  std::vector<double> residual_norms;
  std::vector<int> iterations;
};

/// One component of the corrector (kind corrector, centred).
CgResult solve_corrector(const WeightedOperator& op, int direction, const CgOptions& options = {});
/// All d components; directions are solved concurrently.
CorrectorSolution solve_correctors(const WeightedOperator& op, const CgOptions& options = {});

struct DiffusivityMatrix {
  int dim = 0;
  int n = 0;
  std::string preset;
  Matrix3 sigma_bar{};           // effective diffusivity of X
  Matrix3 sigma_unnormalized{};  // int (e_i + grad v_i)(e_j + grad v_j) e^{-V}
  Matrix3 sigma_time_changed{};  // sigma_unnormalized / int w: covariance rate of M~
  double k_constant = 0.0;       // (int e^{-V})^{-1} int w
  double integral_exp_minus = 0.0;
  double integral_weight = 0.0;
  std::string normalization;
  std::vector<double> residuals;
  double min_eigenvalue = 0.0;
};

/// sigma_ij = h^d sum over faces a (delta_i + dv_i)(delta_j + dv_j), with
/// sigma_bar = k sigma / int w = sigma / int e^{-V}.
DiffusivityMatrix effective_diffusivity(const CorrectorSolution& sol, const ScalarField& potential,
                                        const ScalarField& weight);

struct RefinementRow {
  int n = 0;
  Matrix3 sigma_bar{};
  int max_iterations = 0;
  double max_residual = 0.0;
  double seconds = 0.0;
};

struct RefinementTable {
  int dim = 0;
  std::vector<RefinementRow> rows;
  /// Observed order per entry between consecutive rows, from successive
  /// differences (or from errors when an oracle is supplied).
  std::vector<Matrix3> observed_order;
  Matrix3 extrapolated{};
  std::optional<double> oracle;
  std::vector<double> oracle_errors;  // max |diag - oracle| per row
};

/// sigma_bar over increasing n. The weight does not enter sigma_bar, so
/// the study uses w = 1 for the k bookkeeping.
RefinementTable refinement_study(const PotentialSpec& spec, int dim, const std::vector<int>& n_list,
                                 const CgOptions& options = {},
                                 std::optional<double> diagonal_oracle = std::nullopt);

/// Smallest eigenvalue of the leading dim x dim block of a symmetric matrix.
double min_eigenvalue(const Matrix3& m, int dim);

}  // namespace homog
