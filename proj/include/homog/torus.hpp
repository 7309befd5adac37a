#pragma once

// Uniform cell-centred grids on the unit torus [0,1)^d, scalar fields on
// them, potential presets and periodic box sums.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homog {

inline constexpr int kMaxDim = 3;
using Point = std::array<double, kMaxDim>;
using CellIndex = std::array<int, kMaxDim>;

class TorusGrid {
 public:
  /// Throws ConfigError unless 1 <= dim <= 3 and n >= 2.
  TorusGrid(int dim, int n);

  int dim() const noexcept { return dim_; }
  int cells_per_side() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  std::size_t total_cells() const noexcept { return total_; }
  /// h^d, the quadrature weight of one cell.
  double cell_volume() const noexcept { return volume_; }
  std::size_t stride(int axis) const noexcept { return strides_[axis]; }

  std::size_t index(const CellIndex& c) const noexcept;
  CellIndex coords(std::size_t index) const noexcept;
  int coord(std::size_t index, int axis) const noexcept {
    return static_cast<int>((index / strides_[axis]) % static_cast<std::size_t>(n_));
  }
  /// Periodic neighbour `step` cells away along `axis` (any sign, any size).
  std::size_t neighbor(std::size_t index, int axis, int step) const noexcept;
  Point center(std::size_t index) const noexcept;

  bool operator==(const TorusGrid& o) const noexcept { return dim_ == o.dim_ && n_ == o.n_; }

 private:
  int dim_;
  int n_;
  double h_;
  double volume_;
  std::size_t total_;
  std::array<std::size_t, kMaxDim> strides_{};
};

TorusGrid build_grid(int dim, int n);

enum class FieldKind { potential, exp_potential, weight, corrector, density, generic };

const char* to_string(FieldKind kind);

/// Per-cell values on a grid; immutable after construction.
class ScalarField {
 public:
  /// Throws std::invalid_argument on a length mismatch, and when a kind
  /// that must be positive (exp_potential, weight) holds a value that is
  /// not strictly positive and finite.
  ScalarField(TorusGrid grid, std::vector<double> values, FieldKind kind);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  FieldKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// h^d * sum of values.
  double integral() const;
  double mean() const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
  FieldKind kind_;
};

enum class Preset { zero, cosine, separable_cosine, checkerboard, log_singular };

const char* to_string(Preset p);
Preset parse_preset(std::string_view name);

/// Concrete periodic potentials.
///   cosine:           A cos(2 pi f (x_1 + ... + x_d - c))
///   separable_cosine: A sum_k cos(2 pi f (x_k - c_k))
///   checkerboard:     +A / -A on the 2f-per-side checkerboard anchored at c
///   log_singular:     -beta log|x - c|_torus, so e^V = dist^-beta
/// With smoothing s > 0 the log_singular distance is replaced by
/// sqrt(dist^2 + s^2); with s = 0 it is floored at h/2.
struct PotentialSpec {
  Preset preset = Preset::zero;
  double amplitude = 1.0;
  int frequency = 1;
  double beta = 1.0;
  Point center{0.0, 0.0, 0.0};
  double smoothing = 0.0;

  /// True for presets whose sampled gradient is bounded independently of
  /// the grid (the diffusion simulator needs a drift).
  bool is_smooth() const noexcept;
};

/// Every invariant violation of `spec` at dimension `dim`, as
/// (config key, message) pairs. Empty when valid.
std::vector<std::pair<std::string, std::string>> check_potential(const PotentialSpec& spec, int dim);

/// Values of V at the cell centres. Throws ConfigError when invalid.
ScalarField sample_potential(const PotentialSpec& spec, const TorusGrid& grid);

/// h^d * sum exp(sign * V). Throws RangeError naming the first cell whose
/// exponential overflows.
double integrate_exp(const ScalarField& potential, int sign);

/// exp(sign * V) cell by cell, tagged exp_potential.
ScalarField exp_field(const ScalarField& potential, int sign);

/// Sums over axis-aligned periodic boxes of whole cells.
class PeriodicPrefixSums {
 public:
  explicit PeriodicPrefixSums(const ScalarField& field);
  PeriodicPrefixSums(const TorusGrid& grid, std::span<const double> values);

  /// Sum over the box with lower corner `start` (any integers, wrapped) and
  /// side lengths `length` (1..n per axis).
  double box_sum(const CellIndex& start, const CellIndex& length) const;
  /// Cube of side k starting at `start`; k = 1 and k = n are served from the
  /// cell value and the plain total so they are exact.
  double cube_average(const CellIndex& start, int k) const;
  double total() const noexcept { return total_; }
  const TorusGrid& grid() const noexcept { return grid_; }

 private:
  double table_at(const CellIndex& upper) const noexcept;

  TorusGrid grid_;
  std::vector<double> cell_values_;
  std::vector<double> table_;  // (n+1)^d inclusive prefix sums
  std::array<std::size_t, kMaxDim> table_strides_{};
  double total_ = 0.0;
};

/// CSV dump: `index,x_1,..,x_d,value` with cell-centre coordinates.
void write_field_csv(std::ostream& out, const ScalarField& field);

}  // namespace homog
