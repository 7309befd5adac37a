#pragma once

// Point lookups of cell-centred fields along continuous paths.

#include <span>
#include <string_view>
#include <vector>

#include "homog/torus.hpp"

namespace homog {

enum class Interpolation { nearest_cell, multilinear };

const char* to_string(Interpolation mode);
Interpolation parse_interpolation(std::string_view name);

/// Several fields on one grid, stored interleaved per cell so that a lookup
/// touches each corner once for all channels.
class FieldStack {
 public:
  FieldStack(const TorusGrid& grid, const std::vector<std::span<const double>>& channels);

  const TorusGrid& grid() const noexcept { return grid_; }
  int channels() const noexcept { return channels_; }

  /// Values at a point of [0,1)^d. Multilinear interpolation between cell
  /// centres is periodic and reproduces constants exactly; nearest-cell
  /// returns the value of the cell containing y.
  void evaluate(const Point& y, Interpolation mode, double* value) const noexcept;

  /// Multilinear values and the exact gradient of the interpolant,
  /// grad[c * d + axis].
  void evaluate_with_gradient(const Point& y, double* value, double* grad) const noexcept;

 private:
  TorusGrid grid_;
  int channels_;
  std::vector<double> data_;  // cell-major, channels_ per cell
};

/// Centred differences (f(x+h e_a) - f(x-h e_a)) / 2h along each axis.
std::vector<std::vector<double>> centred_gradient(const ScalarField& f);

}  // namespace homog
