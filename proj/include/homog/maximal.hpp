#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "homog/torus.hpp"

namespace homog {

/// Cube family for the discrete uncentred maximal function: grid-aligned
/// periodic cubes whose side is a whole number of cells.
struct MaximalConfig {
  std::vector<int> lengths;  // side lengths in cells; empty means 1..n
  bool exhaustive = false;   // enumerate every (length, position) pair
};

/// Resolved, sorted, de-duplicated side lengths. Throws ConfigError
/// ("maximal.lengths") when a length is outside 1..n.
std::vector<int> resolve_lengths(const MaximalConfig& cfg, int n);

/// M(f)(x) = max over configured side lengths k and grid-aligned periodic
/// cubes of side k containing cell x of the cube average of f.
/// Rejects negative inputs.
ScalarField maximal_function(const ScalarField& f, const MaximalConfig& cfg);

namespace detail {

/// Per-length cube averages indexed by the cube's lower corner.
std::vector<double> cube_averages(const PeriodicPrefixSums& sums, int k);

/// out[x] = max(values[x - j e_axis], j = 0..k-1), periodic.
/// Monotone-queue reference, one strided line at a time.
void window_max_queue(std::span<double> values, const TorusGrid& grid, int axis, int k);
/// Same result via block prefix/suffix maxima applied to whole contiguous
/// rows with the SIMD max kernel. Requires axis >= 1.
void window_max_rows(std::span<double> values, const TorusGrid& grid, int axis, int k);

}  // namespace detail

}  // namespace homog
