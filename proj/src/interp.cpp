#include "homog/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "homog/error.hpp"

namespace homog {

const char* to_string(Interpolation mode) {
  return mode == Interpolation::nearest_cell ? "nearest-cell" : "multilinear";
}

Interpolation parse_interpolation(std::string_view name) {
  if (name == "nearest-cell" || name == "nearest") return Interpolation::nearest_cell;
  if (name == "multilinear") return Interpolation::multilinear;
  throw ConfigError("simulation.interpolation",
                    "unknown interpolation '" + std::string(name) + "' (nearest-cell, multilinear)");
}

FieldStack::FieldStack(const TorusGrid& grid, const std::vector<std::span<const double>>& channels)
    : grid_(grid), channels_(static_cast<int>(channels.size())) {
  if (channels.empty() || channels.size() > 16) throw std::invalid_argument("FieldStack: 1 to 16 channels");
  const std::size_t cells = grid.total_cells();
  data_.resize(cells * channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != cells) throw std::invalid_argument("FieldStack: channel has the wrong size");
    for (std::size_t x = 0; x < cells; ++x) data_[x * channels.size() + c] = channels[c][x];
  }
}

namespace {

struct Stencil {
  std::array<int, kMaxDim> lo{};
  std::array<int, kMaxDim> hi{};
  std::array<double, kMaxDim> t{};
};

// Lower corner index and weight along one axis. Points of [0,1) land in
// [-1, n-1], so the modulo is only needed for points outside the cell.
inline void locate_axis(double y, int n, int& lo, int& hi, double& t) {
  const double pos = y * n - 0.5;
  const double fl = std::floor(pos);
  t = pos - fl;
  int i = static_cast<int>(fl);
  if (i < 0 || i >= n) {
    i %= n;
    if (i < 0) i += n;
  }
  lo = i;
  hi = (i + 1 == n) ? 0 : i + 1;
}

Stencil locate(const TorusGrid& g, const Point& y) {
  Stencil s;
  const int n = g.cells_per_side();
  for (int a = 0; a < g.dim(); ++a) locate_axis(y[a], n, s.lo[a], s.hi[a], s.t[a]);
  return s;
}

// Multilinear values with the dimension fixed at compile time.
template <int D>
void multilinear(const TorusGrid& g, const double* data, std::size_t ch, const Point& y, double* value) {
  constexpr int corners = 1 << D;
  const int n = g.cells_per_side();
  std::size_t lo[D], hi[D];
  double t[D];
  for (int a = 0; a < D; ++a) {
    int l, h;
    locate_axis(y[a], n, l, h, t[a]);
    lo[a] = static_cast<std::size_t>(l) * g.stride(a);
    hi[a] = static_cast<std::size_t>(h) * g.stride(a);
  }
  const double* at[corners];
  for (int m = 0; m < corners; ++m) {
    std::size_t idx = 0;
    for (int a = 0; a < D; ++a) idx += (m >> a) & 1 ? hi[a] : lo[a];
    at[m] = data + idx * ch;
  }
  for (std::size_t c = 0; c < ch; ++c) {
    double v[corners];
    for (int m = 0; m < corners; ++m) v[m] = at[m][c];
    int live = corners;
    for (int a = 0; a < D; ++a) {
      live >>= 1;
      for (int m = 0; m < live; ++m) v[m] = v[2 * m] + t[a] * (v[2 * m + 1] - v[2 * m]);
    }
    value[c] = v[0];
  }
}

}  // namespace

void FieldStack::evaluate(const Point& y, Interpolation mode, double* value) const noexcept {
  const int d = grid_.dim();
  const int n = grid_.cells_per_side();
  const std::size_t ch = static_cast<std::size_t>(channels_);
  if (mode == Interpolation::nearest_cell) {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      int i = static_cast<int>(std::floor(y[a] * n));
      i = ((i % n) + n) % n;
      idx += static_cast<std::size_t>(i) * grid_.stride(a);
    }
    for (std::size_t c = 0; c < ch; ++c) value[c] = data_[idx * ch + c];
    return;
  }
  // Reduce the 2^d corners one axis at a time with a + t (b - a).
  switch (d) {
    case 1: return multilinear<1>(grid_, data_.data(), ch, y, value);
    case 2: return multilinear<2>(grid_, data_.data(), ch, y, value);
    default: return multilinear<3>(grid_, data_.data(), ch, y, value);
  }
}

void FieldStack::evaluate_with_gradient(const Point& y, double* value, double* grad) const noexcept {
  const int d = grid_.dim();
  const double n = grid_.cells_per_side();
  const std::size_t ch = static_cast<std::size_t>(channels_);
  const Stencil s = locate(grid_, y);
  const int corners = 1 << d;
  double base[8 * 16];
  for (int m = 0; m < corners; ++m) {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) {
      idx += static_cast<std::size_t>((m >> a) & 1 ? s.hi[a] : s.lo[a]) * grid_.stride(a);
    }
    for (std::size_t c = 0; c < ch; ++c) base[m * ch + c] = data_[idx * ch + c];
  }
  // axis == -1 gives the value; otherwise the derivative along that axis.
  for (int which = -1; which < d; ++which) {
    double corner[8 * 16];
    std::copy(base, base + corners * ch, corner);
    int live = corners;
    for (int a = 0; a < d; ++a) {
      live >>= 1;
      for (int m = 0; m < live; ++m) {
        for (std::size_t c = 0; c < ch; ++c) {
          const double lo = corner[(2 * m) * ch + c];
          const double hi = corner[(2 * m + 1) * ch + c];
          corner[m * ch + c] = (a == which) ? (hi - lo) * n : lo + s.t[a] * (hi - lo);
        }
      }
    }
    for (std::size_t c = 0; c < ch; ++c) {
      if (which < 0) {
        value[c] = corner[c];
      } else {
        grad[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(which)] = corner[c];
      }
    }
  }
}

std::vector<std::vector<double>> centred_gradient(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(g.dim()), std::vector<double>(f.size()));
  const double inv = 0.5 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t x = 0; x < f.size(); ++x) {
      out[static_cast<std::size_t>(a)][x] = (f[g.neighbor(x, a, 1)] - f[g.neighbor(x, a, -1)]) * inv;
    }
  }
  return out;
}

}  // namespace homog
