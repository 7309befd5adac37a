#include "homog/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "homog/error.hpp"
#include "homog/parallel.hpp"
#include "homog/simd.hpp"

namespace homog {

std::vector<int> resolve_lengths(const MaximalConfig& cfg, int n) {
  std::vector<int> out;
  if (cfg.lengths.empty()) {
    out.resize(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) out[static_cast<std::size_t>(k - 1)] = k;
    return out;
  }
  for (int k : cfg.lengths) {
    if (k < 1 || k > n) {
      throw ConfigError("maximal.lengths", "cube side " + std::to_string(k) +
                                               " outside 1.." + std::to_string(n));
    }
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

std::vector<double> cube_averages(const PeriodicPrefixSums& sums, int k) {
  const TorusGrid& g = sums.grid();
  std::vector<double> out(g.total_cells());
  const std::size_t chunk = std::max<std::size_t>(1, g.total_cells() / 64);
  const std::size_t chunks = (g.total_cells() + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(g.total_cells(), (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) out[i] = sums.cube_average(g.coords(i), k);
  });
  return out;
}

void window_max_queue(std::span<double> values, const TorusGrid& grid, int axis, int k) {
  const int n = grid.cells_per_side();
  const std::size_t stride = grid.stride(axis);
  std::vector<double> line(static_cast<std::size_t>(n));
  std::vector<double> result(static_cast<std::size_t>(n));
  std::deque<int> window;  // positions in the extended sequence, values decreasing
  for (std::size_t base = 0; base < grid.total_cells(); ++base) {
    if (grid.coord(base, axis) != 0) continue;
    for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = values[base + static_cast<std::size_t>(i) * stride];
    window.clear();
    auto at = [&](int p) { return line[static_cast<std::size_t>(((p % n) + n) % n)]; };
    for (int p = -(k - 1); p < n; ++p) {
      const double v = at(p);
      while (!window.empty() && at(window.back()) <= v) window.pop_back();
      window.push_back(p);
      while (window.front() <= p - k) window.pop_front();
      if (p >= 0) result[static_cast<std::size_t>(p)] = at(window.front());
    }
    for (int i = 0; i < n; ++i) values[base + static_cast<std::size_t>(i) * stride] = result[static_cast<std::size_t>(i)];
  }
}

void window_max_rows(std::span<double> values, const TorusGrid& grid, int axis, int k) {
  if (axis < 1) throw std::invalid_argument("window_max_rows needs a non-contiguous axis");
  const auto& ker = simd::kernels();
  const std::size_t n = static_cast<std::size_t>(grid.cells_per_side());
  const std::size_t row = grid.stride(axis);  // contiguous run sharing one axis coordinate
  const std::size_t block = row * n;
  const std::size_t blocks = grid.total_cells() / block;
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t len = n + kk - 1;  // extended periodic sequence

  std::vector<double> prefix(len * row);
  std::vector<double> suffix(len * row);
  for (std::size_t b = 0; b < blocks; ++b) {
    double* data = values.data() + b * block;
    auto src = [&](std::size_t q) { return data + ((q + n - (kk - 1) % n) % n) * row; };
    for (std::size_t start = 0; start < len; start += kk) {
      const std::size_t stop = std::min(len, start + kk);
      std::copy_n(src(start), row, prefix.data() + start * row);
      for (std::size_t q = start + 1; q < stop; ++q) {
        ker.max(prefix.data() + (q - 1) * row, src(q), prefix.data() + q * row, row);
      }
      std::copy_n(src(stop - 1), row, suffix.data() + (stop - 1) * row);
      for (std::size_t q = stop - 1; q-- > start;) {
        ker.max(suffix.data() + (q + 1) * row, src(q), suffix.data() + q * row, row);
      }
    }
    // Window ending at q covers [q-k+1, q]: suffix of its first block part
    // and prefix of its last.
    for (std::size_t q = kk - 1; q < len; ++q) {
      ker.max(suffix.data() + (q + 1 - kk) * row, prefix.data() + q * row,
              data + (q + 1 - kk) * row, row);
    }
  }
}

}  // namespace detail

ScalarField maximal_function(const ScalarField& f, const MaximalConfig& cfg) {
  const TorusGrid& g = f.grid();
  const auto vals = f.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!(vals[i] >= 0.0)) {
      throw std::invalid_argument("maximal_function: negative or NaN value at cell " + std::to_string(i));
    }
  }
  const std::vector<int> lengths = resolve_lengths(cfg, g.cells_per_side());
  const PeriodicPrefixSums sums(f);
  std::vector<double> m(g.total_cells(), 0.0);

  if (cfg.exhaustive) {
    for (int k : lengths) {
      for (std::size_t s = 0; s < g.total_cells(); ++s) {
        const CellIndex start = g.coords(s);
        const double avg = sums.cube_average(start, k);
        CellIndex off{0, 0, 0};
        const std::size_t count = static_cast<std::size_t>(std::pow(k, g.dim()));
        for (std::size_t j = 0; j < count; ++j) {
          std::size_t r = j;
          CellIndex c{0, 0, 0};
          for (int a = 0; a < g.dim(); ++a) {
            off[a] = static_cast<int>(r % static_cast<std::size_t>(k));
            r /= static_cast<std::size_t>(k);
            c[a] = start[a] + off[a];
          }
          double& slot = m[g.index(c)];
          slot = avg > slot ? avg : slot;
        }
      }
    }
  } else {
    const auto& ker = simd::kernels();
    for (int k : lengths) {
      std::vector<double> avg = detail::cube_averages(sums, k);
      detail::window_max_queue(avg, g, 0, k);
      for (int a = 1; a < g.dim(); ++a) detail::window_max_rows(avg, g, a, k);
      ker.max(m.data(), avg.data(), m.data(), m.size());
    }
  }
  return ScalarField(g, std::move(m), FieldKind::generic);
}

}  // namespace homog
