#include "homog/torus.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "homog/error.hpp"

namespace homog {

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 1 || dim > kMaxDim) {
    throw ConfigError("grid.dim", "dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (n < 2) {
    throw ConfigError("grid.n", "cells per side must be at least 2, got " + std::to_string(n));
  }
  h_ = 1.0 / n;
  std::size_t s = 1;
  for (int a = 0; a < kMaxDim; ++a) {
    strides_[a] = s;
    if (a < dim) s *= static_cast<std::size_t>(n);
  }
  total_ = s;
  volume_ = std::pow(h_, dim);
}

std::size_t TorusGrid::index(const CellIndex& c) const noexcept {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int ca = c[a] % n_;
    if (ca < 0) ca += n_;
    idx += static_cast<std::size_t>(ca) * strides_[a];
  }
  return idx;
}

CellIndex TorusGrid::coords(std::size_t index) const noexcept {
  CellIndex c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) c[a] = coord(index, a);
  return c;
}

std::size_t TorusGrid::neighbor(std::size_t index, int axis, int step) const noexcept {
  const int c = coord(index, axis);
  int m = (c + step) % n_;
  if (m < 0) m += n_;
  return index + (static_cast<std::size_t>(m) - static_cast<std::size_t>(c)) * strides_[axis];
}

Point TorusGrid::center(std::size_t index) const noexcept {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = (coord(index, a) + 0.5) * h_;
  return p;
}

TorusGrid build_grid(int dim, int n) { return TorusGrid(dim, n); }

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::potential: return "potential";
    case FieldKind::exp_potential: return "exp_potential";
    case FieldKind::weight: return "weight";
    case FieldKind::corrector: return "corrector";
    case FieldKind::density: return "density";
    case FieldKind::generic: return "generic";
  }
  return "generic";
}

ScalarField::ScalarField(TorusGrid grid, std::vector<double> values, FieldKind kind)
    : grid_(grid), values_(std::move(values)), kind_(kind) {
  if (values_.size() != grid_.total_cells()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values but the grid has " +
                                std::to_string(grid_.total_cells()) + " cells");
  }
  if (kind_ == FieldKind::exp_potential || kind_ == FieldKind::weight) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
        throw std::invalid_argument(std::string(to_string(kind_)) +
                                    " field must be strictly positive and finite (cell " +
                                    std::to_string(i) + ")");
      }
    }
  }
}

double ScalarField::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

double ScalarField::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

const char* to_string(Preset p) {
  switch (p) {
    case Preset::zero: return "zero";
    case Preset::cosine: return "cosine";
    case Preset::separable_cosine: return "separable_cosine";
    case Preset::checkerboard: return "checkerboard";
    case Preset::log_singular: return "log_singular";
  }
  return "zero";
}

Preset parse_preset(std::string_view name) {
  if (name == "zero") return Preset::zero;
  if (name == "cosine") return Preset::cosine;
  if (name == "separable_cosine") return Preset::separable_cosine;
  if (name == "checkerboard") return Preset::checkerboard;
  if (name == "log_singular") return Preset::log_singular;
  throw ConfigError("potential.preset",
                    "unknown preset '" + std::string(name) +
                        "' (expected zero, cosine, separable_cosine, checkerboard or log_singular)");
}

bool PotentialSpec::is_smooth() const noexcept {
  switch (preset) {
    case Preset::zero:
    case Preset::cosine:
    case Preset::separable_cosine:
      return true;
    case Preset::checkerboard:
      return false;
    case Preset::log_singular:
      return smoothing > 0.0;
  }
  return false;
}

std::vector<std::pair<std::string, std::string>> check_potential(const PotentialSpec& spec, int dim) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!std::isfinite(spec.amplitude)) out.emplace_back("potential.amplitude", "amplitude must be finite");
  if (spec.frequency < 1) out.emplace_back("potential.frequency", "frequency must be >= 1");
  if (!(spec.smoothing >= 0.0) || !std::isfinite(spec.smoothing)) {
    out.emplace_back("potential.smoothing", "smoothing must be a finite value >= 0");
  }
  for (int a = 0; a < kMaxDim; ++a) {
    if (!std::isfinite(spec.center[a])) out.emplace_back("potential.center", "center must be finite");
  }
  if (spec.preset == Preset::log_singular && !(spec.beta > 0.0 && spec.beta < dim)) {
    out.emplace_back("potential.beta", "log_singular requires beta < d and beta > 0 (beta = " +
                                           std::to_string(spec.beta) + ", d = " +
                                           std::to_string(dim) + "); e^V would not be integrable");
  }
  return out;
}

ScalarField sample_potential(const PotentialSpec& spec, const TorusGrid& grid) {
  const auto problems = check_potential(spec, grid.dim());
  if (!problems.empty()) throw ConfigError(problems.front().first, problems.front().second);

  const int n = grid.cells_per_side();
  const int d = grid.dim();
  const double h = grid.spacing();
  const double two_pi_f = 2.0 * std::numbers::pi * spec.frequency;

  // Displacement from the centre in cell units, wrapped to [-n/2, n/2).
  // Working in cell units keeps a one-cell shift of the centre an exact
  // permutation of the samples.
  std::array<double, kMaxDim> center_cells{};
  for (int a = 0; a < d; ++a) center_cells[a] = spec.center[a] * n;

  std::vector<double> values(grid.total_cells());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::array<double, kMaxDim> disp{};
    for (int a = 0; a < d; ++a) {
      double r = (grid.coord(i, a) + 0.5) - center_cells[a];
      r -= n * std::floor(r / n + 0.5);
      disp[a] = r * h;
    }
    double v = 0.0;
    switch (spec.preset) {
      case Preset::zero:
        break;
      case Preset::cosine: {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += disp[a];
        v = spec.amplitude * std::cos(two_pi_f * s);
        break;
      }
      case Preset::separable_cosine:
        for (int a = 0; a < d; ++a) v += spec.amplitude * std::cos(two_pi_f * disp[a]);
        break;
      case Preset::checkerboard: {
        long parity = 0;
        for (int a = 0; a < d; ++a) {
          double x = disp[a] - std::floor(disp[a]);
          parity += static_cast<long>(std::floor(2.0 * spec.frequency * x));
        }
        v = (parity % 2 == 0) ? spec.amplitude : -spec.amplitude;
        break;
      }
      case Preset::log_singular: {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += disp[a] * disp[a];
        if (spec.smoothing > 0.0) {
          v = -0.5 * spec.beta * std::log(r2 + spec.smoothing * spec.smoothing);
        } else {
          const double r = std::max(std::sqrt(r2), 0.5 * h);
          v = -spec.beta * std::log(r);
        }
        break;
      }
    }
    values[i] = v;
  }
  return ScalarField(grid, std::move(values), FieldKind::potential);
}

double integrate_exp(const ScalarField& potential, int sign) {
  if (potential.kind() != FieldKind::potential) {
    throw std::invalid_argument("integrate_exp expects a potential field");
  }
  if (sign != 1 && sign != -1) throw std::invalid_argument("integrate_exp sign must be +1 or -1");
  double s = 0.0;
  const auto v = potential.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = std::exp(sign * v[i]);
    if (!std::isfinite(e)) {
      throw RangeError(i, std::string("exp(") + (sign > 0 ? "+" : "-") + "V) overflows");
    }
    s += e;
  }
  return s * potential.grid().cell_volume();
}

ScalarField exp_field(const ScalarField& potential, int sign) {
  const auto v = potential.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(sign * v[i]);
    if (!std::isfinite(out[i]) || !(out[i] > 0.0)) {
      throw RangeError(i, std::string("exp(") + (sign > 0 ? "+" : "-") + "V) is not representable");
    }
  }
  return ScalarField(potential.grid(), std::move(out), FieldKind::exp_potential);
}

PeriodicPrefixSums::PeriodicPrefixSums(const ScalarField& field)
    : PeriodicPrefixSums(field.grid(), field.values()) {}

PeriodicPrefixSums::PeriodicPrefixSums(const TorusGrid& grid, std::span<const double> values)
    : grid_(grid), cell_values_(values.begin(), values.end()) {
  if (values.size() != grid.total_cells()) {
    throw std::invalid_argument("prefix sums: value count does not match the grid");
  }
  const int d = grid.dim();
  const std::size_t m = static_cast<std::size_t>(grid.cells_per_side()) + 1;
  std::size_t size = 1;
  for (int a = 0; a < kMaxDim; ++a) {
    table_strides_[a] = size;
    if (a < d) size *= m;
  }
  table_.assign(size, 0.0);

  for (double v : values) total_ += v;

  // Place values at upper corners, then run an inclusive scan per axis.
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t t = 0;
    for (int a = 0; a < d; ++a) t += static_cast<std::size_t>(grid.coord(i, a) + 1) * table_strides_[a];
    table_[t] = values[i];
  }
  for (int a = 0; a < d; ++a) {
    const std::size_t s = table_strides_[a];
    for (std::size_t t = 0; t < size; ++t) {
      const std::size_t c = (t / s) % m;
      if (c > 0) table_[t] += table_[t - s];
    }
  }
}

double PeriodicPrefixSums::table_at(const CellIndex& upper) const noexcept {
  std::size_t t = 0;
  for (int a = 0; a < grid_.dim(); ++a) t += static_cast<std::size_t>(upper[a]) * table_strides_[a];
  return table_[t];
}

double PeriodicPrefixSums::box_sum(const CellIndex& start, const CellIndex& length) const {
  const int d = grid_.dim();
  const int n = grid_.cells_per_side();
  // Per axis the periodic interval splits into at most two plain ones.
  std::array<std::array<std::array<int, 2>, 2>, kMaxDim> pieces{};
  std::array<int, kMaxDim> count{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    if (length[a] < 1 || length[a] > n) throw std::invalid_argument("box length out of range");
    int s = start[a] % n;
    if (s < 0) s += n;
    const int e = s + length[a];
    if (e <= n) {
      pieces[a][0] = {s, e};
      count[a] = 1;
    } else {
      pieces[a][0] = {s, n};
      pieces[a][1] = {0, e - n};
      count[a] = 2;
    }
  }
  double total = 0.0;
  std::array<int, kMaxDim> pick{0, 0, 0};
  while (true) {
    // Inclusion-exclusion over the 2^d corners of one plain sub-box.
    double sub = 0.0;
    for (int mask = 0; mask < (1 << d); ++mask) {
      CellIndex corner{0, 0, 0};
      int lows = 0;
      for (int a = 0; a < d; ++a) {
        const bool low = (mask >> a) & 1;
        corner[a] = low ? pieces[a][pick[a]][0] : pieces[a][pick[a]][1];
        lows += low;
      }
      sub += (lows % 2 == 0 ? 1.0 : -1.0) * table_at(corner);
    }
    total += sub;
    int a = 0;
    for (; a < d; ++a) {
      if (++pick[a] < count[a]) break;
      pick[a] = 0;
    }
    if (a == d) break;
  }
  return total;
}

double PeriodicPrefixSums::cube_average(const CellIndex& start, int k) const {
  const int n = grid_.cells_per_side();
  if (k == 1) return cell_values_[grid_.index(start)];
  if (k == n) return total_ / static_cast<double>(grid_.total_cells());
  const CellIndex len{k, k, k};
  return box_sum(start, len) / std::pow(static_cast<double>(k), grid_.dim());
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
  const auto& g = field.grid();
  out << "index";
  for (int a = 0; a < g.dim(); ++a) out << ",x_" << (a + 1);
  out << ",value\n";
  out.precision(17);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Point p = g.center(i);
    out << i;
    for (int a = 0; a < g.dim(); ++a) out << ',' << p[a];
    out << ',' << field[i] << '\n';
  }
}

}  // namespace homog
