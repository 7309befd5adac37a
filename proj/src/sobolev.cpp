#include "homog/sobolev.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "homog/corrector.hpp"
#include "homog/error.hpp"
#include "homog/parallel.hpp"
#include "homog/weights.hpp"

namespace homog {

std::string describe(const TrigPolynomial& f, int dim) {
  std::ostringstream out;
  out.precision(6);
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (j) out << " + ";
    out << "(" << f[j].cos_coeff << ")cos + (" << f[j].sin_coeff << ")sin @k=(";
    for (int a = 0; a < dim; ++a) out << (a ? "," : "") << f[j].k[a];
    out << ")";
  }
  return out.str();
}

std::vector<TrigPolynomial> draw_family(const TestFamily& family, int dim, int n) {
  const int kmax = family.max_frequency > 0 ? family.max_frequency : std::max(1, n / 4);
  if (family.min_terms < 1 || family.max_terms < family.min_terms) {
    throw ConfigError("sobolev.terms", "need 1 <= min_terms <= max_terms");
  }
  std::mt19937_64 rng(family.seed);
  std::uniform_int_distribution<int> freq(-kmax, kmax);
  std::uniform_int_distribution<int> terms(family.min_terms, family.max_terms);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<TrigPolynomial> out(family.count);
  for (auto& f : out) {
    f.resize(static_cast<std::size_t>(terms(rng)));
    for (auto& t : f) {
      bool zero = true;
      while (zero) {
        for (int a = 0; a < dim; ++a) t.k[a] = freq(rng);
        zero = true;
        for (int a = 0; a < dim; ++a) zero = zero && t.k[a] == 0;
      }
      t.cos_coeff = gauss(rng);
      t.sin_coeff = gauss(rng);
    }
  }
  return out;
}

std::vector<double> sample_centered(const TrigPolynomial& f, const TorusGrid& grid) {
  const int n = grid.cells_per_side();
  const int d = grid.dim();
  // k.x at cell centres is m / (2n) with integer m, so a table of 2n
  // angles serves every term.
  const int period = 2 * n;
  std::vector<double> cs(static_cast<std::size_t>(period)), sn(static_cast<std::size_t>(period));
  for (int m = 0; m < period; ++m) {
    const double ang = 2.0 * std::numbers::pi * m / period;
    cs[static_cast<std::size_t>(m)] = std::cos(ang);
    sn[static_cast<std::size_t>(m)] = std::sin(ang);
  }
  std::vector<double> out(grid.total_cells(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    const CellIndex c = grid.coords(x);
    double v = 0.0;
    for (const auto& t : f) {
      long long m = 0;
      for (int a = 0; a < d; ++a) m += static_cast<long long>(t.k[a]) * (2 * c[a] + 1);
      m %= period;
      if (m < 0) m += period;
      v += t.cos_coeff * cs[static_cast<std::size_t>(m)] + t.sin_coeff * sn[static_cast<std::size_t>(m)];
    }
    out[x] = v;
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

namespace {

struct Ratios {
  double sobolev = 0.0;
  double poincare = 0.0;
};

Ratios ratios_for(const WeightedOperator& op, std::span<const double> w, std::span<const double> f,
                  double r_star) {
  const TorusGrid& g = op.grid();
  double lr = 0.0;
  double l2 = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double a = std::abs(f[x]);
    lr += std::pow(a, r_star) * w[x];
    l2 += a * a * w[x];
  }
  lr *= g.cell_volume();
  l2 *= g.cell_volume();
  if (lr == 0.0) return {};
  const double energy = op.energy(f);
  if (!(energy > 0.0)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  return {std::pow(lr, 2.0 / r_star) / energy, l2 / energy};
}

}  // namespace

double sobolev_ratio(const ScalarField& potential, const ScalarField& weight, std::span<const double> f,
                     double r_star) {
  const WeightedOperator op = assemble_operator(potential);
  return ratios_for(op, weight.values(), f, r_star).sobolev;
}

InequalityReport verify_sobolev(const ScalarField& potential, const ScalarField& weight, double r_star,
                                const TestFamily& family) {
  const TorusGrid& g = potential.grid();
  if (!(weight.grid() == g)) throw std::invalid_argument("verify_sobolev: grid mismatch");
  if (!(r_star > 2.0)) throw ConfigError("sobolev.r_star", "r_star must exceed 2");
  if (const auto s = sobolev_exponent_s(g.dim()); s && !(r_star < *s)) {
    throw ConfigError("sobolev.r_star", "r_star must lie below s = " + std::to_string(*s));
  }
  const WeightedOperator op = assemble_operator(potential);
  const auto fam = draw_family(family, g.dim(), g.cells_per_side());
  std::vector<Ratios> per(fam.size());
  parallel_for(fam.size(), [&](std::size_t i) {
    const auto f = sample_centered(fam[i], g);
    per[i] = ratios_for(op, weight.values(), f, r_star);
  });

  InequalityReport rep;
  rep.num_test_functions = fam.size();
  rep.r_star = r_star;
  std::size_t arg = 0;
  bool have_arg = false;
  for (std::size_t i = 0; i < per.size(); ++i) {
    rep.ratios.push_back(per[i].sobolev);
    if (std::isinf(per[i].sobolev)) {
      if (rep.infinite_ratios++ == 0) rep.violating_function = "infinite ratio: " + describe(fam[i], g.dim());
      continue;
    }
    if (!have_arg || per[i].sobolev > rep.max_ratio) {
      rep.max_ratio = per[i].sobolev;
      arg = i;
      have_arg = true;
    }
    rep.poincare_max_ratio = std::max(rep.poincare_max_ratio, per[i].poincare);
  }
  if (rep.infinite_ratios) {
    rep.max_ratio = std::numeric_limits<double>::infinity();
  } else if (have_arg) {
    rep.violating_function = "maximiser: " + describe(fam[arg], g.dim());
  }
  return rep;
}

ClassicalSobolev classical_sobolev_constant(const PotentialSpec& spec, const TorusGrid& grid, double r) {
  ClassicalSobolev out;
  const int d = grid.dim();
  if (d < 2) {
    out.reason = "needs d >= 2";
    return out;
  }
  const double half_d = 0.5 * d;
  if (!(r > half_d)) {
    out.reason = "r must exceed d/2";
    return out;
  }
  out.q = 0.5 * (half_d + r);
  out.p = 2.0 * out.q / (1.0 + out.q);
  for (int level = 0; level < 3; ++level) {
    const TorusGrid g(d, grid.cells_per_side() << level);
    const ScalarField v = sample_potential(spec, g);
    std::vector<double> scaled(v.values().begin(), v.values().end());
    for (double& x : scaled) x *= r;
    try {
      out.integrals.push_back(integrate_exp(ScalarField(g, std::move(scaled), FieldKind::potential), +1));
    } catch (const RangeError&) {
      out.reason = "e^{rV} overflows on the grid";
      return out;
    }
  }
  const double d1 = std::abs(out.integrals[1] - out.integrals[0]);
  const double d2 = std::abs(out.integrals[2] - out.integrals[1]);
  const bool settled = d2 <= 1e-8 * out.integrals[2];
  if (!settled && !(d2 < 0.9 * d1)) {
    out.reason = "quadrature of e^{rV} does not settle under refinement";
    return out;
  }
  const ScalarField v = sample_potential(spec, grid);
  std::vector<double> scaled(v.values().begin(), v.values().end());
  for (double& x : scaled) x *= out.q;
  const double iq = integrate_exp(ScalarField(grid, std::move(scaled), FieldKind::potential), +1);
  out.factor = std::pow(iq, (2.0 - out.p) / (2.0 * out.p));
  out.applicable = true;
  return out;
}

}  // namespace homog
