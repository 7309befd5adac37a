#include "homog/corrector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "homog/error.hpp"
#include "homog/parallel.hpp"
#include "homog/simd.hpp"

namespace homog {

WeightedOperator::WeightedOperator(TorusGrid grid, std::array<std::vector<double>, kMaxDim> faces)
    : grid_(grid), faces_(std::move(faces)) {
  for (int a = 0; a < grid_.dim(); ++a) {
    if (faces_[a].size() != grid_.total_cells()) {
      throw std::invalid_argument("face weight array has the wrong size");
    }
  }
}

void WeightedOperator::apply(std::span<const double> u, std::span<double> out) const {
  const auto& ker = simd::kernels();
  const std::size_t n = static_cast<std::size_t>(grid_.cells_per_side());
  const std::size_t total = grid_.total_cells();
  const double scale = 1.0 / (grid_.spacing() * grid_.spacing());
  std::fill(out.begin(), out.end(), 0.0);
  const double* up = u.data();
  double* op = out.data();

  for (int a = 0; a < grid_.dim(); ++a) {
    const double* face = faces_[a].data();
    if (a == 0) {
      for (std::size_t base = 0; base < total; base += n) {
        auto edge = [&](std::size_t i, std::size_t ip, std::size_t im) {
          op[i] += scale * (face[i] * (up[i] - up[ip]) + face[im] * (up[i] - up[im]));
        };
        edge(base, base + 1, base + n - 1);
        if (n > 2) {
          ker.stencil_axis(scale, up + base + 1, up + base + 2, up + base, face + base + 1, face + base,
                           op + base + 1, n - 2);
        }
        edge(base + n - 1, base, base + n - 2);
      }
    } else {
      const std::size_t row = grid_.stride(a);
      const std::size_t block = row * n;
      for (std::size_t b = 0; b < total; b += block) {
        for (std::size_t r = 0; r < n; ++r) {
          const std::size_t cur = b + r * row;
          const std::size_t nxt = b + ((r + 1) % n) * row;
          const std::size_t prv = b + ((r + n - 1) % n) * row;
          ker.stencil_axis(scale, up + cur, up + nxt, up + prv, face + cur, face + prv, op + cur, row);
        }
      }
    }
  }
}

std::vector<double> WeightedOperator::apply(std::span<const double> u) const {
  std::vector<double> out(u.size());
  apply(u, out);
  return out;
}

double WeightedOperator::energy(std::span<const double> u) const {
  return 2.0 * dirichlet_form(u, u);
}

double WeightedOperator::dirichlet_form(std::span<const double> u, std::span<const double> g) const {
  double s = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    const auto& face = faces_[a];
    for (std::size_t i = 0; i < grid_.total_cells(); ++i) {
      const std::size_t j = grid_.neighbor(i, a, 1);
      s += face[i] * (u[j] - u[i]) * (g[j] - g[i]);
    }
  }
  const double h = grid_.spacing();
  return 0.5 * s * grid_.cell_volume() / (h * h);
}

std::vector<double> WeightedOperator::diagonal() const {
  std::vector<double> d(grid_.total_cells(), 0.0);
  const double scale = 1.0 / (grid_.spacing() * grid_.spacing());
  for (int a = 0; a < grid_.dim(); ++a) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] += scale * (faces_[a][i] + faces_[a][grid_.neighbor(i, a, -1)]);
    }
  }
  return d;
}

WeightedOperator assemble_operator(const ScalarField& potential) {
  if (potential.kind() != FieldKind::potential) {
    throw std::invalid_argument("assemble_operator expects a potential field");
  }
  const TorusGrid& g = potential.grid();
  std::vector<double> expv(potential.size());
  for (std::size_t i = 0; i < expv.size(); ++i) {
    expv[i] = std::exp(potential[i]);
    const double inv = std::exp(-potential[i]);
    if (!std::isfinite(expv[i]) || !std::isfinite(inv) || !(inv > 0.0)) {
      throw RangeError(i, "e^{-V} is not a positive finite number");
    }
  }
  std::array<std::vector<double>, kMaxDim> faces;
  for (int a = 0; a < g.dim(); ++a) {
    faces[a].resize(g.total_cells());
    for (std::size_t i = 0; i < g.total_cells(); ++i) {
      // harmonic mean of e^{-V_i}, e^{-V_j} is 2 / (e^{V_i} + e^{V_j})
      faces[a][i] = 2.0 / (expv[i] + expv[g.neighbor(i, a, 1)]);
    }
  }
  return WeightedOperator(g, std::move(faces));
}

namespace {

void remove_mean(const simd::Kernels& ker, std::span<double> v) {
  const double m = ker.sum(v.data(), v.size()) / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

}  // namespace

CgResult solve_projected_cg(const WeightedOperator& op, std::span<const double> rhs,
                            const CgOptions& options) {
  const auto& ker = simd::kernels();
  const TorusGrid& g = op.grid();
  const std::size_t size = g.total_cells();
  if (rhs.size() != size) throw std::invalid_argument("right-hand side has the wrong size");

  double rhs_sum = 0.0;
  double rhs_max = 0.0;
  for (double v : rhs) {
    rhs_sum += v;
    rhs_max = std::max(rhs_max, std::abs(v));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(rhs_sum) > 64.0 * eps * static_cast<double>(size) * rhs_max + 1e-300) {
    throw std::logic_error("right-hand side has nonzero mean " +
                           std::to_string(rhs_sum / static_cast<double>(size)) +
                           "; the singular system is incompatible (assembly bug)");
  }

  std::vector<double> b(rhs.begin(), rhs.end());
  remove_mean(ker, b);
  CgResult result;
  result.x.assign(size, 0.0);
  const double bnorm = std::sqrt(ker.dot(b.data(), b.data(), size));
  if (bnorm == 0.0) return result;

  const int cap = options.max_iterations > 0 ? options.max_iterations : 50 * g.cells_per_side();
  std::vector<double> inv_diag(size, 1.0);
  if (options.jacobi) {
    const auto d = op.diagonal();
    for (std::size_t i = 0; i < size; ++i) inv_diag[i] = 1.0 / d[i];
  }

  std::vector<double> r = b;
  std::vector<double> z(size), p(size), q(size);
  int it = 0;
  double rel = 1.0;
  // Restart from the true residual if the recursive one drifted.
  for (int restart = 0; restart < 4; ++restart) {
    ker.mul(inv_diag.data(), r.data(), z.data(), size);
    remove_mean(ker, z);
    p = z;
    double rz = ker.dot(r.data(), z.data(), size);
    rel = std::sqrt(ker.dot(r.data(), r.data(), size)) / bnorm;
    while (rel > options.tolerance && it < cap) {
      op.apply(p, q);
      const double pq = ker.dot(p.data(), q.data(), size);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      ker.axpy(alpha, p.data(), result.x.data(), size);
      ker.axpy(-alpha, q.data(), r.data(), size);
      remove_mean(ker, r);
      ++it;
      rel = std::sqrt(ker.dot(r.data(), r.data(), size)) / bnorm;
      if (rel <= options.tolerance) break;
      ker.mul(inv_diag.data(), r.data(), z.data(), size);
      remove_mean(ker, z);
      const double rz_new = ker.dot(r.data(), z.data(), size);
      const double beta = rz_new / rz;
      rz = rz_new;
      ker.xpby(z.data(), beta, p.data(), size);
    }
    op.apply(result.x, q);
    for (std::size_t i = 0; i < size; ++i) r[i] = b[i] - q[i];
    remove_mean(ker, r);
    rel = std::sqrt(ker.dot(r.data(), r.data(), size)) / bnorm;
    if (rel <= options.tolerance || it >= cap) break;
  }
  remove_mean(ker, result.x);
  result.iterations = it;
  result.relative_residual = rel;
  if (rel > options.tolerance) {
    throw SolverError(rel, it, "conjugate gradient did not converge");
  }
  return result;
}

std::vector<double> corrector_source(const WeightedOperator& op, int direction) {
  const TorusGrid& g = op.grid();
  if (direction < 0 || direction >= g.dim()) throw std::invalid_argument("corrector direction out of range");
  const auto face = op.face_weights(direction);
  std::vector<double> b(g.total_cells());
  const double inv_h = 1.0 / g.spacing();
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = (face[g.neighbor(i, direction, -1)] - face[i]) * inv_h;
  }
  return b;
}

CgResult solve_corrector(const WeightedOperator& op, int direction, const CgOptions& options) {
  std::vector<double> rhs = corrector_source(op, direction);
  for (double& v : rhs) v = -v;
  return solve_projected_cg(op, rhs, options);
}

CorrectorSolution solve_correctors(const WeightedOperator& op, const CgOptions& options) {
  const TorusGrid& g = op.grid();
  const int d = g.dim();
  std::vector<CgResult> results(static_cast<std::size_t>(d));
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t i) {
    results[i] = solve_corrector(op, static_cast<int>(i), options);
  });
  CorrectorSolution sol;
  const double inv_h = 1.0 / g.spacing();
  for (int i = 0; i < d; ++i) {
    auto& res = results[static_cast<std::size_t>(i)];
    std::array<std::vector<double>, kMaxDim> grad;
    for (int a = 0; a < d; ++a) {
      grad[a].resize(g.total_cells());
      for (std::size_t x = 0; x < g.total_cells(); ++x) {
        grad[a][x] = (res.x[g.neighbor(x, a, 1)] - res.x[x]) * inv_h;
      }
    }
    sol.gradients.push_back(std::move(grad));
    sol.residual_norms.push_back(res.relative_residual);
    sol.iterations.push_back(res.iterations);
    sol.components.emplace_back(g, std::move(res.x), FieldKind::corrector);
  }
  return sol;
}

double min_eigenvalue(const Matrix3& m, int dim) {
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = m[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

DiffusivityMatrix effective_diffusivity(const CorrectorSolution& sol, const ScalarField& potential,
                                        const ScalarField& weight) {
  const TorusGrid& g = potential.grid();
  const int d = g.dim();
  if (static_cast<int>(sol.components.size()) != d || static_cast<int>(sol.gradients.size()) != d) {
    throw std::invalid_argument("corrector has " + std::to_string(sol.components.size()) +
                                " components but the potential lives in dimension " + std::to_string(d));
  }
  if (!(sol.components.front().grid() == g) || !(weight.grid() == g)) {
    throw std::invalid_argument("effective_diffusivity: grid mismatch");
  }
  const WeightedOperator op = assemble_operator(potential);

  DiffusivityMatrix out;
  out.dim = d;
  out.n = g.cells_per_side();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        const auto face = op.face_weights(a);
        const auto& gi = sol.gradients[static_cast<std::size_t>(i)][a];
        const auto& gj = sol.gradients[static_cast<std::size_t>(j)][a];
        const double di = (i == a) ? 1.0 : 0.0;
        const double dj = (j == a) ? 1.0 : 0.0;
        for (std::size_t x = 0; x < g.total_cells(); ++x) s += face[x] * (di + gi[x]) * (dj + gj[x]);
      }
      s *= g.cell_volume();
      out.sigma_unnormalized[i][j] = s;
      out.sigma_unnormalized[j][i] = s;
    }
  }
  out.integral_exp_minus = integrate_exp(potential, -1);
  out.integral_weight = weight.integral();
  out.k_constant = out.integral_weight / out.integral_exp_minus;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out.sigma_bar[i][j] = out.sigma_unnormalized[i][j] / out.integral_exp_minus;
      out.sigma_time_changed[i][j] = out.sigma_unnormalized[i][j] / out.integral_weight;
    }
  }
  out.normalization = "sigma_bar = sigma / int exp(-V) = k * sigma / int w";
  out.residuals = sol.residual_norms;
  out.min_eigenvalue = min_eigenvalue(out.sigma_bar, d);
  return out;
}

RefinementTable refinement_study(const PotentialSpec& spec, int dim, const std::vector<int>& n_list,
                                 const CgOptions& options, std::optional<double> diagonal_oracle) {
  if (n_list.size() < 2) throw ConfigError("grid.n_list", "a refinement study needs at least two grids");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw ConfigError("grid.n_list", "n_list must be strictly increasing");
  }
  RefinementTable table;
  table.dim = dim;
  table.oracle = diagonal_oracle;
  for (int n : n_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const TorusGrid grid(dim, n);
    const ScalarField v = sample_potential(spec, grid);
    const WeightedOperator op = assemble_operator(v);
    const CorrectorSolution sol = solve_correctors(op, options);
    const ScalarField ones(grid, std::vector<double>(grid.total_cells(), 1.0), FieldKind::weight);
    const DiffusivityMatrix dm = effective_diffusivity(sol, v, ones);
    RefinementRow row;
    row.n = n;
    row.sigma_bar = dm.sigma_bar;
    for (std::size_t i = 0; i < sol.iterations.size(); ++i) {
      row.max_iterations = std::max(row.max_iterations, sol.iterations[i]);
      row.max_residual = std::max(row.max_residual, sol.residual_norms[i]);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    table.rows.push_back(row);
    if (diagonal_oracle) {
      double err = 0.0;
      for (int i = 0; i < dim; ++i) err = std::max(err, std::abs(row.sigma_bar[i][i] - *diagonal_oracle));
      table.oracle_errors.push_back(err);
    }
  }

  const auto& rows = table.rows;
  const std::size_t m = rows.size();
  for (std::size_t r = 1; r + 1 < m; ++r) {
    Matrix3 ord{};
    const double ratio = std::log(static_cast<double>(rows[r + 1].n) / rows[r].n);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        const double d0 = std::abs(rows[r].sigma_bar[i][j] - rows[r - 1].sigma_bar[i][j]);
        const double d1 = std::abs(rows[r + 1].sigma_bar[i][j] - rows[r].sigma_bar[i][j]);
        ord[i][j] = (d0 > 0.0 && d1 > 0.0) ? std::log(d0 / d1) / ratio
                                           : std::numeric_limits<double>::quiet_NaN();
      }
    }
    table.observed_order.push_back(ord);
  }
  const double ratio = static_cast<double>(rows[m - 1].n) / rows[m - 2].n;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double p = 2.0;
      if (!table.observed_order.empty()) {
        const double o = table.observed_order.back()[i][j];
        if (std::isfinite(o) && o >= 0.5 && o <= 6.0) p = o;
      }
      const double fine = rows[m - 1].sigma_bar[i][j];
      const double coarse = rows[m - 2].sigma_bar[i][j];
      table.extrapolated[i][j] = fine + (fine - coarse) / (std::pow(ratio, p) - 1.0);
    }
  }
  return table;
}

}  // namespace homog
