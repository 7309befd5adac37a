#include "homog/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "homog/error.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"

namespace homog {

const char* to_string(StartLaw s) {
  switch (s) {
    case StartLaw::fixed_point: return "fixed";
    case StartLaw::reversible: return "reversible";
    case StartLaw::weight: return "weight";
  }
  return "?";
}

StartLaw parse_start_law(std::string_view name) {
  if (name == "fixed" || name == "fixed_point") return StartLaw::fixed_point;
  if (name == "reversible") return StartLaw::reversible;
  if (name == "weight" || name == "w") return StartLaw::weight;
  throw ConfigError("simulation.start", "unknown start law '" + std::string(name) + "' (fixed, reversible, weight)");
}

std::vector<std::pair<std::string, std::string>> check_sim_config(const SimConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) out.emplace_back("simulation.dt", "dt must be a positive number");
  if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) out.emplace_back("simulation.T", "T must be a finite value >= 0");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) out.emplace_back("simulation.epsilon", "epsilon must lie in (0, 1]");
  if (cfg.num_paths < 1) out.emplace_back("simulation.num_paths", "num_paths must be >= 1");
  if (cfg.record_every < 1) out.emplace_back("simulation.record_every", "record_every must be >= 1");
  for (double c : cfg.x0) {
    if (!std::isfinite(c)) out.emplace_back("simulation.x0", "x0 must be finite");
  }
  return out;
}

namespace {

void require_valid(const SimConfig& cfg) {
  const auto problems = check_sim_config(cfg);
  if (!problems.empty()) throw ConfigError(problems.front().first, problems.front().second);
}

std::vector<double> cumulative(std::span<const double> weights) {
  std::vector<double> cdf(weights.size());
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += weights[i];
    cdf[i] = s;
  }
  return cdf;
}

std::vector<double> clock_rate(const ScalarField& w, const ScalarField& potential) {
  std::vector<double> r(w.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = w[i] * std::exp(potential[i]);
  return r;
}

const PotentialSpec& reject_rough(const PotentialSpec& spec) {
  if (spec.preset == Preset::log_singular && !(spec.smoothing > 0.0)) {
    throw ConfigError("potential.smoothing",
                      "log_singular needs smoothing > 0 for simulation; the drift is undefined at the singularity");
  }
  if (spec.preset == Preset::checkerboard) {
    throw ConfigError("potential.preset", "checkerboard has no drift on the cell faces and cannot be simulated");
  }
  return spec;
}

// Channels: grad V (d), then w e^V if a weight is given, then v_1..v_d.
FieldStack make_stack(const TorusGrid& grid, const ScalarField& potential, const std::optional<ScalarField>& weight,
                      const CorrectorSolution* corrector) {
  const auto grads = centred_gradient(potential);
  std::vector<std::span<const double>> ch;
  for (const auto& g : grads) ch.emplace_back(g);
  std::vector<double> rate;
  if (weight) {
    if (!(weight->grid() == grid)) throw std::invalid_argument("PathModel: weight lives on another grid");
    rate = clock_rate(*weight, potential);
    ch.emplace_back(rate);
  }
  if (corrector) {
    if (static_cast<int>(corrector->components.size()) != grid.dim()) {
      throw std::invalid_argument("PathModel: corrector is missing components");
    }
    for (const auto& v : corrector->components) {
      if (!(v.grid() == grid)) throw std::invalid_argument("PathModel: corrector lives on another grid");
      ch.push_back(v.values());
    }
  }
  return FieldStack(grid, ch);
}

}  // namespace

PathModel::PathModel(const PotentialSpec& spec, const TorusGrid& grid, std::optional<ScalarField> weight,
                     const CorrectorSolution* corrector)
    : spec_(reject_rough(spec)),
      grid_(grid),
      potential_(sample_potential(spec, grid)),
      weight_(std::move(weight)),
      stack_(make_stack(grid_, potential_, weight_, corrector)) {
  const int d = grid_.dim();
  int next = d;
  if (weight_) clock_offset_ = next++;
  if (corrector) corrector_offset_ = next;
  double min_exp = std::numeric_limits<double>::infinity();
  std::vector<double> inv(potential_.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    min_exp = std::min(min_exp, std::exp(potential_[i]));
    inv[i] = std::exp(-potential_[i]);
  }
  dt_guard_ = 0.5 * grid_.spacing() * grid_.spacing() * min_exp;
  reversible_cdf_ = cumulative(inv);
  if (weight_) weight_cdf_ = cumulative(weight_->values());
}

double PathModel::k_reference() const {
  if (!weight_) throw std::invalid_argument("k needs a weight");
  return weight_->integral() / integrate_exp(potential_, -1);
}

Point PathModel::initial_point(const SimConfig& cfg, std::uint64_t path) const {
  const int d = grid_.dim();
  Point x{0.0, 0.0, 0.0};
  if (cfg.start == StartLaw::fixed_point) {
    for (int a = 0; a < d; ++a) x[a] = cfg.x0[a];
    return x;
  }
  const std::vector<double>* cdf = &reversible_cdf_;
  if (cfg.start == StartLaw::weight) {
    if (!weight_) throw std::invalid_argument("the w start law needs a weight");
    cdf = &weight_cdf_;
  }
  NormalStream rng(cfg.seed, path, 1);
  const auto pick = rng.uniform_pair();
  const double target = pick[1] * cdf->back();
  auto it = std::upper_bound(cdf->begin(), cdf->end(), target);
  if (it == cdf->end()) --it;
  const CellIndex cell = grid_.coords(static_cast<std::size_t>(it - cdf->begin()));
  const auto u = rng.uniform_pair();
  const auto u2 = rng.uniform_pair();
  const double within[3] = {u[1], u2[1], u2[0] < 1.0 ? u2[0] : 0.0};
  const double n = grid_.cells_per_side();
  for (int a = 0; a < d; ++a) x[a] = (cell[a] + within[a]) / n;
  return x;
}

namespace {

Point project(const Point& x, int d) {
  Point y{0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    y[a] = x[a] - std::floor(x[a]);
    if (y[a] >= 1.0) y[a] = 0.0;
  }
  return y;
}

std::size_t step_count(double T, double dt) {
  const double r = T / dt;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(r));
}

// One path's state: lifted position, its projection and the looked-up channels.
class Walker {
 public:
  Walker(const PathModel& model, const SimConfig& cfg, std::uint64_t path, bool want_gradient)
      : model_(model),
        mode_(cfg.interpolation),
        d_(model.grid().dim()),
        dt_(cfg.dt),
        sqrt_dt_(std::sqrt(cfg.dt)),
        want_gradient_(want_gradient),
        rng_(cfg.seed, path, 0) {
    x_ = model.initial_point(cfg, path);
    lookup();
  }

  void step() {
    for (int a = 0; a < d_; ++a) x_[a] += sqrt_dt_ * rng_.normal() - 0.5 * dt_ * values_[a];
    lookup();
  }

  const Point& x() const noexcept { return x_; }
  const Point& y() const noexcept { return y_; }
  double value(int c) const noexcept { return values_[c]; }
  double gradient(int c, int axis) const noexcept { return grads_[c * d_ + axis]; }

 private:
  void lookup() {
    y_ = project(x_, d_);
    if (want_gradient_) {
      model_.stack().evaluate_with_gradient(y_, values_, grads_);
      if (mode_ == Interpolation::nearest_cell) model_.stack().evaluate(y_, mode_, values_);
    } else {
      model_.stack().evaluate(y_, mode_, values_);
    }
  }

  const PathModel& model_;
  Interpolation mode_;
  int d_;
  double dt_;
  double sqrt_dt_;
  bool want_gradient_;
  NormalStream rng_;
  Point x_{};
  Point y_{};
  double values_[16]{};
  double grads_[16 * kMaxDim]{};
};

Matrix3 bracket_density(const double* grads, int d) {
  // (delta + grad v)(delta + grad v)^T with grads[i * d + a] = d_a v_i.
  Matrix3 g{};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        s += ((i == a ? 1.0 : 0.0) + grads[i * d + a]) * ((j == a ? 1.0 : 0.0) + grads[j * d + a]);
      }
      g[i][j] = s;
    }
  }
  return g;
}

// Length of the k-th recorded interval as a whole number of steps times dt,
// so that recording every step reproduces the streaming sums exactly.
double interval(const PathRecord& rec, std::size_t k, double dt) {
  return std::round((rec.times[k] - rec.times[k - 1]) / dt) * dt;
}

}  // namespace

PathEnsemble simulate_paths(const PathModel& model, const SimConfig& cfg) {
  require_valid(cfg);
  const int d = model.grid().dim();
  const std::size_t steps = step_count(cfg.T, cfg.dt);
  PathEnsemble ens;
  ens.dim = d;
  ens.n = model.grid().cells_per_side();
  ens.config = cfg;
  ens.paths.resize(cfg.num_paths);
  parallel_for(cfg.num_paths, [&](std::size_t p) {
    Walker walker(model, cfg, p, false);
    PathRecord& rec = ens.paths[p];
    auto record = [&](std::size_t k) {
      rec.times.push_back(static_cast<double>(k) * cfg.dt);
      rec.positions.push_back(walker.x());
      rec.projected.push_back(walker.y());
    };
    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
      walker.step();
      if (k % cfg.record_every == 0 || k == steps) record(k);
    }
  });
  return ens;
}

PathEnsemble time_change(PathEnsemble paths, const ScalarField& w, const ScalarField& potential) {
  if (!(w.grid() == potential.grid())) throw std::invalid_argument("time_change: grid mismatch");
  const std::vector<double> rate = clock_rate(w, potential);
  const FieldStack stack(w.grid(), {std::span<const double>(rate)});
  const SimConfig& cfg = paths.config;
  const int d = paths.dim;
  const double step = cfg.dt * static_cast<double>(cfg.record_every);
  parallel_for(paths.paths.size(), [&](std::size_t p) {
    PathRecord& rec = paths.paths[p];
    const std::size_t m = rec.projected.size();
    rec.clock.assign(m, 0.0);
    double prev = 0.0;
    stack.evaluate(rec.projected[0], cfg.interpolation, &prev);
    for (std::size_t k = 1; k < m; ++k) {
      double cur = 0.0;
      stack.evaluate(rec.projected[k], cfg.interpolation, &cur);
      rec.clock[k] = rec.clock[k - 1] + 0.5 * interval(rec, k, cfg.dt) * (prev + cur);
      prev = cur;
    }
    rec.timechanged_step = step;
    rec.timechanged.clear();
    std::size_t k = 0;
    for (std::size_t j = 0;; ++j) {
      const double s = static_cast<double>(j) * step;
      if (s > rec.clock.back()) break;
      while (k + 1 < m && rec.clock[k + 1] < s) ++k;
      Point x{0.0, 0.0, 0.0};
      if (k + 1 >= m || rec.clock[k] >= s) {
        x = rec.positions[k];
      } else {
        const double theta = (s - rec.clock[k]) / (rec.clock[k + 1] - rec.clock[k]);
        for (int a = 0; a < d; ++a) {
          x[a] = rec.positions[k][a] + theta * (rec.positions[k + 1][a] - rec.positions[k][a]);
        }
      }
      rec.timechanged.push_back(x);
    }
  });
  return paths;
}

PathEnsemble corrector_martingale(PathEnsemble paths, const CorrectorSolution& sol, const ScalarField& w,
                                  const ScalarField& potential) {
  const int d = paths.dim;
  if (static_cast<int>(sol.components.size()) != d) {
    throw std::invalid_argument("corrector_martingale: corrector has " + std::to_string(sol.components.size()) +
                                " components, expected " + std::to_string(d));
  }
  if (!(w.grid() == potential.grid()) || !(sol.components.front().grid() == potential.grid())) {
    throw std::invalid_argument("corrector_martingale: grid mismatch");
  }
  std::vector<std::span<const double>> ch;
  for (const auto& v : sol.components) ch.push_back(v.values());
  const FieldStack stack(potential.grid(), ch);
  const SimConfig& cfg = paths.config;
  parallel_for(paths.paths.size(), [&](std::size_t p) {
    PathRecord& rec = paths.paths[p];
    const std::size_t m = rec.projected.size();
    rec.martingale.assign(m, Point{});
    rec.bracket_pred.assign(m, Matrix3{});
    double vals[kMaxDim];
    double grads[kMaxDim * kMaxDim];
    Matrix3 prev{};
    for (std::size_t k = 0; k < m; ++k) {
      stack.evaluate_with_gradient(rec.projected[k], vals, grads);
      if (cfg.interpolation == Interpolation::nearest_cell) stack.evaluate(rec.projected[k], cfg.interpolation, vals);
      for (int a = 0; a < d; ++a) rec.martingale[k][a] = rec.positions[k][a] + vals[a];
      const Matrix3 g = bracket_density(grads, d);
      if (k > 0) {
        const double h = interval(rec, k, cfg.dt);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) rec.bracket_pred[k][i][j] = rec.bracket_pred[k - 1][i][j] + 0.5 * h * (prev[i][j] + g[i][j]);
      }
      prev = g;
    }
  });
  return paths;
}

double clock_round_trip_error(const PathRecord& path) {
  // A^{-1}(A(t_k)) by linear inversion of the sampled clock.
  double worst = 0.0;
  const std::size_t m = path.clock.size();
  for (std::size_t k = 0; k < m; ++k) {
    const double s = path.clock[k];
    const auto it = std::lower_bound(path.clock.begin(), path.clock.end(), s);
    const std::size_t j = static_cast<std::size_t>(it - path.clock.begin());
    double t = path.times[j];
    if (j > 0 && path.clock[j] != s) {
      const double theta = (s - path.clock[j - 1]) / (path.clock[j] - path.clock[j - 1]);
      t = path.times[j - 1] + theta * (path.times[j] - path.times[j - 1]);
    }
    worst = std::max(worst, std::abs(t - path.times[k]));
  }
  return worst;
}

std::vector<PathSummary> stream_paths(const PathModel& model, const StreamConfig& cfg, const ScalarField* field) {
  require_valid(cfg.sim);
  const int d = model.grid().dim();
  const bool clocked = cfg.clock || cfg.clock_horizon > 0.0 || cfg.martingale || cfg.sup != SupTarget::none;
  if (clocked && !model.has_weight()) throw std::invalid_argument("stream_paths: the clock needs a weight");
  if ((cfg.martingale || cfg.sup == SupTarget::corrector_norm) && !model.has_corrector()) {
    throw std::invalid_argument("stream_paths: the martingale needs the corrector");
  }
  if (cfg.sup != SupTarget::none && !(cfg.clock_horizon > 0.0)) {
    throw std::invalid_argument("stream_paths: a sup statistic needs clock_horizon > 0");
  }
  std::optional<FieldStack> extra;
  if (cfg.sup == SupTarget::field) {
    if (!field || !(field->grid() == model.grid())) throw std::invalid_argument("stream_paths: missing sup field");
    extra.emplace(model.grid(), std::vector<std::span<const double>>{field->values()});
  }
  const std::size_t steps_T = step_count(cfg.sim.T, cfg.sim.dt);
  const double rate_floor = model.has_weight() ? model.k_reference() : 1.0;
  const double cap = static_cast<double>(steps_T) + 1e6 + 100.0 * cfg.clock_horizon / (cfg.sim.dt * rate_floor);
  const int rc = model.clock_offset();
  const int vc = model.corrector_offset();
  const SimConfig& sim = cfg.sim;

  std::vector<PathSummary> out(sim.num_paths);
  parallel_for(sim.num_paths, [&](std::size_t p) {
    Walker walker(model, sim, p, cfg.martingale);
    PathSummary& s = out[p];
    s.start = walker.x();
    s.end = walker.x();
    s.at_clock = walker.x();

    auto sup_value = [&]() {
      if (cfg.sup == SupTarget::corrector_norm) {
        double r = 0.0;
        for (int i = 0; i < d; ++i) r += walker.value(vc + i) * walker.value(vc + i);
        return std::sqrt(r);
      }
      double f = 0.0;
      extra->evaluate(walker.y(), sim.interpolation, &f);
      return std::abs(f);
    };
    Point u{};
    Matrix3 g{};
    double grads[kMaxDim * kMaxDim];
    auto load_gradients = [&]() {
      for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) grads[i * d + a] = walker.gradient(vc + i, a);
    };
    if (cfg.martingale) {
      for (int a = 0; a < d; ++a) u[a] = walker.x()[a] + walker.value(vc + a);
      load_gradients();
      g = bracket_density(grads, d);
      s.martingale_start = u;
      s.martingale_end = u;
    }
    if (cfg.sup != SupTarget::none) s.sup = sup_value();

    double clock = 0.0;
    double rate = clocked ? walker.value(rc) : 0.0;
    std::size_t k = 0;
    while (k < steps_T || (cfg.clock_horizon > 0.0 && clock < cfg.clock_horizon)) {
      const Point prev = walker.x();
      walker.step();
      ++k;
      double next_clock = clock;
      if (clocked) {
        const double r = walker.value(rc);
        next_clock = clock + 0.5 * sim.dt * (rate + r);
        rate = r;
      }
      if (cfg.martingale && k <= steps_T) {
        Point un{};
        for (int a = 0; a < d; ++a) un[a] = walker.x()[a] + walker.value(vc + a);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s.realized_qv[i][j] += (un[i] - u[i]) * (un[j] - u[j]);
        load_gradients();
        const Matrix3 gn = bracket_density(grads, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s.bracket[i][j] += 0.5 * sim.dt * (g[i][j] + gn[i][j]);
        g = gn;
        u = un;
      }
      if (cfg.sup != SupTarget::none && next_clock <= cfg.clock_horizon) s.sup = std::max(s.sup, sup_value());
      if (cfg.clock_horizon > 0.0 && clock < cfg.clock_horizon && next_clock >= cfg.clock_horizon) {
        const double theta = (cfg.clock_horizon - clock) / (next_clock - clock);
        for (int a = 0; a < d; ++a) s.at_clock[a] = prev[a] + theta * (walker.x()[a] - prev[a]);
      }
      clock = next_clock;
      if (k == steps_T) {
        s.end = walker.x();
        s.clock_end = clock;
        s.martingale_end = u;
      }
      if (static_cast<double>(k) > cap) {
        throw std::runtime_error("stream_paths: the clock did not reach its horizon within the step cap");
      }
    }
    s.steps = k;
  });
  return out;
}

KCheck time_change_constant(const PathModel& model, SimConfig cfg) {
  cfg.start = StartLaw::reversible;
  if (!(cfg.T > 0.0)) throw ConfigError("simulation.T", "the time-change constant needs T > 0");
  StreamConfig sc;
  sc.sim = cfg;
  sc.clock = true;
  const double T = static_cast<double>(step_count(cfg.T, cfg.dt)) * cfg.dt;
  const auto res = stream_paths(model, sc);
  std::vector<double> ratio(res.size());
  for (std::size_t p = 0; p < res.size(); ++p) ratio[p] = res[p].clock_end / T;
  KCheck out;
  out.k_estimate = mean_se(ratio);
  out.k_reference = model.k_reference();
  out.relative_difference = (out.k_estimate.mean - out.k_reference) / out.k_reference;
  out.z_score = out.k_estimate.se > 0.0 ? (out.k_estimate.mean - out.k_reference) / out.k_estimate.se : 0.0;
  return out;
}

BracketCheck bracket_check(const PathModel& model, SimConfig cfg) {
  cfg.start = StartLaw::reversible;
  StreamConfig sc;
  sc.sim = cfg;
  sc.martingale = true;
  const auto res = stream_paths(model, sc);
  const int d = model.grid().dim();
  std::vector<double> pred(res.size()), real(res.size()), diff(res.size());
  for (std::size_t p = 0; p < res.size(); ++p) {
    double tp = 0.0, tr = 0.0;
    for (int i = 0; i < d; ++i) {
      tp += res[p].bracket[i][i];
      tr += res[p].realized_qv[i][i];
    }
    pred[p] = tp;
    real[p] = tr;
    diff[p] = tr - tp;
  }
  BracketCheck out;
  out.predicted = mean_se(pred).mean;
  out.realized = mean_se(real).mean;
  const Estimate dd = mean_se(diff);
  out.relerr = dd.mean / out.predicted;
  out.relerr_se = dd.se / out.predicted;
  for (int a = 0; a < d; ++a) {
    std::vector<double> inc(res.size());
    for (std::size_t p = 0; p < res.size(); ++p) inc[p] = res[p].martingale_end[a] - res[p].martingale_start[a];
    out.mean_increment.push_back(mean_se(inc));
  }
  return out;
}

std::vector<ExcursionCheck> excursion_bound_check(const PathModel& model, const ScalarField& f, double epsilon,
                                                  const std::vector<double>& etas, SimConfig cfg) {
  for (double eta : etas) {
    if (!(eta > 0.0)) throw ConfigError("excursion.eta", "eta must be > 0");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("excursion.epsilon", "epsilon must lie in (0, 1]");
  cfg.start = StartLaw::weight;
  cfg.T = 0.0;
  StreamConfig sc;
  sc.sim = cfg;
  sc.clock_horizon = 1.0 / (epsilon * epsilon);
  sc.sup = SupTarget::field;
  const auto res = stream_paths(model, sc, &f);
  const WeightedOperator op = assemble_operator(model.potential());
  const double xi = op.dirichlet_form(f.values(), f.values());
  std::vector<ExcursionCheck> out;
  const double n = static_cast<double>(res.size());
  for (double eta : etas) {
    std::size_t hits = 0;
    for (const auto& r : res) hits += (epsilon * r.sup > eta) ? 1 : 0;
    ExcursionCheck c;
    c.eta = eta;
    c.epsilon = epsilon;
    c.num_paths = res.size();
    c.probability = static_cast<double>(hits) / n;
    c.probability_se = std::sqrt(c.probability * (1.0 - c.probability) / n);
    c.bound = std::numbers::e * std::sqrt(xi) / eta;
    c.violated = c.probability > c.bound + 3.0 * c.probability_se;
    out.push_back(c);
  }
  return out;
}

double density_sup(std::span<const Point> positions, const ScalarField& w, int bins_per_axis) {
  const TorusGrid& g = w.grid();
  const int d = g.dim();
  const int n = g.cells_per_side();
  if (bins_per_axis < 1 || n % bins_per_axis != 0) {
    throw std::invalid_argument("density_sup: bins per axis must divide n");
  }
  std::size_t bins = 1;
  for (int a = 0; a < d; ++a) bins *= static_cast<std::size_t>(bins_per_axis);
  if (static_cast<double>(positions.size()) < 100.0 * static_cast<double>(bins)) {
    throw std::invalid_argument("density_sup: " + std::to_string(positions.size()) + " samples for " +
                                std::to_string(bins) + " bins; need at least 100 per bin");
  }
  const int cells_per_bin = n / bins_per_axis;
  auto bin_of_cell = [&](std::size_t cell) {
    std::size_t b = 0, stride = 1;
    for (int a = 0; a < d; ++a) {
      b += static_cast<std::size_t>(g.coord(cell, a) / cells_per_bin) * stride;
      stride *= static_cast<std::size_t>(bins_per_axis);
    }
    return b;
  };
  std::vector<double> mass(bins, 0.0);
  for (std::size_t c = 0; c < g.total_cells(); ++c) mass[bin_of_cell(c)] += w[c] * g.cell_volume();
  std::vector<double> counts(bins, 0.0);
  for (const Point& x : positions) {
    const Point y = project(x, d);
    std::size_t b = 0, stride = 1;
    for (int a = 0; a < d; ++a) {
      const int i = std::min(bins_per_axis - 1, static_cast<int>(y[a] * bins_per_axis));
      b += static_cast<std::size_t>(i) * stride;
      stride *= static_cast<std::size_t>(bins_per_axis);
    }
    counts[b] += 1.0;
  }
  double best = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    best = std::max(best, counts[b] / static_cast<double>(positions.size()) / mass[b]);
  }
  return best;
}

DensityCheck density_bound_check(const PathModel& model, double t, int bins_fine, SimConfig cfg) {
  if (!model.has_weight()) throw std::invalid_argument("density_bound_check needs a weight");
  if (!(t > 0.0)) throw ConfigError("density.t", "t must be > 0");
  if (bins_fine < 2 || bins_fine % 2) throw ConfigError("density.bins", "bins must be an even number >= 2");
  cfg.T = 0.0;
  StreamConfig sc;
  sc.sim = cfg;
  sc.clock_horizon = t;
  const auto res = stream_paths(model, sc);
  std::vector<Point> pts(res.size());
  for (std::size_t p = 0; p < res.size(); ++p) pts[p] = res[p].at_clock;
  DensityCheck out;
  out.t = t;
  out.bins_fine = bins_fine;
  out.sup_fine = density_sup(pts, *model.weight(), bins_fine);
  out.sup_coarse = density_sup(pts, *model.weight(), bins_fine / 2);
  out.relative_spread = std::abs(out.sup_fine - out.sup_coarse) / out.sup_coarse;
  return out;
}

std::vector<ScaleResult> invariance_check(const PathModel& model, const DiffusivityMatrix& sigma,
                                          const std::vector<double>& epsilons, SimConfig cfg,
                                          const InvarianceTolerances& tol) {
  const int d = model.grid().dim();
  if (sigma.dim != d) throw std::invalid_argument("invariance_check: sigma_bar has the wrong dimension");
  cfg.start = StartLaw::fixed_point;
  std::vector<ScaleResult> out;
  for (double eps : epsilons) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("invariance.epsilons", "every epsilon must lie in (0, 1]");
    StreamConfig sc;
    sc.sim = cfg;
    sc.sim.epsilon = eps;
    sc.sim.T = 1.0 / (eps * eps);
    sc.clock_horizon = 1.0 / (eps * eps);
    sc.clock = model.has_weight();
    sc.sup = model.has_corrector() ? SupTarget::corrector_norm : SupTarget::none;
    const auto res = stream_paths(model, sc);
    const double T = static_cast<double>(step_count(sc.sim.T, sc.sim.dt)) * sc.sim.dt;

    ScaleResult r;
    r.epsilon = eps;
    r.num_paths = res.size();
    r.dt = cfg.dt;
    std::vector<std::vector<double>> z(static_cast<std::size_t>(d), std::vector<double>(res.size()));
    for (std::size_t p = 0; p < res.size(); ++p) {
      for (int a = 0; a < d; ++a) z[a][p] = eps * (res[p].end[a] - res[p].start[a]);
    }
    std::array<double, kMaxDim> mean{};
    for (int a = 0; a < d; ++a) mean[a] = mean_se(z[a]).mean;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        std::vector<double> prod(res.size());
        for (std::size_t p = 0; p < res.size(); ++p) prod[p] = (z[i][p] - mean[i]) * (z[j][p] - mean[j]);
        const Estimate e = mean_se(prod);
        const double nn = static_cast<double>(res.size());
        r.covariance[i][j] = e.mean * nn / std::max(1.0, nn - 1.0);
        r.covariance_se[i][j] = e.se;
      }
    }
    r.covariance_ok = true;
    r.gaussian_ok = true;
    for (int a = 0; a < d; ++a) {
      const double ref = sigma.sigma_bar[a][a];
      const double rel = std::abs(r.covariance[a][a] - ref) / ref;
      r.covariance_relerr = std::max(r.covariance_relerr, rel);
      r.covariance_ok = r.covariance_ok && rel <= tol.covariance_relative;
      const KsResult ks = ks_normal(z[a], 0.0, std::sqrt(ref));
      r.gaussianity.push_back(ks);
      r.gaussian_ok = r.gaussian_ok && ks.p_value > tol.ks_alpha;
    }
    if (sc.sup != SupTarget::none) {
      std::vector<double> sups(res.size());
      for (std::size_t p = 0; p < res.size(); ++p) sups[p] = eps * res[p].sup;
      r.sup_quantiles = {quantile(sups, 0.1), quantile(sups, 0.5), quantile(sups, 0.9)};
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.sup_quantiles = {nan, nan, nan};
    }
    if (model.has_weight()) {
      std::vector<double> kk(res.size());
      for (std::size_t p = 0; p < res.size(); ++p) kk[p] = res[p].clock_end / T;
      r.k = mean_se(kk);
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool sup_median_decreasing(const std::vector<ScaleResult>& scales) {
  if (scales.size() < 2) return false;
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i].sup_quantiles[1] < scales[i - 1].sup_quantiles[1])) return false;
  }
  return true;
}

}  // namespace homog
