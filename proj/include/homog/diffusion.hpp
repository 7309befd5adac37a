#pragma once

// Euler-Maruyama paths of dX = dB - (1/2) grad V(X) dt on the lifted torus,
// the additive functional A_t = int_0^t (w e^V)(X_s) ds with the time-changed
// process, the corrector martingale, and the Monte Carlo checks built on them.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homog/corrector.hpp"
#include "homog/interp.hpp"
#include "homog/stats.hpp"
#include "homog/torus.hpp"

namespace homog {

enum class StartLaw { fixed_point, reversible, weight };

const char* to_string(StartLaw s);
StartLaw parse_start_law(std::string_view name);

struct SimConfig {
  double dt = 1e-3;
  double T = 1.0;  // horizon in the original clock
  double epsilon = 1.0;
  std::size_t num_paths = 100;
  std::uint64_t seed = 1;
  Interpolation interpolation = Interpolation::multilinear;
  StartLaw start = StartLaw::fixed_point;
  Point x0{0.0, 0.0, 0.0};
  std::size_t record_every = 1;  // recorded runs only
};

/// Every violated constraint as (config key, message).
std::vector<std::pair<std::string, std::string>> check_sim_config(const SimConfig& cfg);

/// Fields looked up along paths: the drift from centred differences of the
/// sampled V, and optionally w e^V (the clock rate) and the corrector.
class PathModel {
 public:
  /// Throws ConfigError("potential.smoothing") for a log_singular preset
  /// without smoothing, and ConfigError("potential.preset") for the
  /// checkerboard, whose drift is undefined on the cell faces.
  PathModel(const PotentialSpec& spec, const TorusGrid& grid, std::optional<ScalarField> weight = std::nullopt,
            const CorrectorSolution* corrector = nullptr);

  const TorusGrid& grid() const noexcept { return grid_; }
  const PotentialSpec& spec() const noexcept { return spec_; }
  const ScalarField& potential() const noexcept { return potential_; }
  const std::optional<ScalarField>& weight() const noexcept { return weight_; }
  bool has_weight() const noexcept { return weight_.has_value(); }
  bool has_corrector() const noexcept { return corrector_offset_ >= 0; }

  /// dt <= h^2/2 min e^V, recorded as a warning only.
  double dt_guard() const noexcept { return dt_guard_; }

  /// (int e^{-V})^{-1} int w by quadrature.
  double k_reference() const;

  const FieldStack& stack() const noexcept { return stack_; }
  int clock_offset() const noexcept { return clock_offset_; }
  int corrector_offset() const noexcept { return corrector_offset_; }

  /// Initial point of path `path` under `cfg.start`.
  Point initial_point(const SimConfig& cfg, std::uint64_t path) const;

 private:
  PotentialSpec spec_;
  TorusGrid grid_;
  ScalarField potential_;
  std::optional<ScalarField> weight_;
  FieldStack stack_;
  int clock_offset_ = -1;
  int corrector_offset_ = -1;
  double dt_guard_ = 0.0;
  std::vector<double> reversible_cdf_;
  std::vector<double> weight_cdf_;
};

struct PathRecord {
  std::vector<double> times;
  std::vector<Point> positions;  // lifted X
  std::vector<Point> projected;  // X mod 1
  std::vector<double> clock;     // A at each sample time
  double timechanged_step = 0.0;
  std::vector<Point> timechanged;   // X~ on the uniform grid j * timechanged_step of the new clock
  std::vector<Point> martingale;    // M~ at new times clock[k], i.e. X + v(X mod 1) at sample k
  std::vector<Matrix3> bracket_pred;  // predicted <M~> at new times clock[k]
};

struct PathEnsemble {
  int dim = 0;
  int n = 0;
  SimConfig config;
  std::vector<PathRecord> paths;
};

/// Recorded trajectories; bit-identical for a given (seed, config) and
/// independent of the thread count.
PathEnsemble simulate_paths(const PathModel& model, const SimConfig& cfg);

/// Fills clock (trapezoidal rule of w e^V along the samples) and the
/// time-changed positions resampled by monotone inversion of the clock.
PathEnsemble time_change(PathEnsemble paths, const ScalarField& w, const ScalarField& potential);

/// Fills martingale and bracket_pred. The bracket is integrated in the
/// original clock, where d<M~> = (d + grad v)(d + grad v)^T dt, with grad v
/// the gradient of the interpolated corrector.
PathEnsemble corrector_martingale(PathEnsemble paths, const CorrectorSolution& sol, const ScalarField& w,
                                  const ScalarField& potential);

/// Composing the clock with its inverse at the sample points; the largest
/// deviation from the original sample times.
double clock_round_trip_error(const PathRecord& path);

// Streaming kernel: per-path summaries without storing trajectories.

enum class SupTarget { none, corrector_norm, field };

struct StreamConfig {
  SimConfig sim;                 // sim.T is the original-clock horizon
  bool clock = false;            // accumulate A_t even without a horizon
  double clock_horizon = 0.0;    // also run until A_t >= clock_horizon
  bool martingale = false;       // realized and predicted brackets up to sim.T
  SupTarget sup = SupTarget::none;
};

struct PathSummary {
  Point start{};
  Point end{};            // X at sim.T
  double clock_end = 0.0; // A at sim.T
  Point martingale_start{};
  Point martingale_end{};
  Matrix3 realized_qv{};  // sum of squared increments of M~ up to sim.T
  Matrix3 bracket{};      // predicted bracket up to sim.T
  double sup = 0.0;       // max of the sup target over A_s <= clock_horizon
  Point at_clock{};       // X~ at new time clock_horizon
  std::size_t steps = 0;
};

/// `field` is the scalar looked up for SupTarget::field.
std::vector<PathSummary> stream_paths(const PathModel& model, const StreamConfig& cfg,
                                      const ScalarField* field = nullptr);

// Checks.

struct KCheck {
  Estimate k_estimate;  // mean over paths of A_T / T
  double k_reference = 0.0;
  double relative_difference = 0.0;
  double z_score = 0.0;
};

/// Reversible start, so A_T / T is unbiased for k at every T.
KCheck time_change_constant(const PathModel& model, SimConfig cfg);

struct BracketCheck {
  double predicted = 0.0;  // mean trace of the predicted bracket
  double realized = 0.0;   // mean trace of the realized quadratic variation
  double relerr = 0.0;     // (realized - predicted) / predicted
  double relerr_se = 0.0;  // from the per-path paired difference
  std::vector<Estimate> mean_increment;  // E[M~_T - M~_0] per coordinate
};

/// Reversible start.
BracketCheck bracket_check(const PathModel& model, SimConfig cfg);

struct ExcursionCheck {
  double eta = 0.0;
  double epsilon = 0.0;
  double probability = 0.0;
  double probability_se = 0.0;
  double bound = 0.0;  // e sqrt(xi(f, f)) / eta
  std::size_t num_paths = 0;
  bool violated = false;  // probability > bound + 3 SE
};

/// P_w(sup over new times t <= eps^-2 of |eps f(X~_t mod 1)| > eta) for
/// each eta, with the time-changed process started from w dx / int w.
/// Throws ConfigError("excursion.eta") for eta <= 0.
std::vector<ExcursionCheck> excursion_bound_check(const PathModel& model, const ScalarField& f, double epsilon,
                                                  const std::vector<double>& etas, SimConfig cfg);

/// Histogram estimate of sup over bins of (count / N) / int_bin w, with
/// bins_per_axis bins per axis. Throws std::invalid_argument when fewer than
/// 100 samples per bin are expected or n is not a multiple of the bins.
double density_sup(std::span<const Point> positions, const ScalarField& w, int bins_per_axis);

struct DensityCheck {
  double t = 0.0;
  int bins_fine = 0;
  double sup_fine = 0.0;
  double sup_coarse = 0.0;  // bins_fine / 2 per axis
  double relative_spread = 0.0;
};

/// Positions of X~ at new time t from cfg.start, histogrammed at two bin
/// widths.
DensityCheck density_bound_check(const PathModel& model, double t, int bins_fine, SimConfig cfg);

struct ScaleResult {
  double epsilon = 0.0;
  std::size_t num_paths = 0;
  double dt = 0.0;
  Matrix3 covariance{};
  Matrix3 covariance_se{};
  double covariance_relerr = 0.0;  // max_i |cov_ii - sigma_ii| / sigma_ii
  std::array<double, 3> sup_quantiles{};  // 10%, 50%, 90%
  std::vector<KsResult> gaussianity;      // per coordinate vs N(0, sigma_ii)
  Estimate k;
  bool covariance_ok = false;
  bool gaussian_ok = false;
};

struct InvarianceTolerances {
  double covariance_relative = 0.05;
  double ks_alpha = 0.01;
};

/// X^eps_1 = eps X_{eps^-2} from cfg.x0 for each eps, against sigma_bar.
/// The model must carry w and the corrector (for the sup statistic).
std::vector<ScaleResult> invariance_check(const PathModel& model, const DiffusivityMatrix& sigma,
                                          const std::vector<double>& epsilons, SimConfig cfg,
                                          const InvarianceTolerances& tol = {});

/// True when the median sup statistic strictly decreases along the
/// given order of scales (listed from coarse to fine eps).
bool sup_median_decreasing(const std::vector<ScaleResult>& scales);

struct McReport {
  int dim = 0;
  double dt = 0.0;
  double dt_guard = 0.0;
  std::optional<DiffusivityMatrix> sigma_bar_reference;
  std::vector<ScaleResult> scales;
  bool sup_median_decreasing = false;
  std::optional<KCheck> k_check;
  std::optional<BracketCheck> bracket;
  std::vector<ExcursionCheck> excursions;
  std::optional<DensityCheck> density;
  std::vector<std::string> warnings;
};

}  // namespace homog
