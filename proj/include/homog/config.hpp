#pragma once

// Experiment configuration: one INI file with sections
//   [grid] [potential] [maximal] [weights] [sobolev] [solver]
//   [simulation] [invariance] [checks] [output]

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homog/corrector.hpp"
#include "homog/diffusion.hpp"
#include "homog/maximal.hpp"
#include "homog/sobolev.hpp"
#include "homog/torus.hpp"
#include "homog/weights.hpp"

namespace homog {

struct InvarianceSettings {
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  InvarianceTolerances tolerances;
};

/// Path counts and horizons of the secondary Monte Carlo checks.
struct CheckSettings {
  std::size_t k_paths = 100;
  double k_T = 400.0;
  std::size_t bracket_paths = 1000;
  double bracket_T = 0.5;
  double bracket_dt = 1e-5;
  std::vector<double> excursion_etas{0.5, 1.0, 2.0};
  double excursion_epsilon = 0.1;
  std::size_t excursion_paths = 1000;
  double density_t = 1.0;
  int density_bins = 8;
  std::size_t density_paths = 10000;
};

struct OutputSettings {
  std::filesystem::path directory = "homog_out";
  bool csv = true;
  std::string paths_format = "binary";  // binary, csv or none
};

struct ExperimentConfig {
  int dim = 1;
  int n = 256;
  std::vector<int> n_list;
  PotentialSpec potential;
  MaximalConfig maximal;
  WeightOptions weights;
  std::optional<double> r_star;  // default: midpoint of (2, s)
  TestFamily sobolev_family;
  double classical_r = 0.0;      // 0: d/2 + 1
  CgOptions solver;
  SimConfig sim;
  InvarianceSettings invariance;
  CheckSettings checks;
  OutputSettings output;
};

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string key;
  std::string message;
};

/// Parses and checks a config file. Throws ConfigError naming the first key
/// at fault.
ExperimentConfig load_config(const std::filesystem::path& file);
ExperimentConfig parse_config(const std::string& text);

/// Every problem in the file (errors and warnings) without running anything.
std::vector<Diagnostic> validate_config(const std::filesystem::path& file);
std::vector<Diagnostic> validate_config_text(const std::string& text);

/// Diagnostics of an already-built config: nested invariants and the
/// simulation step guard.
std::vector<Diagnostic> check_config(const ExperimentConfig& cfg);

}  // namespace homog
