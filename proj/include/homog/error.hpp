#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homog {

/// Invalid user-facing configuration. `key()` names the offending setting
/// using the config-file spelling (e.g. "potential.beta").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A numerical value left the representable range (e.g. exp overflow).
class RangeError : public std::range_error {
 public:
  RangeError(std::size_t cell, const std::string& what);
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// Iterative solver stopped without meeting its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(double achieved_residual, int iterations, const std::string& what);
  double achieved_residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace homog
