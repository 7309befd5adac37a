#include "homog/error.hpp"

namespace homog {

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

RangeError::RangeError(std::size_t cell, const std::string& what)
    : std::range_error(what + " (cell " + std::to_string(cell) + ")"), cell_(cell) {}

SolverError::SolverError(double achieved_residual, int iterations, const std::string& what)
    : std::runtime_error(what + " (relative residual " + std::to_string(achieved_residual) +
                         " after " + std::to_string(iterations) + " iterations)"),
      residual_(achieved_residual),
      iterations_(iterations) {}

}  // namespace homog
