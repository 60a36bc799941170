#pragma once

#include <stdexcept>
#include <string>

namespace superhedge {

/// Invalid model/claim/run configuration. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// The initial price sits outside the convex hull of its successor prices.
class ArbitrageError : public std::runtime_error {
 public:
  explicit ArbitrageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Divergent or otherwise broken optimization run.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace superhedge
