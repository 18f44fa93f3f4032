#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gringotts {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by iterative solvers that fail to converge or hit a singular system.
/// Carries the last iterate so callers can inspect how far the solver got.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> last_iterate = {})
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

/// Raised when an experiment configuration fails validation. The message
/// starts with the offending field path, e.g. "shock.mean_drop: ...".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gringotts
