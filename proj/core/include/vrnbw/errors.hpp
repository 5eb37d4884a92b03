#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vrnbw {

// Input outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Linear algebra breakdown: singular or badly conditioned solves.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid graph or walk configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The walk reached a vertex with no admissible continuation.
class DeadEndError : public std::runtime_error {
 public:
  DeadEndError(const std::string& what, std::vector<int> recent)
      : std::runtime_error(what), recent_(std::move(recent)) {}
  const std::vector<int>& recent_vertices() const { return recent_; }

 private:
  std::vector<int> recent_;
};

// Stationary solve requested for a kernel with several recurrent classes.
class DecomposableKernelError : public std::runtime_error {
 public:
  DecomposableKernelError(const std::string& what,
                          std::vector<std::vector<int>> classes)
      : std::runtime_error(what), classes_(std::move(classes)) {}
  const std::vector<std::vector<int>>& classes() const { return classes_; }

 private:
  std::vector<std::vector<int>> classes_;
};

}  // namespace vrnbw
