#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "vrnbw/errors.hpp"

namespace vrnbw {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSigmaGap = 1.0 / 3.0;
inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kSupportThreshold = 1e-14;

// Nonnegative vector of total mass one.
class ProbabilityMeasure {
 public:
  ProbabilityMeasure() = default;
  // Throws DomainError on negative entries or mass off by more than 1e-12.
  explicit ProbabilityMeasure(Vector values);

  // Clips entries in [-tol, 0) to zero and divides by the total.
  static ProbabilityMeasure normalized(Vector values, double tol = 1e-12);

  int dim() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Vector& values() const { return values_; }

  std::vector<int> support(double threshold = kSupportThreshold) const;
  double max() const { return values_.maxCoeff(); }
  double min() const { return values_.minCoeff(); }

 private:
  Vector values_;
};

// Real vector with no sign or mass constraint (tangent vectors, raw states).
class SignedMeasure {
 public:
  SignedMeasure() = default;
  explicit SignedMeasure(Vector values) : values_(std::move(values)) {}
  SignedMeasure(const ProbabilityMeasure& m) : values_(m.values()) {}

  int dim() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Vector& values() const { return values_; }
  double total_mass() const { return values_.sum(); }

 private:
  Vector values_;
};

struct SigmaMembership {
  bool inside = false;
  bool interior = false;
};

// The set of probability measures with max(v) <= 1/3 + min(v).
struct SigmaSet {
  int dim = 0;

  SigmaMembership classify(const ProbabilityMeasure& v) const;
  ProbabilityMeasure project(const SignedMeasure& v) const;
};

ProbabilityMeasure uniform_on(std::span<const int> subset, int dim);

SigmaMembership in_sigma(const ProbabilityMeasure& v, double tol = 1e-12);

// Euclidean projection of a mass-one vector onto the simplex.
Vector project_to_simplex(const Vector& v);

// Euclidean projection of a mass-one vector onto Sigma.
ProbabilityMeasure project_to_sigma(const SignedMeasure& v);

double sup_distance(const Vector& a, const Vector& b);

}  // namespace vrnbw
