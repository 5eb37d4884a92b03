#include "vrnbw/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace vrnbw {

ProbabilityMeasure::ProbabilityMeasure(Vector values) : values_(std::move(values)) {
  if (values_.size() == 0) throw DomainError("empty probability vector");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      std::ostringstream os;
      os << "probability vector has invalid entry " << values_[i] << " at " << i;
      throw DomainError(os.str());
    }
  }
  const double mass = values_.sum();
  if (std::abs(mass - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probability vector has mass " << mass;
    throw DomainError(os.str());
  }
}

ProbabilityMeasure ProbabilityMeasure::normalized(Vector values, double tol) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      if (values[i] < -tol) throw DomainError("negative entry beyond tolerance");
      values[i] = 0.0;
    }
  }
  const double mass = values.sum();
  if (!(mass > 0.0)) throw DomainError("zero mass");
  values /= mass;
  return ProbabilityMeasure(std::move(values));
}

std::vector<int> ProbabilityMeasure::support(double threshold) const {
  std::vector<int> out;
  for (int i = 0; i < dim(); ++i)
    if (values_[i] > threshold) out.push_back(i);
  return out;
}

SigmaMembership SigmaSet::classify(const ProbabilityMeasure& v) const {
  if (v.dim() != dim) throw DomainError("dimension mismatch");
  return in_sigma(v);
}

ProbabilityMeasure SigmaSet::project(const SignedMeasure& v) const {
  if (v.dim() != dim) throw DomainError("dimension mismatch");
  return project_to_sigma(v);
}

ProbabilityMeasure uniform_on(std::span<const int> subset, int dim) {
  if (subset.empty()) throw DomainError("uniform_on: empty subset");
  Vector v = Vector::Zero(dim);
  for (int i : subset) {
    if (i < 0 || i >= dim) throw DomainError("uniform_on: index out of range");
    if (v[i] != 0.0) throw DomainError("uniform_on: repeated index");
    v[i] = 1.0;
  }
  v /= static_cast<double>(subset.size());
  return ProbabilityMeasure(std::move(v));
}

SigmaMembership in_sigma(const ProbabilityMeasure& v, double tol) {
  const double gap = v.max() - v.min();
  return {gap <= kSigmaGap + tol, gap < kSigmaGap - tol};
}

Vector project_to_simplex(const Vector& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (int k = 0; k < n; ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / (k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  Vector out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

double sup_distance(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

namespace {

struct Candidate {
  Vector mu;
  double distance = std::numeric_limits<double>::infinity();
};

// Solutions with the gap constraint active have the shape
// mu = clip(v - tau, l, l + 1/3) with the lowest k coordinates at l and the
// highest u at l + 1/3.  Both l > 0 and l = 0 are tried for each (k, u).
Candidate gap_active_projection(const Vector& v) {
  const int n = static_cast<int>(v.size());
  const double c = kSigmaGap;
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = v[order[i]];
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + s[i];

  Candidate best;
  auto consider = [&](Vector mu) {
    const double d = (mu - v).squaredNorm();
    if (d < best.distance) best = {std::move(mu), d};
  };

  for (int k = 1; k < n; ++k) {
    for (int u = 1; k + u <= n; ++u) {
      const int f = n - k - u;
      const double sL = prefix[k];
      const double sU = prefix[n] - prefix[n - u];
      const double sF = prefix[n - u] - prefix[k];
      const double maxL = s[k - 1];
      const double minU = s[n - u];

      // l > 0
      {
        const double w = (sL + sU - u * c) / (k + u);
        const double l = (1.0 - u * c - sF + f * w) / n;
        bool ok = l > -tol && maxL <= w + tol && minU >= w + c - tol;
        if (ok && f > 0) ok = s[k] >= w - tol && s[n - u - 1] <= w + c + tol;
        if (ok) {
          const double lc = std::max(l, 0.0);
          Vector mu(n);
          for (int r = 0; r < n; ++r) {
            double val = s[r] - (w - l);
            if (r < k) val = lc;
            else if (r >= n - u) val = lc + c;
            mu[order[r]] = val;
          }
          consider(std::move(mu));
        }
      }

      // l = 0
      if (f > 0) {
        const double tau = (u * c + sF - 1.0) / f;
        const double eta = (k * tau - sL) - (sU - u * tau - u * c);
        bool ok = maxL - tau <= tol && minU - tau >= c - tol && eta >= -tol &&
                  s[k] - tau >= -tol && s[n - u - 1] - tau <= c + tol;
        if (ok) {
          Vector mu(n);
          for (int r = 0; r < n; ++r) {
            double val = std::clamp(s[r] - tau, 0.0, c);
            if (r < k) val = 0.0;
            else if (r >= n - u) val = c;
            mu[order[r]] = val;
          }
          consider(std::move(mu));
        }
      } else if (u == 3) {
        // Corner of Sigma: uniform on the three largest coordinates.
        const double tau = std::max(maxL, 0.0);
        if (tau <= minU - c + tol) {
          Vector mu = Vector::Zero(n);
          for (int r = n - u; r < n; ++r) mu[order[r]] = c;
          consider(std::move(mu));
        }
      }
    }
  }
  return best;
}

}  // namespace

ProbabilityMeasure project_to_sigma(const SignedMeasure& v) {
  const Vector& x = v.values();
  if (x.size() < 3) throw DomainError("project_to_sigma: dimension below 3");
  if (!x.allFinite()) throw DomainError("project_to_sigma: non-finite input");
  if (std::abs(x.sum() - 1.0) > 1e-9)
    throw DomainError("project_to_sigma: input mass is not one");

  Vector mu = project_to_simplex(x);
  if (mu.maxCoeff() - mu.minCoeff() > kSigmaGap + 1e-15) {
    Candidate cand = gap_active_projection(x);
    if (!std::isfinite(cand.distance))
      throw NumericalError("project_to_sigma: no KKT point found");
    mu = std::move(cand.mu);
  }
  return ProbabilityMeasure::normalized(std::move(mu));
}

}  // namespace vrnbw
