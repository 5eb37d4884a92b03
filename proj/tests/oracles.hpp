#pragma once

// Reference computations used to check the library by independent routes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec simplex_projection(const Vec& v) {
  // Bisection on the threshold tau in sum max(v - tau, 0) = 1.
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((v.array() - mid).max(0.0).sum() > 1.0) lo = mid;
    else hi = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

// Dykstra alternating projections onto the simplex and the half spaces
// x_i - x_j <= 1/3.
inline Vec dykstra_sigma(const Vec& v, int sweeps = 20000, double tol = 1e-14) {
  const int n = static_cast<int>(v.size());
  const double c = 1.0 / 3.0;
  const int sets = 1 + n * (n - 1);
  std::vector<Vec> incr(sets, Vec::Zero(n));
  Vec x = v;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const Vec before = x;
    int s = 0;
    {
      const Vec y = x + incr[s];
      x = simplex_projection(y);
      incr[s] = y - x;
      ++s;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Vec y = x + incr[s];
        x = y;
        const double excess = y[i] - y[j] - c;
        if (excess > 0.0) {
          x[i] -= excess / 2.0;
          x[j] += excess / 2.0;
        }
        incr[s] = y - x;
        ++s;
      }
    if ((x - before).cwiseAbs().maxCoeff() < tol && sweep > 10) break;
  }
  return x;
}

// Triple loop definition of H and its partial sums.
struct HTriple {
  double H = 0.0;
  Vec Hi;
};

inline HTriple lyapunov_triple(const Vec& v, double alpha) {
  const int n = static_cast<int>(v.size());
  auto p = [&](int i) { return v[i] <= 0.0 ? 0.0 : std::pow(v[i], alpha); };
  HTriple out;
  out.Hi = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (i != j && j != k && i != k) {
          out.H += p(i) * p(j) * p(k);
          out.Hi[i] += p(j) * p(k);
        }
  return out;
}

// Stationary law from the eigenvector of P^T at eigenvalue 1.
inline Vec stationary_eigen(const Mat& P) {
  Eigen::EigenSolver<Mat> es(P.transpose());
  int best = 0;
  for (int k = 1; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()[k] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0)) best = k;
  Vec pi = es.eigenvectors().col(best).real();
  return pi / pi.sum();
}

// Central difference Jacobian, column i = dF/dx_i.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x, double h) {
  const int n = static_cast<int>(x.size());
  Mat J(n, n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (F(xp) - F(xm)) / (2.0 * h);
  }
  return J;
}

inline Vec fd_directional(const std::function<Vec(const Vec&)>& F, const Vec& x, const Vec& d, double h) {
  return (F(x + h * d) - F(x - h * d)) / (2.0 * h);
}

// Sign changes of the two-level root equation written directly in x, in
// long double, over a log grid of x; roots giving a > 1/3 are dropped.
inline int scan_two_level_roots(int K, int M, double beta, int grid = 20000,
                                long double log10_min = -9.0L, long double log10_max = 250.0L) {
  if (beta <= 0.0) return 0;
  const long double a1 = (long double)K / (M - 1), a2 = (long double)(K - 1) / (M - 2);
  const long double b1 = (long double)(K - 1) / (M - 1), b2 = (long double)(K - 2) / (M - 2);
  const long double alpha = 1.0L / (1.0L - beta);
  auto G = [&](long double x) {
    return (long double)beta * std::log1p(x) + std::log1p(2 * b1 * x + b1 * b2 * x * x) -
           std::log1p(2 * a1 * x + a1 * a2 * x * x);
  };
  auto a_of = [&](long double x) {
    const long double rho = std::expm1(std::log1p(x) / alpha);
    return (1.0L + rho) / (M + K * rho);
  };
  int count = 0;
  long double xprev = std::pow(10.0L, log10_min);
  long double gprev = G(xprev);
  for (int i = 1; i <= grid; ++i) {
    const long double x = std::pow(10.0L, log10_min + (log10_max - log10_min) * i / grid);
    const long double g = G(x);
    if ((g > 0) != (gprev > 0) && g != 0) {
      long double lo = xprev, hi = x, glo = gprev;
      for (int it = 0; it < 200; ++it) {
        const long double mid = std::sqrt(lo * hi);
        const long double gm = G(mid);
        if ((gm > 0) == (glo > 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      if (a_of(lo) <= 1.0L / 3.0L + 1e-12L) ++count;
    }
    xprev = x;
    gprev = g;
  }
  return count;
}

// Largest value of the branch function psi = log(A/B) / log(1 + x) on the grid.
inline double scan_branch_peak(int K, int M, int grid = 200000) {
  const long double a1 = (long double)K / (M - 1), a2 = (long double)(K - 1) / (M - 2);
  const long double b1 = (long double)(K - 1) / (M - 1), b2 = (long double)(K - 2) / (M - 2);
  long double best = 0;
  for (int i = 0; i <= grid; ++i) {
    const long double x = std::pow(10.0L, -8.0L + 16.0L * i / grid);
    const long double psi =
        (std::log1p(2 * a1 * x + a1 * a2 * x * x) - std::log1p(2 * b1 * x + b1 * b2 * x * x)) / std::log1p(x);
    best = std::max(best, psi);
  }
  return (double)best;
}

// Number of two-level equilibria from the case table, with the peak taken
// from the grid scan.
inline int case_table(int K, int M, double beta) {
  const double bM = 2.0 / (M - 1);
  if (beta <= 0.0) return 0;
  if (K <= 2) return beta > bM ? 1 : 0;
  if (2 * K >= M) return beta < bM ? 1 : 0;
  if (beta <= bM) return 1;
  const double peak = scan_branch_peak(K, M);
  return beta < peak ? 2 : 0;
}

// Random point of the simplex (flat Dirichlet).
template <class Rng>
Vec random_simplex(int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = e(rng);
  return v / v.sum();
}

// Random point strictly inside Sigma by rejection.
template <class Rng>
Vec random_sigma_interior(int n, Rng& rng) {
  for (;;) {
    Vec v = random_simplex(n, rng);
    if (v.maxCoeff() - v.minCoeff() < 1.0 / 3.0 - 1e-6) return v;
  }
}

}  // namespace oracle
