#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vrnbw/measures.hpp"

namespace vrnbw {

inline double beta_of_alpha(double alpha) { return (alpha - 1.0) / alpha; }
inline double alpha_of_beta(double beta) { return 1.0 / (1.0 - beta); }
// Threshold below which uniform M is approached from the two-level family.
inline double beta_M(int M) { return 2.0 / (M - 1); }

// Coefficients of the two-level root equation
// (1 + x)^beta (1 + 2 b1 x + b1 b2 x^2) = 1 + 2 a1 x + a1 a2 x^2
// for v = (1 - p) mu_K + p mu_M with x = (a / b)^alpha - 1.
struct BranchCoefficients {
  int K = 0, M = 0;
  double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  double s = 0, t = 0, lambda = 0;  // only for K >= 2

  static BranchCoefficients make(int K, int M);
};

double phi_a1(double x, double a1);
double phi(double y, const BranchCoefficients& c);
// Branch function in the x variable: phi_a1(x) for K = 1, phi(b1 x) otherwise.
double psi(double x, const BranchCoefficients& c);
// Same, as a function of s = log(1 + x); stable for very large x.
double psi_log(double s, const BranchCoefficients& c);
// log of (1 + 2 a1 x + a1 a2 x^2) / (1 + 2 b1 x + b1 b2 x^2) - beta log(1 + x).
double root_residual_log(double s, double beta, const BranchCoefficients& c);

struct BranchPeak {
  double beta = 0.0;  // beta_{K,M}
  double s = 0.0;     // argmax in log(1 + x)
};

// Maximum of psi on (0, inf) for 3 <= K < M / 2.
BranchPeak beta_threshold(int K, int M);

// Number of two-level equilibria for (K, M) at the given beta.
int count_D(int K, int M, double beta);

struct TwoLevelRoot {
  double s = 0.0;  // log(1 + x)
  double x = 0.0;
  double p = 0.0;  // weight on mu_M
  double a = 0.0, b = 0.0;
};

// Roots on (0, inf) that give measures in Sigma, with p in (0, 1).
std::vector<TwoLevelRoot> solve_branch_equilibria(int K, int M, double beta);

enum class EquilibriumKind { Uniform, TwoLevel };

struct EquilibriumRecord {
  EquilibriumKind kind = EquilibriumKind::Uniform;
  int K = 0;  // high level size (uniform: support size)
  int M = 0;  // support size
  double p = 1.0;
  double x = 0.0;
  ProbabilityMeasure vector;  // canonical representative: first K high, next M - K low
  std::int64_t orbit_count = 1;
  double residual = 0.0;      // |F(v)|_inf
};

std::string kind_name(EquilibriumKind kind);
std::int64_t binomial(int n, int k);

EquilibriumRecord uniform_equilibrium(int K, int N, double alpha);
std::vector<EquilibriumRecord> enumerate_equilibria(int N, double alpha);

// Full Jacobian of the extended field, valid on the simplex.
Matrix ambient_jacobian(const Vector& v, double alpha);

// DF at an equilibrium on the tangent space {sum = 0}.  The basis has the
// 1/v-orthonormal support directions first, then e_i - v for i off the
// support.  matrix is block upper triangular with a symmetric leading block.
struct TangentDifferential {
  std::vector<int> support;
  std::vector<int> outside;
  Matrix basis;         // N x (N - 1)
  Matrix matrix;        // (N - 1) x (N - 1), DF basis = basis matrix
  Matrix support_block; // symmetric, |S| - 1 square
  Matrix outside_block; // |X \ S| square
  Matrix jacobian;      // ambient N x N
};

TangentDifferential differential_DF(const ProbabilityMeasure& v, double alpha);

enum class Stability { Stable, Unstable, Marginal };
std::string stability_name(Stability s);

struct EigenGroup {
  double value = 0.0;
  int multiplicity = 0;
};

struct LambdaCheck {
  double lambda = 0.0;     // lambda(v) on the low block
  double predicted = 0.0;  // alpha b^(2 alpha) lambda / H_i
  bool matched = false;    // predicted value is in the spectrum
};

struct StabilityReport {
  std::vector<double> eigenvalues;  // ascending
  std::vector<EigenGroup> groups;
  Matrix eigenvectors;              // ambient, one column per eigenvalue
  Stability classification = Stability::Marginal;
  std::optional<LambdaCheck> lambda_check;
};

StabilityReport classify_stability(const EquilibriumRecord& record, double alpha);
std::vector<EigenGroup> group_eigenvalues(std::vector<double> values, double tol = 1e-9);

// lambda(v) = beta K(K-1) x^2 + 2K[beta(M-2) - 1] x + (M-2)[beta(M-1) - 2]
double two_level_lambda(int K, int M, double beta, double x);

struct CoboundaryResult {
  bool obstructed = false;
  double residual = 0.0;  // RMS misfit of f(j) = C + g(i) - g(j) over the support
  double C = 0.0;
};

CoboundaryResult coboundary_check(const ProbabilityMeasure& v, const Vector& f);

}  // namespace vrnbw
