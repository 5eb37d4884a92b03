#pragma once

#include <array>
#include <utility>
#include <vector>

#include "vrnbw/measures.hpp"

namespace vrnbw {

// x^alpha for x >= 0 with 0^alpha = 0 (alpha >= 1).
double reinforce_pow(double x, double alpha);

// Oriented edges (i, j), i != j, of the complete graph on n vertices.
// Edge (i, j) has index i * (n - 1) + (j < i ? j : j - 1).
class OrientedEdgeIndex {
 public:
  explicit OrientedEdgeIndex(int n);

  int vertices() const { return n_; }
  int size() const { return n_ * (n_ - 1); }
  int encode(int i, int j) const;
  std::pair<int, int> decode(int e) const;

 private:
  int n_;
};

// Row-stochastic kernel on oriented edges.
struct EdgeKernel {
  int n = 0;
  double alpha = 1.0;
  Matrix P;
};

// V((i, j), k) = 1 when j = k.
struct EdgeToVertexMatrix {
  int n = 0;
  Matrix V;
};

struct StationaryPair {
  ProbabilityMeasure edge;    // pi on oriented edges
  ProbabilityMeasure vertex;  // pi^V = pi V
};

struct PseudoInverseMatrix {
  Matrix Q;
  double rcond = 0.0;
};

struct PseudoInverseResiduals {
  double q_ones = 0.0;   // |Q 1|_inf
  double left = 0.0;     // |Q(I - P) - (I - Pi)|_inf
  double right = 0.0;    // |(I - P)Q - (I - Pi)|_inf
};

struct KernelClasses {
  bool indecomposable = false;
  std::vector<std::vector<int>> recurrent_classes;  // edge indices
};

// Partial sums of q_k = v_k^alpha used throughout:
// H_ij = sum_{k != i, j} q_k, H_i = sum_{j != i} q_j H_ij, H = sum_i q_i H_i.
struct ReinforcementSums {
  Vector q;
  Matrix Hij;  // zero diagonal
  Vector Hi;
  double H = 0.0;
};

ReinforcementSums reinforcement_sums(const Vector& v, double alpha);

EdgeKernel build_vrnbw_kernel(const ProbabilityMeasure& v, double alpha);
EdgeToVertexMatrix edge_to_vertex_matrix(int n);
KernelClasses indecomposability_check(const EdgeKernel& kernel);

StationaryPair stationary_closed_form(const ProbabilityMeasure& v, double alpha);
StationaryPair stationary_solve(const EdgeKernel& kernel);

PseudoInverseMatrix pseudo_inverse(const EdgeKernel& kernel, const ProbabilityMeasure& pi);
PseudoInverseResiduals pseudo_inverse_residuals(const EdgeKernel& kernel,
                                                const ProbabilityMeasure& pi,
                                                const PseudoInverseMatrix& Q);

// Relabeling that sends a three point support to {0, 1, 2} in increasing
// order and the remaining vertices to 3..n-1, also in increasing order.
struct CornerLabeling {
  int n = 0;
  std::array<int, 3> corner{};
  std::vector<int> rest;

  static CornerLabeling from_corner(std::array<int, 3> corner, int n);
  static CornerLabeling from_measure(const ProbabilityMeasure& v);  // three largest entries
  int vertex(int canonical) const;                                  // canonical -> actual
};

// Limit of Q(v) g at a uniform three point measure, for g(i, j) = a(j) with
// a = (h_1, h_2, h_3, a_4, ..., a_n) in canonical labels.
struct TaylorLimitBundle {
  Eigen::Vector3d h;
  Vector tail;  // a_4..a_n
  Eigen::Vector3d X1, X2;
  std::vector<Eigen::Vector3d> Y, Z;  // one per tail vertex
  std::vector<Vector> T;              // T[l][m] = f(m, l) over tail vertices, zero at m = l

  // Full limit as a vector over oriented edges, in actual labels.
  Vector edge_values(const CornerLabeling& labels) const;
};

TaylorLimitBundle taylor_limit_at_uniform3(const Eigen::Vector3d& h, const Vector& tail);

struct ExpansionResiduals {
  double epsilon = 0.0;          // sum of tail epsilons
  double corner_residual = 0.0;  // max |pi_ij - (1/6 - sum eps_l^alpha / 3)|
  double mixed_residual = 0.0;   // max |pi_il - eps_l^alpha / 3| over both orientations
  double mixed_relative = 0.0;   // same, relative to eps_l^alpha / 3
  double tail_magnitude = 0.0;   // max |pi_lm|
};

ExpansionResiduals stationary_expansion_check(const ProbabilityMeasure& v, double alpha,
                                              const CornerLabeling& labels);

// v_i = (1 - eps c_i) / 3 on the corner, v_l = eps w_l / 3 off it, with c and
// w positive weights of sum one (canonical order).
ProbabilityMeasure corner_perturbation(const CornerLabeling& labels, const Eigen::Vector3d& c,
                                       const Vector& w, double eps);

// |Q(v) g - limit|_inf for g(i, j) = a(j), a given in actual labels.
double taylor_limit_error(const ProbabilityMeasure& v, double alpha, const Vector& a,
                          const CornerLabeling& labels, double* rcond = nullptr);

// Least squares slope of log(err) against log(eps).
double empirical_order(const std::vector<double>& eps, const std::vector<double>& err);

}  // namespace vrnbw
