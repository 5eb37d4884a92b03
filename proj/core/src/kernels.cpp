#include "vrnbw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace vrnbw {

double reinforce_pow(double x, double alpha) {
  if (x <= 0.0) return 0.0;
  if (alpha == 1.0) return x;
  return std::pow(x, alpha);
}

OrientedEdgeIndex::OrientedEdgeIndex(int n) : n_(n) {
  if (n < 2) throw DomainError("edge index needs at least two vertices");
}

int OrientedEdgeIndex::encode(int i, int j) const {
  return i * (n_ - 1) + (j < i ? j : j - 1);
}

std::pair<int, int> OrientedEdgeIndex::decode(int e) const {
  const int i = e / (n_ - 1);
  const int r = e % (n_ - 1);
  return {i, r < i ? r : r + 1};
}

ReinforcementSums reinforcement_sums(const Vector& v, double alpha) {
  const int n = static_cast<int>(v.size());
  ReinforcementSums s;
  s.q.resize(n);
  for (int i = 0; i < n; ++i) s.q[i] = reinforce_pow(v[i], alpha);
  const double total = s.q.sum();
  s.Hij = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      s.Hij(i, j) = s.Hij(j, i) = std::max(total - s.q[i] - s.q[j], 0.0);
  s.Hi = s.Hij * s.q;
  s.H = s.q.dot(s.Hi);
  return s;
}

EdgeKernel build_vrnbw_kernel(const ProbabilityMeasure& v, double alpha) {
  const int n = v.dim();
  if (n < 4) throw DomainError("kernel needs at least four vertices");
  if (alpha < 1.0) throw DomainError("alpha must be at least 1");
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = reinforce_pow(v[i], alpha);

  OrientedEdgeIndex idx(n);
  EdgeKernel K{n, alpha, Matrix::Zero(idx.size(), idx.size())};
  for (int e = 0; e < idx.size(); ++e) {
    const auto [i, j] = idx.decode(e);
    double denom = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != i && k != j) denom += q[k];
    if (!(denom > 0.0)) {
      std::ostringstream os;
      os << "kernel row (" << i << "," << j << ") has zero admissible weight";
      throw DomainError(os.str());
    }
    for (int k = 0; k < n; ++k)
      if (k != i && k != j) K.P(e, idx.encode(j, k)) = q[k] / denom;
  }
  return K;
}

EdgeToVertexMatrix edge_to_vertex_matrix(int n) {
  OrientedEdgeIndex idx(n);
  EdgeToVertexMatrix out{n, Matrix::Zero(idx.size(), n)};
  for (int e = 0; e < idx.size(); ++e) out.V(e, idx.decode(e).second) = 1.0;
  return out;
}

KernelClasses indecomposability_check(const EdgeKernel& kernel) {
  const Matrix& P = kernel.P;
  const int m = static_cast<int>(P.rows());
  std::vector<std::vector<int>> adj(m), radj(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (P(a, b) > 0.0) {
        adj[a].push_back(b);
        radj[b].push_back(a);
      }

  // Kosaraju: finishing order, then components on the reverse graph.
  std::vector<int> order;
  std::vector<char> seen(m, 0);
  for (int s = 0; s < m; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < adj[node].size()) {
        const int w = adj[node][next++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(m, -1);
  int ncomp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> stack{*it};
    comp[*it] = ncomp;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int w : radj[x])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          stack.push_back(w);
        }
    }
    ++ncomp;
  }

  std::vector<char> closed(ncomp, 1);
  for (int a = 0; a < m; ++a)
    for (int b : adj[a])
      if (comp[a] != comp[b]) closed[comp[a]] = 0;

  KernelClasses out;
  std::vector<int> slot(ncomp, -1);
  for (int a = 0; a < m; ++a) {
    const int c = comp[a];
    if (!closed[c]) continue;
    if (slot[c] < 0) {
      slot[c] = static_cast<int>(out.recurrent_classes.size());
      out.recurrent_classes.emplace_back();
    }
    out.recurrent_classes[slot[c]].push_back(a);
  }
  out.indecomposable = out.recurrent_classes.size() == 1;
  return out;
}

StationaryPair stationary_closed_form(const ProbabilityMeasure& v, double alpha) {
  const int n = v.dim();
  if (n < 4) throw DomainError("closed form needs at least four vertices");
  const ReinforcementSums s = reinforcement_sums(v.values(), alpha);
  if (!(s.H > 0.0))
    throw DomainError("H(v) = 0: support has at most two points");

  OrientedEdgeIndex idx(n);
  Vector pi(idx.size());
  for (int e = 0; e < idx.size(); ++e) {
    const auto [i, j] = idx.decode(e);
    pi[e] = s.q[i] * s.q[j] * s.Hij(i, j) / s.H;
  }
  Vector piV = s.q.cwiseProduct(s.Hi) / s.H;
  return {ProbabilityMeasure::normalized(std::move(pi)),
          ProbabilityMeasure::normalized(std::move(piV))};
}

StationaryPair stationary_solve(const EdgeKernel& kernel) {
  const KernelClasses classes = indecomposability_check(kernel);
  if (!classes.indecomposable)
    throw DecomposableKernelError("kernel has several recurrent classes",
                                  classes.recurrent_classes);
  const int m = static_cast<int>(kernel.P.rows());
  Matrix A = kernel.P.transpose() - Matrix::Identity(m, m);
  A.row(m - 1).setOnes();
  Vector rhs = Vector::Zero(m);
  rhs[m - 1] = 1.0;
  Eigen::PartialPivLU<Matrix> lu(A);
  if (!(lu.rcond() > 1e-15)) throw NumericalError("stationary solve is singular");
  Vector pi = lu.solve(rhs);
  if (pi.minCoeff() < -1e-9) throw NumericalError("stationary solve returned negative mass");
  const EdgeToVertexMatrix V = edge_to_vertex_matrix(kernel.n);
  ProbabilityMeasure edge = ProbabilityMeasure::normalized(pi, 1e-9);
  Vector piV = V.V.transpose() * edge.values();
  return {std::move(edge), ProbabilityMeasure::normalized(std::move(piV), 1e-9)};
}

PseudoInverseMatrix pseudo_inverse(const EdgeKernel& kernel, const ProbabilityMeasure& pi) {
  const int m = static_cast<int>(kernel.P.rows());
  if (pi.dim() != m) throw DomainError("pseudo_inverse: dimension mismatch");
  const Matrix Pi = Vector::Ones(m) * pi.values().transpose();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(m, m) - kernel.P + Pi);
  PseudoInverseMatrix out;
  out.rcond = lu.rcond();
  if (!(out.rcond > 1e-15)) throw NumericalError("pseudo_inverse: fundamental matrix is singular");
  out.Q = lu.inverse() - Pi;
  return out;
}

PseudoInverseResiduals pseudo_inverse_residuals(const EdgeKernel& kernel,
                                                const ProbabilityMeasure& pi,
                                                const PseudoInverseMatrix& Q) {
  const int m = static_cast<int>(kernel.P.rows());
  const Matrix I = Matrix::Identity(m, m);
  const Matrix Pi = Vector::Ones(m) * pi.values().transpose();
  const Matrix target = I - Pi;
  PseudoInverseResiduals r;
  r.q_ones = (Q.Q * Vector::Ones(m)).cwiseAbs().maxCoeff();
  r.left = (Q.Q * (I - kernel.P) - target).cwiseAbs().maxCoeff();
  r.right = ((I - kernel.P) * Q.Q - target).cwiseAbs().maxCoeff();
  return r;
}

CornerLabeling CornerLabeling::from_corner(std::array<int, 3> corner, int n) {
  std::sort(corner.begin(), corner.end());
  if (corner[0] < 0 || corner[2] >= n || corner[0] == corner[1] || corner[1] == corner[2])
    throw DomainError("corner must be three distinct vertices");
  CornerLabeling out;
  out.n = n;
  out.corner = corner;
  for (int k = 0; k < n; ++k)
    if (std::find(corner.begin(), corner.end(), k) == corner.end()) out.rest.push_back(k);
  return out;
}

CornerLabeling CornerLabeling::from_measure(const ProbabilityMeasure& v) {
  std::vector<int> order(v.dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  return from_corner({order[0], order[1], order[2]}, v.dim());
}

int CornerLabeling::vertex(int canonical) const {
  return canonical < 3 ? corner[canonical] : rest[canonical - 3];
}

TaylorLimitBundle taylor_limit_at_uniform3(const Eigen::Vector3d& h, const Vector& tail) {
  TaylorLimitBundle b;
  b.h = h;
  b.tail = tail;
  const double hbar = h.mean();
  const Eigen::Vector3d Jh(h[1], h[2], h[0]);
  const Eigen::Vector3d J2h(h[2], h[0], h[1]);
  const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
  b.X1 = -(Jh + 2.0 * J2h) / 3.0 + hbar * ones;
  b.X2 = -(2.0 * Jh + J2h) / 3.0 + hbar * ones;
  const int nt = static_cast<int>(tail.size());
  for (int l = 0; l < nt; ++l) {
    b.Y.push_back(-h / 4.0 + (tail[l] - 0.75 * hbar) * ones);
    b.Z.push_back((h - hbar * ones) / 2.0);
    Vector T = Vector::Constant(nt, tail[l] - hbar);
    T[l] = 0.0;
    b.T.push_back(std::move(T));
  }
  return b;
}

Vector TaylorLimitBundle::edge_values(const CornerLabeling& labels) const {
  const int n = labels.n;
  OrientedEdgeIndex idx(n);
  Vector f = Vector::Zero(idx.size());
  auto set = [&](int ci, int cj, double value) {
    f[idx.encode(labels.vertex(ci), labels.vertex(cj))] = value;
  };
  set(2, 0, X1[0]);
  set(0, 1, X1[1]);
  set(1, 2, X1[2]);
  set(1, 0, X2[0]);
  set(2, 1, X2[1]);
  set(0, 2, X2[2]);
  const int nt = static_cast<int>(tail.size());
  for (int l = 0; l < nt; ++l) {
    for (int i = 0; i < 3; ++i) {
      set(i, 3 + l, Y[l][i]);
      set(3 + l, i, Z[l][i]);
    }
    for (int m = 0; m < nt; ++m)
      if (m != l) set(3 + m, 3 + l, T[l][m]);
  }
  return f;
}

ExpansionResiduals stationary_expansion_check(const ProbabilityMeasure& v, double alpha,
                                              const CornerLabeling& labels) {
  const int n = v.dim();
  if (labels.n != n) throw DomainError("labeling dimension mismatch");
  const StationaryPair sp = stationary_closed_form(v, alpha);
  OrientedEdgeIndex idx(n);
  const Vector& pi = sp.edge.values();

  ExpansionResiduals r;
  double tail_sum = 0.0;
  std::vector<double> tail_pow;
  for (int l : labels.rest) {
    const double eps = 3.0 * v[l];
    r.epsilon += eps;
    tail_pow.push_back(reinforce_pow(eps, alpha));
    tail_sum += tail_pow.back();
  }
  if (!(r.epsilon > 0.0)) throw DomainError("measure lies on the corner itself");

  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) {
        const double p = pi[idx.encode(labels.corner[a], labels.corner[b])];
        r.corner_residual = std::max(r.corner_residual, std::abs(p - (1.0 / 6.0 - tail_sum / 3.0)));
      }
  for (size_t l = 0; l < labels.rest.size(); ++l) {
    const int vl = labels.rest[l];
    const double target = tail_pow[l] / 3.0;
    for (int a = 0; a < 3; ++a) {
      for (double p : {pi[idx.encode(labels.corner[a], vl)], pi[idx.encode(vl, labels.corner[a])]}) {
        const double err = std::abs(p - target);
        r.mixed_residual = std::max(r.mixed_residual, err);
        if (target > 0.0) r.mixed_relative = std::max(r.mixed_relative, err / target);
      }
    }
    for (size_t m = 0; m < labels.rest.size(); ++m)
      if (m != l)
        r.tail_magnitude = std::max(r.tail_magnitude, std::abs(pi[idx.encode(vl, labels.rest[m])]));
  }
  return r;
}

ProbabilityMeasure corner_perturbation(const CornerLabeling& labels, const Eigen::Vector3d& c,
                                       const Vector& w, double eps) {
  const int n = labels.n;
  if (w.size() != n - 3) throw DomainError("tail weights must have n - 3 entries");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  Vector v(n);
  for (int i = 0; i < 3; ++i) v[labels.corner[i]] = (1.0 - eps * c[i] / c.sum()) / 3.0;
  for (int l = 0; l < n - 3; ++l) v[labels.rest[l]] = eps * w[l] / w.sum() / 3.0;
  return ProbabilityMeasure::normalized(std::move(v));
}

double taylor_limit_error(const ProbabilityMeasure& v, double alpha, const Vector& a,
                          const CornerLabeling& labels, double* rcond) {
  const int n = v.dim();
  const EdgeKernel P = build_vrnbw_kernel(v, alpha);
  const StationaryPair sp = stationary_closed_form(v, alpha);
  const PseudoInverseMatrix Q = pseudo_inverse(P, sp.edge);
  if (rcond) *rcond = Q.rcond;
  OrientedEdgeIndex idx(n);
  Vector g(idx.size());
  for (int e = 0; e < idx.size(); ++e) g[e] = a[idx.decode(e).second];
  Eigen::Vector3d h;
  Vector tail(n - 3);
  for (int i = 0; i < 3; ++i) h[i] = a[labels.corner[i]];
  for (int l = 0; l < n - 3; ++l) tail[l] = a[labels.rest[l]];
  const Vector limit = taylor_limit_at_uniform3(h, tail).edge_values(labels);
  return (Q.Q * g - limit).cwiseAbs().maxCoeff();
}

double empirical_order(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 2) throw DomainError("empirical_order needs two or more points");
  const int m = static_cast<int>(eps.size());
  double mx = 0, my = 0;
  for (int i = 0; i < m; ++i) {
    mx += std::log(eps[i]) / m;
    my += std::log(err[i]) / m;
  }
  double sxy = 0, sxx = 0;
  for (int i = 0; i < m; ++i) {
    const double dx = std::log(eps[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace vrnbw
