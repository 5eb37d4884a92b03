#include "vrnbw/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vrnbw/flow.hpp"
#include "vrnbw/kernels.hpp"

namespace vrnbw {

BranchCoefficients BranchCoefficients::make(int K, int M) {
  if (M < 4 || K < 1 || K >= M) {
    std::ostringstream os;
    os << "invalid branch (K=" << K << ", M=" << M << ")";
    throw DomainError(os.str());
  }
  BranchCoefficients c;
  c.K = K;
  c.M = M;
  c.a1 = static_cast<double>(K) / (M - 1);
  c.a2 = static_cast<double>(K - 1) / (M - 2);
  c.b1 = static_cast<double>(K - 1) / (M - 1);
  c.b2 = static_cast<double>(K - 2) / (M - 2);
  if (K >= 2) {
    c.s = 1.0 / (M - 2);
    c.t = 1.0 / (K - 1);
    c.lambda = (1.0 / c.s + 1.0) * c.t;
  }
  return c;
}

double phi_a1(double x, double a1) {
  if (!(x > 0.0)) throw DomainError("phi_a1 needs x > 0");
  return std::log1p(2.0 * a1 * x) / std::log1p(x);
}

double phi(double y, const BranchCoefficients& c) {
  if (c.K < 2) throw DomainError("phi is defined for K >= 2");
  if (!(y > 0.0)) throw DomainError("phi needs y > 0");
  const double s = c.s, t = c.t;
  const double logA = std::log1p(2.0 * (1.0 + t) * y + (1.0 + t) * (1.0 + s) * y * y);
  const double logB = std::log1p(2.0 * y + (1.0 - t) * (1.0 + s) * y * y);
  return (logA - logB) / std::log1p(c.lambda * y);
}

double psi(double x, const BranchCoefficients& c) {
  return c.K == 1 ? phi_a1(x, c.a1) : phi(c.b1 * x, c);
}

namespace {

// log(1 + c1 x + c2 x^2) with x = expm1(s), robust for large s.
double log_quadratic(double c1, double c2, double s) {
  if (s < 30.0) {
    const double x = std::expm1(s);
    return std::log1p(c1 * x + c2 * x * x);
  }
  const double lx = s + std::log1p(-std::exp(-s));
  double terms[3];
  int nt = 0;
  terms[nt++] = 0.0;
  if (c1 > 0.0) terms[nt++] = std::log(c1) + lx;
  if (c2 > 0.0) terms[nt++] = std::log(c2) + 2.0 * lx;
  const double mx = *std::max_element(terms, terms + nt);
  double acc = 0.0;
  for (int i = 0; i < nt; ++i) acc += std::exp(terms[i] - mx);
  return mx + std::log(acc);
}

double log_ratio(double s, const BranchCoefficients& c) {
  return log_quadratic(2.0 * c.a1, c.a1 * c.a2, s) - log_quadratic(2.0 * c.b1, c.b1 * c.b2, s);
}

constexpr double kSmallS = 1e-14;
constexpr double kLargeS = 1e9;

// Bisection on a sign change of g over [lo, hi], geometric while the
// bracket spans orders of magnitude.
template <class G>
double bisect(G&& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = (hi > 4.0 * lo && lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double psi_log(double s, const BranchCoefficients& c) {
  if (!(s > 0.0)) throw DomainError("psi_log needs s > 0");
  return log_ratio(s, c) / s;
}

double root_residual_log(double s, double beta, const BranchCoefficients& c) {
  return log_ratio(s, c) - beta * s;
}

BranchPeak beta_threshold(int K, int M) {
  if (K < 3 || 2 * K >= M) throw DomainError("beta_{K,M} is defined for 3 <= K < M/2");
  const BranchCoefficients c = BranchCoefficients::make(K, M);
  const int grid = 4000;
  const double lmin = std::log(1e-8), lmax = std::log(1e4);
  auto f = [&](double ls) { return psi_log(std::exp(ls), c); };
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= grid; ++i) {
    const double val = f(lmin + (lmax - lmin) * i / grid);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  double lo = lmin + (lmax - lmin) * std::max(best - 1, 0) / grid;
  double hi = lmin + (lmax - lmin) * std::min(best + 1, grid) / grid;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  const double ls = 0.5 * (lo + hi);
  return {std::max({f(ls), f1, f2, best_val}), std::exp(ls)};
}

int count_D(int K, int M, double beta) {
  BranchCoefficients::make(K, M);
  if (!(beta < 1.0)) throw DomainError("beta must be below 1");
  if (beta <= 0.0) return 0;
  const double bM = beta_M(M);
  if (K <= 2) return beta > bM ? 1 : 0;
  if (2 * K >= M) return beta < bM ? 1 : 0;
  if (beta <= bM) return 1;
  const double bKM = beta_threshold(K, M).beta;
  if (beta < bKM) return 2;
  if (beta == bKM) return 1;
  return 0;
}

static std::vector<double> branch_roots_s(int K, int M, double beta) {
  const BranchCoefficients c = BranchCoefficients::make(K, M);
  std::vector<double> roots;
  if (!(beta > 0.0) || !(beta < 1.0)) return roots;
  auto g = [&](double s) { return root_residual_log(s, beta, c); };
  auto psi_s = [&](double s) { return psi_log(s, c); };
  const double bM = beta_M(M);

  // Expands hi until psi crosses beta in the requested direction.
  auto upper = [&](double start, bool increasing) -> double {
    double hi = std::max(start, 1.0);
    while (hi < kLargeS) {
      const double v = psi_s(hi);
      if (increasing ? v > beta : v < beta) return hi;
      hi *= 2.0;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };

  if (K <= 2) {
    if (beta <= bM || psi_s(kSmallS) >= beta) return roots;
    const double hi = upper(1.0, true);
    if (std::isfinite(hi)) roots.push_back(bisect(g, kSmallS, hi));
  } else if (2 * K >= M) {
    if (beta >= bM || psi_s(kSmallS) <= beta) return roots;
    const double hi = upper(1.0, false);
    if (std::isfinite(hi)) roots.push_back(bisect(g, kSmallS, hi));
  } else {
    const BranchPeak peak = beta_threshold(K, M);
    if (beta > peak.beta) return roots;
    if (beta == peak.beta) {
      roots.push_back(peak.s);
      return roots;
    }
    if (beta > bM && psi_s(kSmallS) < beta) roots.push_back(bisect(g, kSmallS, peak.s));
    const double hi = upper(peak.s, false);
    if (std::isfinite(hi)) roots.push_back(bisect(g, peak.s, hi));
  }
  return roots;
}

std::vector<TwoLevelRoot> solve_branch_equilibria(int K, int M, double beta) {
  std::vector<TwoLevelRoot> out;
  if (!(beta > 0.0)) return out;
  const double alpha = alpha_of_beta(beta);
  for (double s : branch_roots_s(K, M, beta)) {
    TwoLevelRoot r;
    r.s = s;
    r.x = std::expm1(s);
    const double rho = std::expm1(s / alpha);
    const double denom = M + K * rho;
    r.p = M / denom;
    r.b = 1.0 / denom;
    r.a = (1.0 + rho) / denom;
    if (!(r.p > 0.0 && r.p < 1.0)) continue;
    if (r.a > kSigmaGap + 1e-12) continue;
    out.push_back(r);
  }
  return out;
}

std::string kind_name(EquilibriumKind kind) {
  return kind == EquilibriumKind::Uniform ? "uniform" : "two_level";
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

double field_residual(const ProbabilityMeasure& v, double alpha) {
  return vector_field(SignedMeasure(v), alpha).cwiseAbs().maxCoeff();
}

}  // namespace

EquilibriumRecord uniform_equilibrium(int K, int N, double alpha) {
  if (K < 3 || K > N) throw DomainError("uniform equilibria need 3 <= K <= N");
  std::vector<int> first(K);
  for (int i = 0; i < K; ++i) first[i] = i;
  EquilibriumRecord rec;
  rec.kind = EquilibriumKind::Uniform;
  rec.K = K;
  rec.M = K;
  rec.p = 1.0;
  rec.vector = uniform_on(first, N);
  rec.orbit_count = binomial(N, K);
  rec.residual = field_residual(rec.vector, alpha);
  return rec;
}

std::vector<EquilibriumRecord> enumerate_equilibria(int N, double alpha) {
  if (N < 4) throw DomainError("N must be at least 4");
  if (!(alpha >= 1.0)) throw DomainError("alpha must be at least 1");
  std::vector<EquilibriumRecord> out;
  for (int K = 3; K <= N; ++K) out.push_back(uniform_equilibrium(K, N, alpha));
  const double beta = beta_of_alpha(alpha);
  if (beta <= 0.0) return out;
  for (int M = 4; M <= N; ++M) {
    for (int K = 1; K < M; ++K) {
      for (const TwoLevelRoot& r : solve_branch_equilibria(K, M, beta)) {
        Vector v = Vector::Zero(N);
        v.head(K).setConstant(r.a);
        v.segment(K, M - K).setConstant(r.b);
        EquilibriumRecord rec;
        rec.kind = EquilibriumKind::TwoLevel;
        rec.K = K;
        rec.M = M;
        rec.p = r.p;
        rec.x = r.x;
        rec.vector = ProbabilityMeasure::normalized(std::move(v));
        rec.orbit_count = binomial(N, M) * binomial(M, K);
        rec.residual = field_residual(rec.vector, alpha);
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

Matrix ambient_jacobian(const Vector& v, double alpha) {
  const int n = static_cast<int>(v.size());
  const ReinforcementSums s = reinforcement_sums(v, alpha);
  if (!(s.H > 0.0)) throw DomainError("H(v) = 0: Jacobian undefined");
  Vector r(n);
  for (int i = 0; i < n; ++i)
    r[i] = alpha == 1.0 ? 1.0 : reinforce_pow(v[i], alpha - 1.0);
  Matrix J(n, n);
  const double H = s.H;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        J(i, i) = alpha * r[i] * s.Hi[i] * (1.0 / H - 3.0 * s.q[i] * s.Hi[i] / (H * H)) - 1.0;
      else
        J(j, i) = alpha * r[i] * s.q[j] * (2.0 * s.Hij(i, j) / H - 3.0 * s.Hi[j] * s.Hi[i] / (H * H));
    }
  }
  return J;
}

TangentDifferential differential_DF(const ProbabilityMeasure& v, double alpha) {
  const int n = v.dim();
  const Vector& x = v.values();
  const double res = extended_vector_field(x, alpha).cwiseAbs().maxCoeff();
  if (res > 1e-8) {
    std::ostringstream os;
    os << "differential_DF: not an equilibrium (|F| = " << res << ")";
    throw DomainError(os.str());
  }
  TangentDifferential td;
  for (int i = 0; i < n; ++i) (x[i] > kSupportThreshold ? td.support : td.outside).push_back(i);
  const int m = static_cast<int>(td.support.size());
  const int o = static_cast<int>(td.outside.size());
  if (m < 3) throw DomainError("differential_DF: support below three points");

  td.jacobian = ambient_jacobian(x, alpha);

  Vector sq(m);
  for (int a = 0; a < m; ++a) sq[a] = std::sqrt(x[td.support[a]]);
  Eigen::HouseholderQR<Matrix> qr{Matrix(sq)};
  const Matrix Qfull = qr.householderQ();
  const Matrix U = Qfull.rightCols(m - 1);

  td.basis = Matrix::Zero(n, n - 1);
  for (int c = 0; c < m - 1; ++c)
    for (int a = 0; a < m; ++a) td.basis(td.support[a], c) = sq[a] * U(a, c);
  for (int b = 0; b < o; ++b) {
    td.basis.col(m - 1 + b) = -x;
    td.basis(td.outside[b], m - 1 + b) += 1.0;
  }

  auto coordinates = [&](const Vector& u) {
    Vector c(n - 1);
    Vector rest = u;
    for (int b = 0; b < o; ++b) {
      const double w = u[td.outside[b]];
      c[m - 1 + b] = w;
      rest -= w * td.basis.col(m - 1 + b);
    }
    Vector scaled(m);
    for (int a = 0; a < m; ++a) scaled[a] = rest[td.support[a]] / sq[a];
    c.head(m - 1) = U.transpose() * scaled;
    return c;
  };

  const Matrix image = td.jacobian * td.basis;
  td.matrix.resize(n - 1, n - 1);
  for (int c = 0; c < n - 1; ++c) td.matrix.col(c) = coordinates(image.col(c));
  const Matrix lead = td.matrix.topLeftCorner(m - 1, m - 1);
  td.support_block = 0.5 * (lead + lead.transpose());
  td.outside_block = td.matrix.bottomRightCorner(o, o);
  return td;
}

std::string stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    default: return "marginal";
  }
}

std::vector<EigenGroup> group_eigenvalues(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<EigenGroup> groups;
  for (double v : values) {
    if (!groups.empty() && std::abs(v - groups.back().value) <= tol * std::max(1.0, std::abs(v))) {
      auto& g = groups.back();
      g.value = (g.value * g.multiplicity + v) / (g.multiplicity + 1);
      ++g.multiplicity;
    } else {
      groups.push_back({v, 1});
    }
  }
  return groups;
}

double two_level_lambda(int K, int M, double beta, double x) {
  return beta * K * (K - 1) * x * x + 2.0 * K * (beta * (M - 2) - 1.0) * x +
         (M - 2) * (beta * (M - 1) - 2.0);
}

StabilityReport classify_stability(const EquilibriumRecord& record, double alpha) {
  const TangentDifferential td = differential_DF(record.vector, alpha);
  const int n = record.vector.dim();
  const int m = static_cast<int>(td.support.size());
  const int o = static_cast<int>(td.outside.size());

  StabilityReport rep;
  std::vector<std::pair<double, Vector>> pairs;

  Eigen::SelfAdjointEigenSolver<Matrix> sym(td.support_block);
  if (sym.info() != Eigen::Success) throw NumericalError("support block eigen solve failed");
  for (int k = 0; k < m - 1; ++k)
    pairs.emplace_back(sym.eigenvalues()[k], td.basis.leftCols(m - 1) * sym.eigenvectors().col(k));

  if (o > 0) {
    const Matrix& B = td.outside_block;
    const bool diagonal = (B - Matrix(B.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (diagonal) {
      for (int b = 0; b < o; ++b) pairs.emplace_back(B(b, b), td.basis.col(m - 1 + b));
    } else {
      Eigen::EigenSolver<Matrix> gen(B);
      for (int b = 0; b < o; ++b) {
        const auto lam = gen.eigenvalues()[b];
        if (std::abs(lam.imag()) > 1e-10) throw NumericalError("complex eigenvalue off the support");
        pairs.emplace_back(lam.real(), td.basis.rightCols(o) * gen.eigenvectors().col(b).real());
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  rep.eigenvectors.resize(n, static_cast<Eigen::Index>(pairs.size()));
  for (size_t k = 0; k < pairs.size(); ++k) {
    rep.eigenvalues.push_back(pairs[k].first);
    rep.eigenvectors.col(static_cast<Eigen::Index>(k)) = pairs[k].second;
  }
  rep.groups = group_eigenvalues(rep.eigenvalues);

  const double beta = beta_of_alpha(alpha);
  bool near_threshold = false;
  if (record.kind == EquilibriumKind::TwoLevel) {
    near_threshold = std::abs(beta - beta_M(record.M)) <= 1e-9;
    if (record.K >= 3 && 2 * record.K < record.M)
      near_threshold = near_threshold || std::abs(beta - beta_threshold(record.K, record.M).beta) <= 1e-9;

    if (record.M - record.K >= 2) {
      const Vector& x = record.vector.values();
      const double a = x[0], b = x[record.K];
      const ReinforcementSums s = reinforcement_sums(x, alpha);
      const double qa = reinforce_pow(a, alpha), qb = reinforce_pow(b, alpha);
      const double d = qa - qb;
      const int K = record.K, M = record.M;
      const double scaled = beta * K * (K - 1) * d * d + 2.0 * K * (beta * (M - 2) - 1.0) * d * qb +
                            (M - 2) * (beta * (M - 1) - 2.0) * qb * qb;
      LambdaCheck lc;
      lc.lambda = two_level_lambda(K, M, beta, record.x);
      lc.predicted = alpha * scaled / s.Hi[K];
      for (double ev : rep.eigenvalues)
        if (std::abs(ev - lc.predicted) <= 1e-7 * std::max(1.0, std::abs(lc.predicted))) lc.matched = true;
      rep.lambda_check = lc;
    }
  }

  const double top = rep.eigenvalues.empty() ? -1.0 : rep.eigenvalues.back();
  bool zero = false;
  for (double ev : rep.eigenvalues)
    if (std::abs(ev) <= 1e-9) zero = true;
  if (top > 1e-9)
    rep.classification = Stability::Unstable;
  else if (zero || near_threshold)
    rep.classification = Stability::Marginal;
  else
    rep.classification = Stability::Stable;
  return rep;
}

CoboundaryResult coboundary_check(const ProbabilityMeasure& v, const Vector& f) {
  if (f.size() != v.dim()) throw DomainError("coboundary_check: dimension mismatch");
  const std::vector<int> A = v.support();
  const int m = static_cast<int>(A.size());
  if (m < 3) throw DomainError("coboundary_check: support below three points");
  const int rows = m * (m - 1);
  Matrix design = Matrix::Zero(rows, m + 1);
  Vector rhs(rows);
  int r = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      design(r, 0) = 1.0;
      design(r, 1 + i) += 1.0;
      design(r, 1 + j) -= 1.0;
      rhs[r] = f[A[j]];
      ++r;
    }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  const Vector sol = cod.solve(rhs);
  CoboundaryResult out;
  out.C = sol[0];
  out.residual = std::sqrt((design * sol - rhs).squaredNorm() / rows);
  double scale = 1.0;
  for (int i : A) scale = std::max(scale, std::abs(f[i]));
  out.obstructed = out.residual > 1e-10 * scale;
  return out;
}

}  // namespace vrnbw
