#include "vrnbw/flow.hpp"

#include <cmath>

namespace vrnbw {

namespace {

double signed_pow(double x, double alpha) {
  if (alpha == 1.0) return x;
  return std::pow(std::abs(x), alpha);
}

Vector vertex_stationary(const Vector& v, double alpha, bool extended) {
  const int n = static_cast<int>(v.size());
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = extended ? signed_pow(v[i], alpha) : reinforce_pow(v[i], alpha);
  const double total = q.sum();
  Vector Hi(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) acc += q[j] * (total - q[i] - q[j]);
    Hi[i] = acc;
  }
  const double H = q.dot(Hi);
  if (!(std::abs(H) > 0.0)) throw DomainError("H(v) = 0: support has at most two points");
  return q.cwiseProduct(Hi) / H;
}

}  // namespace

Vector vector_field(const SignedMeasure& v, double alpha) {
  const ProbabilityMeasure mu = project_to_sigma(v);
  return vertex_stationary(mu.values(), alpha, false) - v.values();
}

Vector extended_vector_field(const Vector& v, double alpha) {
  return vertex_stationary(v, alpha, true) - v;
}

ReinforcementSums lyapunov_components(const Vector& v, double alpha) {
  return reinforcement_sums(v, alpha);
}

double lyapunov(const Vector& v, double alpha) { return reinforcement_sums(v, alpha).H; }

Vector lyapunov_gradient(const Vector& v, double alpha) {
  const ReinforcementSums s = reinforcement_sums(v, alpha);
  Vector g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    g[i] = 3.0 * alpha * reinforce_pow(v[i], alpha - 1.0) * s.Hi[i];
  if (alpha == 1.0) g = 3.0 * s.Hi;
  return g;
}

TrajectoryRecord integrate_flow(const ProbabilityMeasure& v0, double alpha,
                                const FlowOptions& options) {
  if (!(options.dt > 0.0)) throw DomainError("step size must be positive");
  TrajectoryRecord rec;
  Vector v = v0.values();
  double t = 0.0;
  auto F = [&](const Vector& x) { return vector_field(SignedMeasure(x), alpha); };
  auto record = [&](const Vector& f) {
    rec.times.push_back(t);
    rec.states.push_back(v);
    rec.lyapunov.push_back(lyapunov(v, alpha));
    rec.field_norm.push_back(f.cwiseAbs().maxCoeff());
  };

  long step_index = 0;
  Vector f = F(v);
  record(f);
  while (t < options.max_time - 1e-12) {
    if (f.cwiseAbs().maxCoeff() < options.stop_tolerance) {
      rec.converged = true;
      break;
    }
    const double h = options.dt;
    if (options.method == Integrator::Euler) {
      v += h * f;
    } else {
      const Vector k1 = f;
      const Vector k2 = F(v + 0.5 * h * k1);
      const Vector k3 = F(v + 0.5 * h * k2);
      const Vector k4 = F(v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double drift = v.sum() - 1.0;
    if (std::abs(drift) > 1e-9) {
      v /= v.sum();
      ++rec.renormalizations;
    }
    t += h;
    ++step_index;
    f = F(v);
    if (options.record_every > 0 && step_index % options.record_every == 0) record(f);
  }
  if (rec.times.back() != t) record(f);
  if (f.cwiseAbs().maxCoeff() < options.stop_tolerance) rec.converged = true;
  return rec;
}

}  // namespace vrnbw
