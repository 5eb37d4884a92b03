#pragma once

#include <vector>

#include "vrnbw/kernels.hpp"
#include "vrnbw/measures.hpp"

namespace vrnbw {

// F(v) = -v + pi^V(mu(v)) with mu the projection onto Sigma.
Vector vector_field(const SignedMeasure& v, double alpha);

// The same formulas evaluated without projection, extended off the simplex
// with |x|^alpha (x itself when alpha = 1).  Agrees with vector_field on Sigma.
Vector extended_vector_field(const Vector& v, double alpha);

enum class Integrator { RK4, Euler };

struct FlowOptions {
  double dt = 1e-2;
  double max_time = 100.0;
  double stop_tolerance = 1e-10;  // stop once |F|_inf drops below this
  Integrator method = Integrator::RK4;
  int record_every = 1;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> lyapunov;
  std::vector<double> field_norm;
  int renormalizations = 0;  // steps whose mass drifted by more than 1e-9
  bool converged = false;
};

TrajectoryRecord integrate_flow(const ProbabilityMeasure& v0, double alpha,
                                const FlowOptions& options = {});

double lyapunov(const Vector& v, double alpha);
ReinforcementSums lyapunov_components(const Vector& v, double alpha);
// dH/dv_i = 3 alpha v_i^(alpha - 1) H_i
Vector lyapunov_gradient(const Vector& v, double alpha);

}  // namespace vrnbw
