#pragma once

#include "evoctrl/control_core.hpp"
#include "evoctrl/function_space.hpp"

#include <stdexcept>

namespace evoctrl {

/// Parameters of the regularized resolvent solve
///   lambda z + Gramian J[z] = lambda h.
struct ResolventConfig {
  double lambda = 1.0;   // regularization weight, > 0
  int max_iter = 200;    // iteration budget for the nonlinear paths
  double tol = 1e-10;    // residual tolerance, scaled by (1 + ||h||_p)
  double damping = 0.5;  // relaxation of the fallback fixed-point pass
};

enum class ResolventPath { hilbert_direct, newton, damped_picard };

struct ResolventSolution {
  StateVector state;      // z with ||z||_p <= ||h||_p
  double residual = 0.0;  // ||lambda z + Gramian J[z] - lambda h||_p
  int iterations = 0;
  ResolventPath path = ResolventPath::hilbert_direct;
};

/// Raised when the iteration budget is exhausted; carries the best
/// residual reached so callers can record the failure.
struct ResolventFailure : std::runtime_error {
  ResolventFailure(const std::string& what, double best, int iters)
      : std::runtime_error(what), best_residual(best), iterations(iters) {}
  double best_residual;
  int iterations;
};

/// Solves lambda z + Gramian J[z] = lambda h.
///
/// For p = 2 the equation is linear and solved directly; for p > 2 a
/// Newton iteration with the analytic duality-map Jacobian is used, with
/// a damped fixed-point fallback when a step fails to reduce the
/// residual. The initial iterate is (lambda / (lambda + trace-scale)) h
/// unless one is supplied (warm starts across nearby solves).
/// `force_iterative` routes p = 2 through the nonlinear path, which is
/// used to cross-check the two implementations.
ResolventSolution solve_resolvent(const GramianOperator& G,
                                  const LpConfig& cfg,
                                  const ResolventConfig& rc,
                                  const StateVector& h,
                                  const StateVector* initial = nullptr,
                                  bool force_iterative = false);

/// Residual of a candidate solution in the state norm.
double resolvent_residual(const GramianOperator& G, const LpConfig& cfg,
                          double lambda, const StateVector& h,
                          const StateVector& z);

/// Jacobian of the duality map at v (dense; diagonal plus rank one).
/// Undefined at v = 0 for p > 2.
Eigen::MatrixXd duality_map_jacobian(const StateVector& v,
                                     const LpConfig& cfg);

}  // namespace evoctrl
