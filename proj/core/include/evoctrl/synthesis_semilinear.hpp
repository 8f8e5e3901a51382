#pragma once

#include "evoctrl/synthesis_linear.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evoctrl {

/// Source term f(t, x) of the semilinear dynamics with its declared
/// uniform bound: every sample the solvers evaluate must satisfy
/// ||f(t, x)||_p <= bound. Violations and non-finite samples are reported
/// errors, never silent.
struct NonlinearitySpec {
  std::function<StateVector(double, const StateVector&)> f;
  double bound = 0.0;
};

/// Zero source; every semilinear routine then reproduces its linear
/// counterpart exactly.
NonlinearitySpec zero_nonlinearity();

struct SemilinearProblem {
  LinearProblem base;
  NonlinearitySpec nl;
};

/// A-priori sup-norm ceiling for solution-operator outputs,
///   C ||x0|| + C K T + C^2 N^2 Ctilde T / lambda,
/// with Ctilde = ||target|| + C ||x0|| + C K T, C the evolution growth
/// constant (norm witness, at least one), K the declared source bound and
/// N the input norm bound. No output of the solution operator can exceed
/// this, so escape means the iteration left the regime where a fixed point
/// exists and the solve aborts. lambda = +infinity drops the control term
/// (the ceiling of the uncontrolled flow).
struct IterateCeiling {
  double growth = 1.0;        // C
  double source_bound = 0.0;  // K
  double input_norm = 0.0;    // N
  double defect_scale = 0.0;  // Ctilde
  double value = 0.0;
};

IterateCeiling iterate_ceiling(const SemilinearProblem& sp,
                               const EvolutionOperator& ev, double lambda);

/// Thrown when a solution-operator output escapes the a-priori ceiling.
struct CeilingViolation : std::runtime_error {
  CeilingViolation(const std::string& msg, double observed_,
                   const IterateCeiling& ceiling_)
      : std::runtime_error(msg), observed(observed_), ceiling(ceiling_) {}
  double observed;
  IterateCeiling ceiling;
};

/// Closing defect of a trajectory iterate:
///   target - U(T, 0) x0 - sum_j tau_j U(T, t_j) f(t_j, x(t_j)).
/// With f == 0 this is exactly the linear target defect.
StateVector nonlinear_defect(const SemilinearProblem& sp,
                             const EvolutionOperator& ev,
                             const StateTrajectory& x);

/// One application of the solution operator: close the nonlinear defect of
/// x with the regularized feedback law, then propagate under the combined
/// sources f(t_j, x(t_j)) + B u(t_j).
struct SolutionOperatorResult {
  StateTrajectory trajectory;
  ControlSignal control;
  ResolventSolution resolvent;
  StateVector defect;            // the defect the control closes
  double max_source_norm = 0.0;  // largest ||f(t_j, x_j)||_p evaluated
  double sup_norm = 0.0;         // sup-in-time norm of the output
  IterateCeiling ceiling;
};

SolutionOperatorResult apply_solution_operator(const SemilinearProblem& sp,
                                               const EvolutionOperator& ev,
                                               const GramianOperator& G,
                                               const ResolventConfig& rc,
                                               const StateTrajectory& x);

struct FixedPointConfig {
  double tol = 1e-10;       // absolute sup-in-time update tolerance
  int max_iter = 200;
  double relaxation = 1.0;  // rho in [0, 1]
};

struct FixedPointReport {
  int iterations = 0;              // damped updates applied
  double final_update_norm = 0.0;  // sup-in-time norm of the last update
  double residual = 0.0;  // ||Psi(x) - x|| at the returned iterate
  bool converged = false;
  double relaxation = 1.0;       // relaxation in effect at exit
  double max_source_norm = 0.0;  // largest ||f|| over every evaluation
  IterateCeiling ceiling;
};

struct FixedPointSolution {
  StateTrajectory trajectory;
  ControlSignal control;
  FixedPointReport report;
  StateVector defect;           // nonlinear defect at the returned iterate
  ResolventSolution resolvent;  // solve behind the returned control
};

/// Relaxed Picard iteration x <- (1 - rho) x + rho Psi(x), started from the
/// free linear flow. Converged once the prospective update is within tol
/// AND the undamped self-consistency residual ||Psi(x) - x|| is within
/// 10 tol, so the returned pair solves the controlled integral system to
/// that residual. rho is halved (floor 1/16) when the applied update norm
/// grows three times in a row. Non-convergence returns the best iterate,
/// flagged, never thrown.
FixedPointSolution fixed_point_solve(const SemilinearProblem& sp,
                                     const EvolutionOperator& ev,
                                     const GramianOperator& G,
                                     const ResolventConfig& rc,
                                     const FixedPointConfig& fp);

/// Uncontrolled semilinear flow: the same iteration with the input switched
/// off. Manufactures reachable targets and serves as a test oracle.
std::pair<StateTrajectory, FixedPointReport> free_semilinear_flow(
    const SemilinearProblem& sp, const EvolutionOperator& ev,
    const FixedPointConfig& fp);

/// Fixed-point synthesis for each lambda (positive, decreasing); per-lambda
/// failures are recorded, not fatal. With f == 0 the records coincide with
/// the linear sweep's.
SweepReport semilinear_lambda_sweep(const SemilinearProblem& sp,
                                    const EvolutionOperator& ev,
                                    const GramianOperator& G,
                                    const std::vector<double>& lambdas,
                                    const ResolventConfig& rc_base,
                                    const FixedPointConfig& fp);

}  // namespace evoctrl
