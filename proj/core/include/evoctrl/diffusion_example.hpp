#pragma once

#include "evoctrl/synthesis_semilinear.hpp"

#include <functional>
#include <vector>

namespace evoctrl {

/// Diffusion coefficient shape: a fixed constant, a function of time
/// alone, or a full a(t, xi) handle.
enum class CoefficientKind { constant, time_only, space_time };

/// How the steering target is produced: sampling an explicit profile, or
/// perturbing the terminal state of the uncontrolled flow by a scaled
/// fundamental mode (which keeps the target near the reachable set).
enum class TargetKind { profile, free_flow_perturbation };

/// Source term selection: none (linear dynamics) or the bounded sine
/// nonlinearity f(t, x) = sin(x) with its exact bound ||1||_p.
enum class SourceKind { none, sine };

/// Everything needed to assemble the benchmark control system
///   y_t = a(t, xi) y_xixi + f(t, y) + eta u   on (0, pi), Dirichlet.
struct DiffusionConfig {
  CoefficientKind a_kind = CoefficientKind::constant;
  double a_value = 1.0;                                 // constant kind
  std::function<double(double)> a_time;                 // time_only kind
  std::function<double(double, double)> a_space_time;   // space_time kind
  double lower_bound = 1.0;  // declared delta with a >= delta > 0
  double holder_mu = 1.0;    // declared Hoelder order of t -> a(t, .)

  // Control gain eta >= 0. Zero is accepted deliberately: it produces the
  // degenerate input whose zero Gramian certificate the harness must
  // refuse to sweep on.
  double gain = 1.0;

  SourceKind source = SourceKind::sine;

  std::function<double(double)> initial;  // phi(xi)

  TargetKind target_kind = TargetKind::profile;
  std::function<double(double)> target_profile;
  double perturbation_amplitude = 0.0;  // free_flow_perturbation kind

  int n_space = 101;
  int n_time = 200;
  double horizon = 1.0;
  double p = 2.0;
  std::vector<double> lambda_list;
};

/// A built problem keeps the evolution family that realized it; the
/// free-flow target needs the family anyway, and sharing it guarantees
/// problem and operators agree.
struct BuiltProblem {
  SemilinearProblem problem;
  EvolutionOperator evolution;
};

/// Assembles grid, generator, scaled-identity input, source term, initial
/// state, and target. Rejects coefficients dipping below the declared
/// lower bound, reporting the offending (t, xi).
BuiltProblem build_problem(const DiffusionConfig& dc);

/// Empirical Hoelder quotient of t -> a(t, .): the sup over sampled time
/// pairs of sup_xi |a(t,xi) - a(s,xi)| / |t - s|^mu. Advisory diagnostic,
/// not a gate; exactly zero for a constant coefficient.
double holder_estimate(const DiffusionConfig& dc, int sample_count);

}  // namespace evoctrl
