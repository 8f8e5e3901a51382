#pragma once

#include "evoctrl/function_space.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace evoctrl {

/// Diffusion generator family A(t) = a(t, xi) d^2/dxi^2 with Dirichlet
/// boundary, discretized by second-order central differences on the grid.
struct GeneratorSpec {
  std::shared_ptr<const SpatialGrid> grid;
  std::function<double(double, double)> coefficient;  // a(t, xi)
  double lower_bound = 1.0;      // declared delta; a >= delta > 0 everywhere
  double holder_exponent = 1.0;  // declared Hoelder exponent of t -> a(t, .)
};

/// Uniform partition of [0, T] with composite-trapezoid weights.
struct TimeGrid {
  double horizon = 0.0;
  int n_steps = 0;
  Eigen::VectorXd nodes;    // t_0 = 0 < ... < t_m = T
  Eigen::VectorXd weights;  // trapezoid: dt/2, dt, ..., dt, dt/2
};

std::shared_ptr<const TimeGrid> make_uniform_time_grid(double horizon,
                                                       int n_steps);

/// Dense matrix of the discretized generator at time t:
/// diag(a(t, xi_i)) * D2 with the Dirichlet (1, -2, 1)/h^2 stencil.
Eigen::MatrixXd generator_matrix(const GeneratorSpec& gen, double t);

/// Discrete two-parameter evolution family U(t_j, t_i). One implicit
/// midpoint (Crank-Nicolson) propagator per step, with the coefficient
/// frozen at the interval midpoint, plus cached terminal operators
/// U(T, t_j) for quadratures against the final time.
struct EvolutionOperator {
  std::shared_ptr<const SpatialGrid> grid;
  std::shared_ptr<const TimeGrid> time;
  std::vector<Eigen::MatrixXd> step_ops;      // P_j ~ U(t_{j+1}, t_j)
  std::vector<Eigen::MatrixXd> terminal_ops;  // U(T, t_j), j = 0..m
  double norm_witness = 1.0;  // max over probes/time of ||U(t,0)v|| / ||v||

  int steps() const { return static_cast<int>(step_ops.size()); }
};

/// Builds the family; rejects any sampled coefficient below the declared
/// lower bound, reporting the offending (t, xi).
EvolutionOperator build_evolution(const GeneratorSpec& gen,
                                  std::shared_ptr<const TimeGrid> time);

/// U(t_j, t_i) v by composing step propagators (i <= j required;
/// i == j yields v unchanged).
StateVector apply(const EvolutionOperator& ev, int j, int i,
                  const StateVector& v);

/// Adjoint with respect to the quadrature pairing:
/// pairing(U v, phi) == pairing(v, U* phi) for all v, phi.
StateVector apply_adjoint(const EvolutionOperator& ev, int j, int i,
                          const StateVector& phi);

/// Exact decay factor exp(-n^2 * int_s^t a_bar(tau) dtau) of mode n for a
/// space-independent coefficient a_bar; the integral is evaluated by
/// composite Simpson quadrature at reference accuracy.
double spectral_reference(int n_mode, double t, double s,
                          const std::function<double(double)>& a_bar);

/// Largest normalized defect between composed actions over sampled index
/// triples, plus the defect of the cached terminal operators against a
/// fresh composition. Exposes cache corruption; ~0 for a healthy build.
double cocycle_defect(const EvolutionOperator& ev);

}  // namespace evoctrl
