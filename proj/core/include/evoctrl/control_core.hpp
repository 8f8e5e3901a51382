#pragma once

#include "evoctrl/evolution.hpp"
#include "evoctrl/function_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

namespace evoctrl {

/// Bounded input operator B from the control space (weighted l2 on the
/// grid) into the state space. Either a scalar gain times the identity or
/// a dense matrix.
struct InputOperator {
  enum class Kind { scaled_identity, dense };
  Kind kind = Kind::scaled_identity;
  std::shared_ptr<const SpatialGrid> grid;
  double gain = 1.0;       // scaled_identity only; >= 0, 0 = degenerate
  Eigen::MatrixXd matrix;  // dense only
  double norm_bound = 0.0;  // certified ||B u|| <= norm_bound ||u||
};

/// gain * identity; the recorded norm bound accounts for the l2 -> lp
/// embedding on the discrete grid (exact for the concentration extremal).
InputOperator make_scaled_identity_input(double gain,
                                         std::shared_ptr<const SpatialGrid> grid,
                                         const LpConfig& cfg);

/// Dense input operator on the same grid; the norm bound is the weighted
/// row-norm estimate (a certified upper bound).
InputOperator make_dense_input(Eigen::MatrixXd matrix,
                               std::shared_ptr<const SpatialGrid> grid,
                               const LpConfig& cfg);

StateVector apply_input(const InputOperator& B, const StateVector& u);

/// Adjoint B* against the duality pairing: h_inner(u, B* phi) =
/// pairing(B u, phi).
StateVector apply_input_adjoint(const InputOperator& B,
                                const StateVector& phi);

/// Control signal sampled on the time grid (one control-space vector per
/// node).
struct ControlSignal {
  std::shared_ptr<const TimeGrid> time;
  std::vector<StateVector> samples;
};

ControlSignal zero_signal(std::shared_ptr<const TimeGrid> time,
                          std::shared_ptr<const SpatialGrid> grid);

/// Quadrature energy sum_j tau_j ||u_j||^2 of a signal.
double signal_energy(const ControlSignal& u);

/// Terminal controllability action: sum_j tau_j U(T, t_j) B u(t_j),
/// the trapezoid discretization of int_0^T U(T, t) B u(t) dt.
StateVector controllability_map(const EvolutionOperator& ev,
                                const InputOperator& B,
                                const ControlSignal& u);

/// Its adjoint: sample j equals B* U(T, t_j)* phi.
ControlSignal controllability_map_adjoint(const EvolutionOperator& ev,
                                          const InputOperator& B,
                                          const StateVector& phi);

/// Controllability Gramian: dense operator mapping dual densities to
/// states, assembled with the same time quadrature as controllability_map
/// so that the two factorizations agree identically.
struct GramianOperator {
  std::shared_ptr<const SpatialGrid> grid;
  std::shared_ptr<const TimeGrid> time;
  Eigen::MatrixXd matrix;
  std::uint64_t build_hash = 0;  // provenance of (evolution, input) pair
};

/// sum_j tau_j U(T, t_j) B B* U(T, t_j)*. Throws if the assembled pairing
/// form fails symmetry or spot-checked nonnegativity.
GramianOperator assemble_gramian(const EvolutionOperator& ev,
                                 const InputOperator& B);

StateVector apply_gramian(const GramianOperator& G, const StateVector& phi);

/// Smallest eigenvalue of the pairing-symmetrized Gramian form, normalized
/// against the weighted l2 norm of the density. Positive iff the form is
/// positive definite; values below -1e-10 indicate an assembly bug and are
/// reported as errors.
double positivity_certificate(const GramianOperator& G);

}  // namespace evoctrl
