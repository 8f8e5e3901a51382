#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>

namespace evoctrl {

/// Interior grid on (0, pi) with positive quadrature weights.
/// Dirichlet boundary values are implicit zeros and are never stored.
struct SpatialGrid {
  Eigen::VectorXd nodes;    // strictly increasing, all inside (0, pi)
  Eigen::VectorXd weights;  // w_i > 0, sum(w_i) <= pi

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Uniform interior grid with composite-trapezoid weights (w_i = h,
/// h = pi / (n_interior + 1)); the boundary half-cells belong to the
/// implicit zero boundary values.
std::shared_ptr<const SpatialGrid> make_uniform_grid(int n_interior);

/// Midpoint-rule grid over [0, pi]; integrates constants exactly.
std::shared_ptr<const SpatialGrid> make_midpoint_grid(int n_cells);

/// Grid function over a SpatialGrid. Represents a state, a target, or a
/// dual-space element stored as a density paired through the weights.
struct StateVector {
  std::shared_ptr<const SpatialGrid> grid;
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
};

StateVector make_state(std::shared_ptr<const SpatialGrid> grid,
                       Eigen::VectorXd values);
StateVector zero_state(std::shared_ptr<const SpatialGrid> grid);

/// Samples f(xi) at the grid nodes.
StateVector sample_profile(std::shared_ptr<const SpatialGrid> grid,
                           const std::function<double(double)>& f);

/// True when the two grids are the same object or carry equal node and
/// weight data.
bool grids_equal(const std::shared_ptr<const SpatialGrid>& a,
                 const std::shared_ptr<const SpatialGrid>& b);

/// True when both vectors live on the same grid (shared pointer or equal
/// node/weight data).
bool same_grid(const StateVector& a, const StateVector& b);

/// Lebesgue exponent pair: p >= 2 together with the conjugate exponent
/// q = p / (p - 1), stored so consistency is checkable.
struct LpConfig {
  double p;
  double q;
};

/// Validates p >= 2 and derives q.
LpConfig make_lp_config(double p);

/// (sum_i w_i |v_i|^e)^(1/e), scaled to avoid overflow. Requires e >= 1
/// and finite input.
double weighted_norm(const StateVector& v, double exponent);

/// Norm with exponent p.
double lp_norm(const StateVector& v, const LpConfig& cfg);

/// Norm with the conjugate exponent q (used on dual densities).
double lq_norm(const StateVector& v, const LpConfig& cfg);

/// Duality pairing <v, phi> = sum_i w_i v_i phi_i. Rejects grid mismatch.
double pairing(const StateVector& v, const StateVector& phi);

/// Inner product of the control space (weighted l2 on the same grid).
inline double h_inner(const StateVector& u, const StateVector& v) {
  return pairing(u, v);
}

/// Duality mapping J[v]_i = |v_i|^{p-2} v_i ||v||_p^{2-p}.
///
/// J is the identity on values for p = 2, J[0] = 0, and J[c v] = c J[v]
/// for real c. It satisfies <v, J[v]> = ||v||_p^2 and
/// ||J[v]||_q = ||v||_p.
StateVector duality_map(const StateVector& v, const LpConfig& cfg);

/// Inverse of duality_map, realized as the duality mapping of the dual
/// space (same power law with exponent q).
StateVector duality_map_inverse(const StateVector& phi, const LpConfig& cfg);

}  // namespace evoctrl
