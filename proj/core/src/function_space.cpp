#include "evoctrl/function_space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evoctrl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_grid(const SpatialGrid& g) {
  if (g.nodes.size() < 1) {
    throw std::invalid_argument("SpatialGrid: needs at least one node");
  }
  if (g.nodes.size() != g.weights.size()) {
    throw std::invalid_argument("SpatialGrid: node/weight length mismatch");
  }
  double wsum = 0.0;
  for (int i = 0; i < g.nodes.size(); ++i) {
    const double x = g.nodes[i];
    if (!(x > 0.0 && x < kPi)) {
      std::ostringstream msg;
      msg << "SpatialGrid: node " << i << " = " << x << " outside (0, pi)";
      throw std::invalid_argument(msg.str());
    }
    if (i > 0 && !(g.nodes[i] > g.nodes[i - 1])) {
      throw std::invalid_argument("SpatialGrid: nodes not strictly increasing");
    }
    if (!(g.weights[i] > 0.0)) {
      std::ostringstream msg;
      msg << "SpatialGrid: weight " << i << " = " << g.weights[i]
          << " not positive";
      throw std::invalid_argument(msg.str());
    }
    wsum += g.weights[i];
  }
  if (wsum > kPi * (1.0 + 1e-12)) {
    throw std::invalid_argument("SpatialGrid: weights sum beyond pi");
  }
}

void require_finite(const StateVector& v, const char* who) {
  if (!v.values.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite entries");
  }
}

void require_same_grid(const StateVector& a, const StateVector& b,
                       const char* who) {
  if (!same_grid(a, b)) {
    throw std::invalid_argument(std::string(who) + ": grid mismatch");
  }
}

}  // namespace

std::shared_ptr<const SpatialGrid> make_uniform_grid(int n_interior) {
  if (n_interior < 1) {
    throw std::invalid_argument("make_uniform_grid: need n_interior >= 1");
  }
  const double h = kPi / (n_interior + 1);
  SpatialGrid g;
  g.nodes.resize(n_interior);
  g.weights.setConstant(n_interior, h);
  for (int i = 0; i < n_interior; ++i) g.nodes[i] = h * (i + 1);
  validate_grid(g);
  return std::make_shared<const SpatialGrid>(std::move(g));
}

std::shared_ptr<const SpatialGrid> make_midpoint_grid(int n_cells) {
  if (n_cells < 1) {
    throw std::invalid_argument("make_midpoint_grid: need n_cells >= 1");
  }
  const double h = kPi / n_cells;
  SpatialGrid g;
  g.nodes.resize(n_cells);
  g.weights.setConstant(n_cells, h);
  for (int i = 0; i < n_cells; ++i) g.nodes[i] = h * (i + 0.5);
  validate_grid(g);
  return std::make_shared<const SpatialGrid>(std::move(g));
}

StateVector make_state(std::shared_ptr<const SpatialGrid> grid,
                       Eigen::VectorXd values) {
  if (!grid) throw std::invalid_argument("make_state: null grid");
  if (values.size() != grid->nodes.size()) {
    throw std::invalid_argument("make_state: value length != grid size");
  }
  return StateVector{std::move(grid), std::move(values)};
}

StateVector zero_state(std::shared_ptr<const SpatialGrid> grid) {
  if (!grid) throw std::invalid_argument("zero_state: null grid");
  const int n = grid->size();
  return StateVector{std::move(grid), Eigen::VectorXd::Zero(n)};
}

StateVector sample_profile(std::shared_ptr<const SpatialGrid> grid,
                           const std::function<double(double)>& f) {
  if (!grid) throw std::invalid_argument("sample_profile: null grid");
  if (!f) throw std::invalid_argument("sample_profile: null handle");
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->nodes[i]);
  StateVector out{grid, std::move(v)};
  require_finite(out, "sample_profile");
  return out;
}

bool grids_equal(const std::shared_ptr<const SpatialGrid>& a,
                 const std::shared_ptr<const SpatialGrid>& b) {
  if (a == b) return a != nullptr;
  if (!a || !b) return false;
  return a->nodes.size() == b->nodes.size() && a->nodes == b->nodes &&
         a->weights == b->weights;
}

bool same_grid(const StateVector& a, const StateVector& b) {
  return grids_equal(a.grid, b.grid);
}

LpConfig make_lp_config(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("make_lp_config: need finite p >= 2");
  }
  return LpConfig{p, p / (p - 1.0)};
}

double weighted_norm(const StateVector& v, double exponent) {
  if (!(exponent >= 1.0)) {
    throw std::invalid_argument("weighted_norm: need exponent >= 1");
  }
  require_finite(v, "weighted_norm");
  const auto& w = v.grid->weights;
  const double vmax = v.values.cwiseAbs().maxCoeff();
  if (vmax == 0.0) return 0.0;
  if (exponent == 2.0) {
    const double s =
        (w.array() * (v.values.array() / vmax).square()).sum();
    return vmax * std::sqrt(s);
  }
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    s += w[i] * std::pow(std::abs(v.values[i]) / vmax, exponent);
  }
  return vmax * std::pow(s, 1.0 / exponent);
}

double lp_norm(const StateVector& v, const LpConfig& cfg) {
  return weighted_norm(v, cfg.p);
}

double lq_norm(const StateVector& v, const LpConfig& cfg) {
  return weighted_norm(v, cfg.q);
}

double pairing(const StateVector& v, const StateVector& phi) {
  require_same_grid(v, phi, "pairing");
  require_finite(v, "pairing");
  require_finite(phi, "pairing");
  return (v.grid->weights.array() * v.values.array() * phi.values.array())
      .sum();
}

namespace {

// |u_i|^{e-2} u_i applied entrywise; power-law core shared by the map and
// its inverse.
Eigen::VectorXd signed_power(const Eigen::VectorXd& u, double e) {
  Eigen::VectorXd out(u.size());
  for (int i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    out[i] = (a == 0.0) ? 0.0 : std::pow(a, e - 2.0) * u[i];
  }
  return out;
}

StateVector power_law_map(const StateVector& v, double e) {
  const double vmax = v.values.cwiseAbs().maxCoeff();
  if (vmax == 0.0) return zero_state(v.grid);
  // J[v] = vmax * |u|^{e-2} u ||u||_e^{2-e} with u = v / vmax.
  StateVector u{v.grid, v.values / vmax};
  const double nu = weighted_norm(u, e);
  Eigen::VectorXd out =
      signed_power(u.values, e) * (vmax * std::pow(nu, 2.0 - e));
  return StateVector{v.grid, std::move(out)};
}

}  // namespace

StateVector duality_map(const StateVector& v, const LpConfig& cfg) {
  require_finite(v, "duality_map");
  if (cfg.p == 2.0) return v;  // identity on values
  return power_law_map(v, cfg.p);
}

StateVector duality_map_inverse(const StateVector& phi, const LpConfig& cfg) {
  require_finite(phi, "duality_map_inverse");
  if (cfg.p == 2.0) return phi;
  return power_law_map(phi, cfg.q);
}

}  // namespace evoctrl
