#include "evoctrl/resolvent_solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace evoctrl {

namespace {

StateVector residual_vector(const GramianOperator& G, const LpConfig& cfg,
                            double lambda, const StateVector& h,
                            const StateVector& z) {
  const StateVector Jz = duality_map(z, cfg);
  Eigen::VectorXd r =
      lambda * z.values + G.matrix * Jz.values - lambda * h.values;
  return StateVector{h.grid, std::move(r)};
}

}  // namespace

double resolvent_residual(const GramianOperator& G, const LpConfig& cfg,
                          double lambda, const StateVector& h,
                          const StateVector& z) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("resolvent_residual: need lambda > 0");
  }
  return lp_norm(residual_vector(G, cfg, lambda, h, z), cfg);
}

Eigen::MatrixXd duality_map_jacobian(const StateVector& v,
                                     const LpConfig& cfg) {
  const int n = v.size();
  if (cfg.p == 2.0) return Eigen::MatrixXd::Identity(n, n);
  const double vmax = v.values.cwiseAbs().maxCoeff();
  if (vmax == 0.0) {
    throw std::invalid_argument(
        "duality_map_jacobian: undefined at the origin for p > 2");
  }
  // Scale-free form: with u = v / vmax and nu = ||u||_p,
  //   DJ = (p-1) nu^{2-p} diag(|u_i|^{p-2})
  //      + (2-p) nu^{2-2p} g (w o g)^T,  g_i = |u_i|^{p-2} u_i.
  const Eigen::VectorXd u = v.values / vmax;
  const double nu = weighted_norm(StateVector{v.grid, u}, cfg.p);
  Eigen::VectorXd absu_pm2(n), g(n);
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(u[i]);
    absu_pm2[i] = (a == 0.0) ? 0.0 : std::pow(a, cfg.p - 2.0);
    g[i] = absu_pm2[i] * u[i];
  }
  Eigen::MatrixXd DJ =
      ((cfg.p - 1.0) * std::pow(nu, 2.0 - cfg.p)) * absu_pm2.asDiagonal();
  const Eigen::VectorXd wg = v.grid->weights.asDiagonal() * g;
  DJ.noalias() +=
      ((2.0 - cfg.p) * std::pow(nu, 2.0 - 2.0 * cfg.p)) * (g * wg.transpose());
  return DJ;
}

ResolventSolution solve_resolvent(const GramianOperator& G,
                                  const LpConfig& cfg,
                                  const ResolventConfig& rc,
                                  const StateVector& h,
                                  const StateVector* initial,
                                  bool force_iterative) {
  if (!(rc.lambda > 0.0) || !std::isfinite(rc.lambda)) {
    throw std::invalid_argument("solve_resolvent: need lambda > 0");
  }
  if (rc.max_iter < 1) {
    throw std::invalid_argument("solve_resolvent: need max_iter >= 1");
  }
  if (!(rc.damping > 0.0 && rc.damping <= 1.0)) {
    throw std::invalid_argument("solve_resolvent: damping in (0, 1]");
  }
  if (!grids_equal(h.grid, G.grid))
    throw std::invalid_argument("solve_resolvent: grid mismatch");

  const int n = h.size();
  const double hnorm = lp_norm(h, cfg);
  const double tol = rc.tol * (1.0 + hnorm);

  if (hnorm == 0.0) {
    return ResolventSolution{zero_state(h.grid), 0.0, 0,
                             cfg.p == 2.0 ? ResolventPath::hilbert_direct
                                          : ResolventPath::newton};
  }

  if (cfg.p == 2.0 && !force_iterative) {
    // Linear case: (lambda I + Gramian) z = lambda h.
    Eigen::MatrixXd M = G.matrix;
    M.diagonal().array() += rc.lambda;
    StateVector z{h.grid,
                  Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(
                      rc.lambda * h.values)};
    const double res = resolvent_residual(G, cfg, rc.lambda, h, z);
    return ResolventSolution{std::move(z), res, 1,
                             ResolventPath::hilbert_direct};
  }

  // Nonlinear path. Initial iterate from the mean Gramian eigenvalue
  // (exact in the scalar case), or the caller-provided warm start.
  const double trace_scale = G.matrix.trace() / n;
  StateVector z = initial  ? *initial
                           : StateVector{h.grid,
                                         (rc.lambda /
                                          (rc.lambda + std::max(trace_scale,
                                                                0.0))) *
                                             h.values};
  double res = resolvent_residual(G, cfg, rc.lambda, h, z);
  double best_res = res;
  int iterations = 0;
  ResolventPath path = ResolventPath::newton;
  int picard_budget = 0;  // > 0 while recovering from a stalled step

  while (res > tol) {
    if (iterations >= rc.max_iter) {
      std::ostringstream msg;
      msg << "solve_resolvent: no convergence within " << rc.max_iter
          << " iterations (best residual " << best_res << ", tolerance "
          << tol << ")";
      throw ResolventFailure(msg.str(), best_res, iterations);
    }
    ++iterations;

    bool stepped = false;
    if (picard_budget == 0) {
      const double zmax = z.values.cwiseAbs().maxCoeff();
      if (zmax > 0.0) {
        Eigen::MatrixXd Jac = G.matrix * duality_map_jacobian(z, cfg);
        Jac.diagonal().array() += rc.lambda;
        const StateVector F = residual_vector(G, cfg, rc.lambda, h, z);
        const Eigen::VectorXd step =
            Eigen::PartialPivLU<Eigen::MatrixXd>(Jac).solve(-F.values);
        double alpha = 1.0;
        while (alpha >= 1e-6) {
          StateVector trial{h.grid, z.values + alpha * step};
          const double trial_res =
              resolvent_residual(G, cfg, rc.lambda, h, trial);
          if (trial_res <= (1.0 - 1e-4 * alpha) * res) {
            z = std::move(trial);
            res = trial_res;
            stepped = true;
            break;
          }
          alpha *= 0.5;
        }
      }
      if (!stepped) picard_budget = 5;  // Newton stalled; relax for a while
    }
    if (!stepped) {
      // Damped fixed point: z <- (1-w) z + w (h - Gramian J[z] / lambda).
      const StateVector Jz = duality_map(z, cfg);
      Eigen::VectorXd target =
          h.values - (G.matrix * Jz.values) / rc.lambda;
      z.values = (1.0 - rc.damping) * z.values + rc.damping * target;
      res = resolvent_residual(G, cfg, rc.lambda, h, z);
      path = ResolventPath::damped_picard;
      if (picard_budget > 0) --picard_budget;
    }
    best_res = std::min(best_res, res);
  }

  return ResolventSolution{std::move(z), res, iterations, path};
}

}  // namespace evoctrl
