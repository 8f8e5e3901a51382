#include "evoctrl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace evoctrl {

namespace {

void require_on_grid(const EvolutionOperator& ev, const StateVector& v,
                     const char* who) {
  if (!grids_equal(v.grid, ev.grid)) {
    throw std::invalid_argument(std::string(who) + ": grid mismatch");
  }
}

void require_range(const EvolutionOperator& ev, int j, int i,
                   const char* who) {
  const int m = ev.steps();
  if (i < 0 || j > m || i > j) {
    std::ostringstream msg;
    msg << who << ": invalid index pair (j = " << j << ", i = " << i
        << ") for " << m << " steps";
    throw std::invalid_argument(msg.str());
  }
}

// Weighted adjoint of a dense operator: M* = W^{-1} M^T W.
Eigen::VectorXd weighted_adjoint_apply(const Eigen::MatrixXd& M,
                                       const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& x) {
  Eigen::VectorXd y = M.transpose() * (w.asDiagonal() * x);
  return w.cwiseInverse().asDiagonal() * y;
}

double sample_coefficient(const GeneratorSpec& gen, double t, double xi) {
  const double a = gen.coefficient(t, xi);
  if (!std::isfinite(a) || a < gen.lower_bound) {
    std::ostringstream msg;
    msg << "build_evolution: coefficient a(" << t << ", " << xi << ") = " << a
        << " below declared lower bound " << gen.lower_bound;
    throw std::invalid_argument(msg.str());
  }
  return a;
}

}  // namespace

std::shared_ptr<const TimeGrid> make_uniform_time_grid(double horizon,
                                                       int n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("make_uniform_time_grid: need horizon > 0");
  }
  if (n_steps < 1) {
    throw std::invalid_argument("make_uniform_time_grid: need n_steps >= 1");
  }
  TimeGrid tg;
  tg.horizon = horizon;
  tg.n_steps = n_steps;
  tg.nodes.resize(n_steps + 1);
  tg.weights.resize(n_steps + 1);
  for (int j = 0; j <= n_steps; ++j) tg.nodes[j] = (horizon * j) / n_steps;
  const double dt = horizon / n_steps;
  tg.weights.setConstant(dt);
  tg.weights[0] = 0.5 * dt;
  tg.weights[n_steps] = 0.5 * dt;
  return std::make_shared<const TimeGrid>(std::move(tg));
}

Eigen::MatrixXd generator_matrix(const GeneratorSpec& gen, double t) {
  if (!gen.grid) throw std::invalid_argument("generator_matrix: null grid");
  if (!gen.coefficient) {
    throw std::invalid_argument("generator_matrix: null coefficient");
  }
  const auto& g = *gen.grid;
  const int n = g.size();
  // Uniform spacing is assumed by the stencil; verify it.
  const double h = (n > 1) ? g.nodes[1] - g.nodes[0] : 2.0 * g.nodes[0];
  for (int i = 1; i < n; ++i) {
    if (std::abs(g.nodes[i] - g.nodes[i - 1] - h) > 1e-12 * h) {
      throw std::invalid_argument(
          "generator_matrix: stencil requires a uniform grid");
    }
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    const double a = sample_coefficient(gen, t, g.nodes[i]);
    A(i, i) = -2.0 * a * ih2;
    if (i > 0) A(i, i - 1) = a * ih2;
    if (i + 1 < n) A(i, i + 1) = a * ih2;
  }
  return A;
}

EvolutionOperator build_evolution(const GeneratorSpec& gen,
                                  std::shared_ptr<const TimeGrid> time) {
  if (!gen.grid) throw std::invalid_argument("build_evolution: null grid");
  if (!time) throw std::invalid_argument("build_evolution: null time grid");
  if (time->n_steps < 1) {
    throw std::invalid_argument("build_evolution: need n_steps >= 1");
  }
  if (!(gen.lower_bound > 0.0)) {
    throw std::invalid_argument("build_evolution: need lower_bound > 0");
  }

  EvolutionOperator ev;
  ev.grid = gen.grid;
  ev.time = time;
  const int n = gen.grid->size();
  const int m = time->n_steps;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  ev.step_ops.reserve(m);
  for (int j = 0; j < m; ++j) {
    const double t0 = time->nodes[j];
    const double t1 = time->nodes[j + 1];
    const double dt = t1 - t0;
    // Sample at the node as well so declared-bound violations surface with
    // the location they occur at, then freeze at the midpoint.
    for (int i = 0; i < n; ++i) {
      sample_coefficient(gen, t0, gen.grid->nodes[i]);
    }
    const Eigen::MatrixXd A = generator_matrix(gen, 0.5 * (t0 + t1));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(eye - (0.5 * dt) * A);
    const double diag_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const double diag_max = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
    if (!(diag_min > 1e-14 * diag_max)) {
      std::ostringstream msg;
      msg << "build_evolution: singular step system at t = " << t0;
      throw std::runtime_error(msg.str());
    }
    ev.step_ops.push_back(lu.solve(eye + (0.5 * dt) * A));
  }
  for (int i = 0; i < n; ++i) {
    sample_coefficient(gen, time->nodes[m], gen.grid->nodes[i]);
  }

  // Terminal cache, built backward: U(T, t_j) = U(T, t_{j+1}) P_j.
  ev.terminal_ops.assign(m + 1, Eigen::MatrixXd());
  ev.terminal_ops[m] = eye;
  for (int j = m - 1; j >= 0; --j) {
    ev.terminal_ops[j] = ev.terminal_ops[j + 1] * ev.step_ops[j];
  }

  // Norm witness: max over a fixed probe set and all times of
  // ||U(t_j, 0) v||_2 / ||v||_2 in the weighted norm.
  const LpConfig l2 = make_lp_config(2.0);
  std::vector<Eigen::VectorXd> probes;
  for (int k = 1; k <= 3; ++k) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(k * gen.grid->nodes[i]);
    probes.push_back(std::move(v));
  }
  probes.push_back(Eigen::VectorXd::Ones(n));
  std::mt19937_64 rng(0x5eedU);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    probes.push_back(std::move(v));
  }
  double witness = 1.0;
  for (const auto& p : probes) {
    StateVector v{ev.grid, p};
    const double base = lp_norm(v, l2);
    for (int j = 0; j < m; ++j) {
      v.values = ev.step_ops[j] * v.values;
      witness = std::max(witness, lp_norm(v, l2) / base);
    }
  }
  ev.norm_witness = witness;
  return ev;
}

StateVector apply(const EvolutionOperator& ev, int j, int i,
                  const StateVector& v) {
  require_range(ev, j, i, "apply");
  require_on_grid(ev, v, "apply");
  StateVector out = v;
  for (int k = i; k < j; ++k) out.values = ev.step_ops[k] * out.values;
  return out;
}

StateVector apply_adjoint(const EvolutionOperator& ev, int j, int i,
                          const StateVector& phi) {
  require_range(ev, j, i, "apply_adjoint");
  require_on_grid(ev, phi, "apply_adjoint");
  const auto& w = ev.grid->weights;
  StateVector out = phi;
  for (int k = j - 1; k >= i; --k) {
    out.values = weighted_adjoint_apply(ev.step_ops[k], w, out.values);
  }
  return out;
}

double spectral_reference(int n_mode, double t, double s,
                          const std::function<double(double)>& a_bar) {
  if (n_mode < 1) throw std::invalid_argument("spectral_reference: n >= 1");
  if (!(t >= s)) throw std::invalid_argument("spectral_reference: t >= s");
  if (!a_bar) throw std::invalid_argument("spectral_reference: null handle");
  if (t == s) return 1.0;
  // Composite Simpson; smooth coefficients are resolved far below the
  // discretization error this value is compared against.
  const int panels = 2048;
  const double dt = (t - s) / panels;
  double integral = a_bar(s) + a_bar(t);
  for (int k = 1; k < panels; ++k) {
    integral += (k % 2 == 1 ? 4.0 : 2.0) * a_bar(s + k * dt);
  }
  integral *= dt / 3.0;
  return std::exp(-static_cast<double>(n_mode) * n_mode * integral);
}

double cocycle_defect(const EvolutionOperator& ev) {
  const int m = ev.steps();
  const int n = ev.grid->size();
  const LpConfig l2 = make_lp_config(2.0);

  std::vector<StateVector> probes;
  for (int k = 1; k <= 2; ++k) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(k * ev.grid->nodes[i]);
    probes.push_back(StateVector{ev.grid, std::move(v)});
  }
  std::mt19937_64 rng(0xc0c0U);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    probes.push_back(StateVector{ev.grid, std::move(v)});
  }

  std::vector<int> idx{0, m / 4, m / 2, (3 * m) / 4, m};
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

  double defect = 0.0;
  for (const auto& v : probes) {
    const double scale = lp_norm(v, l2);
    for (size_t a = 0; a < idx.size(); ++a) {
      for (size_t b = a; b < idx.size(); ++b) {
        for (size_t c = b; c < idx.size(); ++c) {
          const int i = idx[a], r = idx[b], j = idx[c];
          StateVector whole = apply(ev, j, i, v);
          StateVector split = apply(ev, j, r, apply(ev, r, i, v));
          whole.values -= split.values;
          defect = std::max(defect, lp_norm(whole, l2) / scale);
        }
      }
    }
    // Cached terminal operators must agree with a fresh composition.
    for (int i : idx) {
      if (ev.terminal_ops.size() != static_cast<size_t>(m) + 1) break;
      StateVector cached{ev.grid, ev.terminal_ops[i] * v.values};
      StateVector fresh = apply(ev, m, i, v);
      cached.values -= fresh.values;
      defect = std::max(defect, lp_norm(cached, l2) / scale);
    }
  }
  return defect;
}

}  // namespace evoctrl
