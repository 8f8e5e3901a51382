#include "evoctrl/synthesis_linear.hpp"

#include <cmath>
#include <stdexcept>

namespace evoctrl {

namespace {

void validate_problem(const LinearProblem& lp, const EvolutionOperator& ev) {
  if (!same_grid(lp.initial_state, lp.target_state)) {
    throw std::invalid_argument("linear problem: state grid mismatch");
  }
  if (!grids_equal(lp.initial_state.grid, ev.grid)) {
    throw std::invalid_argument("linear problem: evolution grid mismatch");
  }
  if (lp.time->n_steps != ev.steps()) {
    throw std::invalid_argument("linear problem: time grid mismatch");
  }
}

std::vector<StateVector> input_sources(const InputOperator& B,
                                       const ControlSignal& u) {
  std::vector<StateVector> s;
  s.reserve(u.samples.size());
  for (const auto& uj : u.samples) s.push_back(apply_input(B, uj));
  return s;
}

}  // namespace

StateTrajectory propagate_with_sources(
    const EvolutionOperator& ev, const StateVector& initial,
    const std::vector<StateVector>& sources) {
  const int m = ev.steps();
  if (sources.size() != static_cast<size_t>(m + 1)) {
    throw std::invalid_argument(
        "propagate_with_sources: need one source sample per node");
  }
  StateTrajectory x;
  x.time = ev.time;
  x.states.reserve(m + 1);
  x.states.push_back(initial);
  for (int k = 0; k < m; ++k) {
    const double dt = ev.time->nodes[k + 1] - ev.time->nodes[k];
    Eigen::VectorXd next =
        ev.step_ops[k] * x.states.back().values +
        (0.5 * dt) * (ev.step_ops[k] * sources[k].values +
                      sources[k + 1].values);
    x.states.push_back(StateVector{initial.grid, std::move(next)});
  }
  return x;
}

StateVector target_defect(const LinearProblem& lp,
                          const EvolutionOperator& ev) {
  validate_problem(lp, ev);
  StateVector flow = apply(ev, ev.steps(), 0, lp.initial_state);
  return StateVector{lp.target_state.grid,
                     lp.target_state.values - flow.values};
}

FeedbackSynthesis synthesize_feedback(const EvolutionOperator& ev,
                                      const InputOperator& B,
                                      const GramianOperator& G,
                                      const LpConfig& cfg,
                                      const ResolventConfig& rc,
                                      const StateVector& defect) {
  ResolventSolution sol = solve_resolvent(G, cfg, rc, defect);
  // u(t_j) = B* U(T, t_j)* J[z] / lambda; dividing the duality image by
  // lambda realizes J[z / lambda] without forming the small quotient z /
  // lambda first.
  StateVector phi = duality_map(sol.state, cfg);
  phi.values /= rc.lambda;
  FeedbackSynthesis out{controllability_map_adjoint(ev, B, phi),
                        std::move(sol)};
  return out;
}

FeedbackSynthesis feedback_control(const LinearProblem& lp,
                                   const EvolutionOperator& ev,
                                   const GramianOperator& G,
                                   const ResolventConfig& rc) {
  validate_problem(lp, ev);
  return synthesize_feedback(ev, lp.input, G, lp.cfg, rc,
                             target_defect(lp, ev));
}

StateTrajectory simulate_closed_loop(const LinearProblem& lp,
                                     const EvolutionOperator& ev,
                                     const ControlSignal& u) {
  validate_problem(lp, ev);
  if (u.samples.size() != static_cast<size_t>(ev.steps() + 1)) {
    throw std::invalid_argument("simulate_closed_loop: signal length");
  }
  return propagate_with_sources(ev, lp.initial_state,
                                input_sources(lp.input, u));
}

double terminal_identity_defect(const LinearProblem& lp,
                                const EvolutionOperator& ev,
                                const GramianOperator& G,
                                const ResolventConfig& rc) {
  const StateVector defect = target_defect(lp, ev);
  const double dnorm = lp_norm(defect, lp.cfg);
  FeedbackSynthesis fb = feedback_control(lp, ev, G, rc);
  StateTrajectory x = simulate_closed_loop(lp, ev, fb.control);
  Eigen::VectorXd gap = x.states.back().values - lp.target_state.values +
                        fb.resolvent.state.values;
  const double defect_norm =
      lp_norm(StateVector{lp.target_state.grid, std::move(gap)}, lp.cfg);
  return dnorm > 0.0 ? defect_norm / dnorm : defect_norm;
}

double cost_value(const StateTrajectory& x, const ControlSignal& u,
                  const StateVector& target, double lambda,
                  const LpConfig& cfg) {
  if (x.states.empty()) {
    throw std::invalid_argument("cost_value: empty trajectory");
  }
  StateVector gap{target.grid, x.states.back().values - target.values};
  const double miss = lp_norm(gap, cfg);
  return miss * miss + lambda * signal_energy(u);
}

double first_variation(const LinearProblem& lp, const EvolutionOperator& ev,
                       const StateTrajectory& x, const ControlSignal& u,
                       const ControlSignal& w, double lambda) {
  validate_problem(lp, ev);
  if (u.samples.size() != w.samples.size()) {
    throw std::invalid_argument("first_variation: signal length mismatch");
  }
  StateVector gap{lp.target_state.grid,
                  x.states.back().values - lp.target_state.values};
  const StateVector jgap = duality_map(gap, lp.cfg);
  const StateVector reach = controllability_map(ev, lp.input, w);
  double inner = 0.0;
  for (size_t j = 0; j < u.samples.size(); ++j) {
    inner += ev.time->weights[static_cast<int>(j)] *
             h_inner(u.samples[j], w.samples[j]);
  }
  return 2.0 * pairing(reach, jgap) + 2.0 * lambda * inner;
}

SweepReport lambda_sweep(const LinearProblem& lp, const EvolutionOperator& ev,
                         const GramianOperator& G,
                         const std::vector<double>& lambdas,
                         const ResolventConfig& rc_base) {
  validate_problem(lp, ev);
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) {
      throw std::invalid_argument("lambda_sweep: lambdas must be positive");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument("lambda_sweep: lambdas must decrease");
    }
  }
  const StateVector defect = target_defect(lp, ev);
  const double dnorm = lp_norm(defect, lp.cfg);

  SweepReport report;
  for (double lambda : lambdas) {
    SweepRecord rec;
    rec.lambda = lambda;
    ResolventConfig rc = rc_base;
    rc.lambda = lambda;
    try {
      FeedbackSynthesis fb = feedback_control(lp, ev, G, rc);
      StateTrajectory x = simulate_closed_loop(lp, ev, fb.control);
      StateVector gap{lp.target_state.grid,
                      x.states.back().values - lp.target_state.values};
      rec.terminal_error = lp_norm(gap, lp.cfg);
      rec.control_energy = signal_energy(fb.control);
      rec.resolvent_iters = fb.resolvent.iterations;
      rec.fixedpoint_iters = 1;
      gap.values += fb.resolvent.state.values;
      const double idefect = lp_norm(gap, lp.cfg);
      rec.identity_defect = dnorm > 0.0 ? idefect / dnorm : idefect;
    } catch (const ResolventFailure& e) {
      rec.converged = false;
      rec.failure_reason = e.what();
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace evoctrl
