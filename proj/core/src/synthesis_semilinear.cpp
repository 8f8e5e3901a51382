#include "evoctrl/synthesis_semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace evoctrl {

namespace {

void validate_iterate(const EvolutionOperator& ev, const StateTrajectory& x) {
  if (x.states.size() != static_cast<size_t>(ev.steps() + 1)) {
    throw std::invalid_argument("semilinear: trajectory length mismatch");
  }
  if (!grids_equal(x.states.front().grid, ev.grid)) {
    throw std::invalid_argument("semilinear: trajectory grid mismatch");
  }
}

struct SourceSamples {
  std::vector<StateVector> values;  // f(t_j, x_j), j = 0..m
  double max_norm = 0.0;
};

SourceSamples evaluate_sources(const SemilinearProblem& sp,
                               const StateTrajectory& x) {
  if (!sp.nl.f) {
    throw std::invalid_argument("semilinear: source term not set");
  }
  SourceSamples out;
  out.values.reserve(x.states.size());
  for (size_t j = 0; j < x.states.size(); ++j) {
    const double t = x.time->nodes[static_cast<int>(j)];
    StateVector fj = sp.nl.f(t, x.states[j]);
    if (!grids_equal(fj.grid, x.states[j].grid)) {
      throw std::invalid_argument("semilinear: source sample grid mismatch");
    }
    if (!fj.values.allFinite()) {
      std::ostringstream msg;
      msg << "semilinear: non-finite source sample at t = " << t;
      throw std::domain_error(msg.str());
    }
    const double norm = lp_norm(fj, sp.base.cfg);
    if (norm > sp.nl.bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "semilinear: source bound violated at t = " << t
          << ": ||f|| = " << norm << " > declared " << sp.nl.bound;
      throw std::domain_error(msg.str());
    }
    out.max_norm = std::max(out.max_norm, norm);
    out.values.push_back(std::move(fj));
  }
  return out;
}

// target - U(T,0) x0 - sum_j tau_j U(T, t_j) f_j. The quadrature
// accumulator is exactly zero when f == 0, so subtracting it leaves the
// linear target defect untouched.
StateVector defect_from_sources(const SemilinearProblem& sp,
                                const EvolutionOperator& ev,
                                const std::vector<StateVector>& fs) {
  StateVector defect = target_defect(sp.base, ev);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(defect.size());
  for (int j = 0; j <= ev.steps(); ++j) {
    acc += ev.time->weights[j] * (ev.terminal_ops[j] * fs[j].values);
  }
  defect.values -= acc;
  return defect;
}

StateTrajectory free_linear_flow(const LinearProblem& lp,
                                 const EvolutionOperator& ev) {
  std::vector<StateVector> zeros(ev.steps() + 1,
                                 zero_state(lp.initial_state.grid));
  return propagate_with_sources(ev, lp.initial_state, zeros);
}

double trajectory_sup_norm(const StateTrajectory& x, const LpConfig& cfg) {
  double sup = 0.0;
  for (const auto& s : x.states) sup = std::max(sup, lp_norm(s, cfg));
  return sup;
}

// Small slack over the exact ceiling absorbs quadrature-level deviation of
// the discrete flow from the continuous-time bound.
void enforce_ceiling(double sup, const IterateCeiling& ceiling) {
  if (sup > ceiling.value * (1.0 + 1e-3)) {
    std::ostringstream msg;
    msg << "solution-operator output escaped the a-priori ceiling: "
        << "sup ||x(t)|| = " << sup << " > " << ceiling.value;
    throw CeilingViolation(msg.str(), sup, ceiling);
  }
}

double sup_distance(const StateTrajectory& a, const StateTrajectory& b,
                    const LpConfig& cfg) {
  double sup = 0.0;
  for (size_t j = 0; j < a.states.size(); ++j) {
    StateVector d{a.states[j].grid,
                  a.states[j].values - b.states[j].values};
    sup = std::max(sup, lp_norm(d, cfg));
  }
  return sup;
}

struct PicardOutcome {
  StateTrajectory iterate;
  SolutionOperatorResult last;  // evaluation at `iterate`
  FixedPointReport report;
};

PicardOutcome relaxed_picard(
    const std::function<SolutionOperatorResult(const StateTrajectory&)>& psi,
    StateTrajectory x, const FixedPointConfig& fp, const LpConfig& cfg) {
  if (!(fp.tol > 0.0)) {
    throw std::invalid_argument("fixed point: tol > 0 required");
  }
  if (fp.max_iter < 1) {
    throw std::invalid_argument("fixed point: max_iter >= 1 required");
  }
  if (!(fp.relaxation >= 0.0 && fp.relaxation <= 1.0)) {
    throw std::invalid_argument("fixed point: relaxation in [0, 1]");
  }

  double rho = fp.relaxation;
  int applied = 0;
  int growth_streak = 0;
  double prev_update = std::numeric_limits<double>::infinity();
  double max_source = 0.0;

  double best_residual = std::numeric_limits<double>::infinity();
  StateTrajectory best_x;
  SolutionOperatorResult best_eval;

  FixedPointReport rep;
  for (int eval = 0; eval < fp.max_iter; ++eval) {
    SolutionOperatorResult S = psi(x);
    max_source = std::max(max_source, S.max_source_norm);
    const double r = sup_distance(S.trajectory, x, cfg);
    if (r < best_residual) {
      best_residual = r;
      best_x = x;
      best_eval = S;
    }
    double update = rho * r;
    if (update <= fp.tol && r <= 10.0 * fp.tol) {
      rep.iterations = applied;
      rep.final_update_norm = update;
      rep.residual = r;
      rep.converged = true;
      rep.relaxation = rho;
      rep.max_source_norm = max_source;
      rep.ceiling = S.ceiling;
      return PicardOutcome{std::move(x), std::move(S), rep};
    }
    // oscillation guard: halve the relaxation once the applied update has
    // grown three times in a row
    if (update > prev_update) {
      if (++growth_streak >= 3) {
        if (rho > 1.0 / 16.0) rho = std::max(rho / 2.0, 1.0 / 16.0);
        growth_streak = 0;
        update = rho * r;
      }
    } else {
      growth_streak = 0;
    }
    if (rho == 1.0) {
      // adopt the output verbatim; keeps the zero-source path bit-identical
      // to the linear synthesis
      x = std::move(S.trajectory);
    } else {
      for (size_t j = 0; j < x.states.size(); ++j) {
        x.states[j].values +=
            rho * (S.trajectory.states[j].values - x.states[j].values);
      }
    }
    ++applied;
    prev_update = update;
  }

  rep.iterations = applied;
  rep.final_update_norm = prev_update;
  rep.residual = best_residual;
  rep.converged = false;
  rep.relaxation = rho;
  rep.max_source_norm = max_source;
  rep.ceiling = best_eval.ceiling;
  return PicardOutcome{std::move(best_x), std::move(best_eval), rep};
}

}  // namespace

NonlinearitySpec zero_nonlinearity() {
  NonlinearitySpec nl;
  nl.f = [](double, const StateVector& xs) { return zero_state(xs.grid); };
  nl.bound = 0.0;
  return nl;
}

IterateCeiling iterate_ceiling(const SemilinearProblem& sp,
                               const EvolutionOperator& ev, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("iterate_ceiling: lambda > 0 required");
  }
  const LinearProblem& lp = sp.base;
  IterateCeiling c;
  c.growth = std::max(ev.norm_witness, 1.0);
  c.source_bound = sp.nl.bound;
  c.input_norm = lp.input.norm_bound;
  const double horizon = ev.time->horizon;
  const double free_part = c.growth * lp_norm(lp.initial_state, lp.cfg) +
                           c.growth * c.source_bound * horizon;
  c.defect_scale = lp_norm(lp.target_state, lp.cfg) + free_part;
  c.value = free_part + c.growth * c.growth * c.input_norm * c.input_norm *
                            c.defect_scale * horizon / lambda;
  return c;
}

StateVector nonlinear_defect(const SemilinearProblem& sp,
                             const EvolutionOperator& ev,
                             const StateTrajectory& x) {
  validate_iterate(ev, x);
  return defect_from_sources(sp, ev, evaluate_sources(sp, x).values);
}

SolutionOperatorResult apply_solution_operator(const SemilinearProblem& sp,
                                               const EvolutionOperator& ev,
                                               const GramianOperator& G,
                                               const ResolventConfig& rc,
                                               const StateTrajectory& x) {
  validate_iterate(ev, x);
  SourceSamples fs = evaluate_sources(sp, x);

  SolutionOperatorResult out;
  out.max_source_norm = fs.max_norm;
  out.defect = defect_from_sources(sp, ev, fs.values);
  FeedbackSynthesis fb =
      synthesize_feedback(ev, sp.base.input, G, sp.base.cfg, rc, out.defect);
  out.resolvent = std::move(fb.resolvent);
  out.control = std::move(fb.control);

  std::vector<StateVector> sources;
  sources.reserve(fs.values.size());
  for (size_t j = 0; j < fs.values.size(); ++j) {
    // B u_j + f_j; a zero source sample leaves the closed-loop arithmetic
    // of the linear synthesis unchanged
    StateVector sj = apply_input(sp.base.input, out.control.samples[j]);
    sj.values += fs.values[j].values;
    sources.push_back(std::move(sj));
  }
  out.trajectory =
      propagate_with_sources(ev, sp.base.initial_state, sources);

  out.ceiling = iterate_ceiling(sp, ev, rc.lambda);
  out.sup_norm = trajectory_sup_norm(out.trajectory, sp.base.cfg);
  enforce_ceiling(out.sup_norm, out.ceiling);
  return out;
}

FixedPointSolution fixed_point_solve(const SemilinearProblem& sp,
                                     const EvolutionOperator& ev,
                                     const GramianOperator& G,
                                     const ResolventConfig& rc,
                                     const FixedPointConfig& fp) {
  if (!(rc.lambda > 0.0)) {
    throw std::invalid_argument("fixed_point_solve: lambda > 0 required");
  }
  StateTrajectory start = free_linear_flow(sp.base, ev);
  auto psi = [&](const StateTrajectory& xt) {
    return apply_solution_operator(sp, ev, G, rc, xt);
  };
  PicardOutcome out = relaxed_picard(psi, std::move(start), fp, sp.base.cfg);
  return FixedPointSolution{std::move(out.iterate),
                            std::move(out.last.control), out.report,
                            std::move(out.last.defect),
                            std::move(out.last.resolvent)};
}

std::pair<StateTrajectory, FixedPointReport> free_semilinear_flow(
    const SemilinearProblem& sp, const EvolutionOperator& ev,
    const FixedPointConfig& fp) {
  const IterateCeiling ceiling = iterate_ceiling(
      sp, ev, std::numeric_limits<double>::infinity());
  auto psi = [&](const StateTrajectory& xt) {
    SourceSamples fs = evaluate_sources(sp, xt);
    SolutionOperatorResult S;
    S.max_source_norm = fs.max_norm;
    S.trajectory =
        propagate_with_sources(ev, sp.base.initial_state, fs.values);
    S.control = zero_signal(ev.time, ev.grid);
    S.defect = zero_state(ev.grid);
    S.ceiling = ceiling;
    S.sup_norm = trajectory_sup_norm(S.trajectory, sp.base.cfg);
    enforce_ceiling(S.sup_norm, ceiling);
    return S;
  };
  StateTrajectory start = free_linear_flow(sp.base, ev);
  PicardOutcome out = relaxed_picard(psi, std::move(start), fp, sp.base.cfg);
  return {std::move(out.iterate), out.report};
}

SweepReport semilinear_lambda_sweep(const SemilinearProblem& sp,
                                    const EvolutionOperator& ev,
                                    const GramianOperator& G,
                                    const std::vector<double>& lambdas,
                                    const ResolventConfig& rc_base,
                                    const FixedPointConfig& fp) {
  for (size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) {
      throw std::invalid_argument(
          "semilinear_lambda_sweep: lambdas must be positive");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument(
          "semilinear_lambda_sweep: lambdas must decrease");
    }
  }

  SweepReport report;
  for (double lambda : lambdas) {
    SweepRecord rec;
    rec.lambda = lambda;
    ResolventConfig rc = rc_base;
    rc.lambda = lambda;
    try {
      FixedPointSolution sol = fixed_point_solve(sp, ev, G, rc, fp);
      StateVector gap{sp.base.target_state.grid,
                      sol.trajectory.states.back().values -
                          sp.base.target_state.values};
      rec.terminal_error = lp_norm(gap, sp.base.cfg);
      rec.control_energy = signal_energy(sol.control);
      rec.resolvent_iters = sol.resolvent.iterations;
      rec.fixedpoint_iters = sol.report.iterations;
      gap.values += sol.resolvent.state.values;
      const double idefect = lp_norm(gap, sp.base.cfg);
      const double dnorm = lp_norm(sol.defect, sp.base.cfg);
      rec.identity_defect = dnorm > 0.0 ? idefect / dnorm : idefect;
      rec.converged = sol.report.converged;
      if (!sol.report.converged) {
        rec.failure_reason = "fixed-point iteration exhausted max_iter";
      }
    } catch (const ResolventFailure& e) {
      rec.converged = false;
      rec.failure_reason = e.what();
    } catch (const CeilingViolation& e) {
      rec.converged = false;
      rec.failure_reason = e.what();
    } catch (const std::domain_error& e) {
      rec.converged = false;
      rec.failure_reason = e.what();
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace evoctrl
