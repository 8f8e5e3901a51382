#include "evoctrl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace evoctrl {

namespace {

constexpr double kExactTol = 1e-12;       // algebraic identities
constexpr double kCocycleTol = 1e-10;     // composed-propagator defect
constexpr double kHilbertTol = 1e-8;      // direct vs iterative agreement
constexpr double kFvFeedbackTol = 1e-6;   // first variation at the optimum
constexpr double kFvFdTol = 1e-5;         // derivative vs finite difference
constexpr double kIdentityLambda = 1e-2;  // reference regularization
constexpr double kFdStep = 1e-5;

StateVector random_state(std::mt19937_64& rng,
                         const std::shared_ptr<const SpatialGrid>& grid) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  return StateVector{grid, std::move(v)};
}

ControlSignal random_signal(std::mt19937_64& rng,
                            const std::shared_ptr<const TimeGrid>& time,
                            const std::shared_ptr<const SpatialGrid>& grid) {
  ControlSignal w;
  w.time = time;
  w.samples.reserve(time->n_steps + 1);
  for (int j = 0; j <= time->n_steps; ++j) {
    w.samples.push_back(random_state(rng, grid));
  }
  return w;
}

CheckResult make_check(std::string name, double observed, double threshold,
                       std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.passed = observed <= threshold;
  c.observed = observed;
  c.threshold = threshold;
  c.detail = std::move(detail);
  return c;
}

double hilbert_norm(const StateVector& u) {
  return std::sqrt(h_inner(u, u));
}

}  // namespace

VerificationReport verify_problem(const SemilinearProblem& sp,
                                  const EvolutionOperator& ev,
                                  const GramianOperator& G,
                                  std::uint64_t seed) {
  const LinearProblem& lp = sp.base;
  const LpConfig& cfg = lp.cfg;
  std::mt19937_64 rng(seed);

  VerificationReport report;
  report.seed = seed;

  {  // duality-map identities over seeded probes
    double worst_pairing = 0.0;
    double worst_norm = 0.0;
    double worst_roundtrip = 0.0;
    for (int k = 0; k < 100; ++k) {
      const StateVector v = random_state(rng, ev.grid);
      const StateVector jv = duality_map(v, cfg);
      const double np = lp_norm(v, cfg);
      worst_pairing = std::max(
          worst_pairing, std::abs(pairing(v, jv) - np * np) / (np * np));
      worst_norm =
          std::max(worst_norm, std::abs(lq_norm(jv, cfg) - np) / np);
      const StateVector back = duality_map_inverse(jv, cfg);
      StateVector diff{v.grid, back.values - v.values};
      worst_roundtrip = std::max(worst_roundtrip, lp_norm(diff, cfg) / np);
    }
    report.checks.push_back(make_check(
        "duality_pairing_identity", worst_pairing, kExactTol,
        "max relative |<v, J[v]> - ||v||^2| over 100 probes"));
    report.checks.push_back(
        make_check("duality_norm_identity", worst_norm, kExactTol,
                   "max relative |  ||J[v]||_q - ||v||_p | over 100 probes"));
    report.checks.push_back(make_check(
        "duality_roundtrip", worst_roundtrip, kExactTol,
        "max relative inverse-map round-trip error over 100 probes"));
  }

  {  // evolution adjoint against the quadrature pairing
    const int m = ev.steps();
    const std::pair<int, int> spans[] = {
        {m, 0}, {m, m / 2}, {m / 2, 0}, {m, (3 * m) / 4}};
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const StateVector v = random_state(rng, ev.grid);
      const StateVector phi = random_state(rng, ev.grid);
      for (const auto& [j, i] : spans) {
        const double lhs = pairing(apply(ev, j, i, v), phi);
        const double rhs = pairing(v, apply_adjoint(ev, j, i, phi));
        worst = std::max(worst, std::abs(lhs - rhs) /
                                    std::max({1.0, std::abs(lhs),
                                              std::abs(rhs)}));
      }
    }
    report.checks.push_back(
        make_check("evolution_adjoint", worst, kExactTol,
                   "max relative pairing defect over probes and spans"));
  }

  report.checks.push_back(
      make_check("cocycle_defect", cocycle_defect(ev), kCocycleTol,
                 "composed vs direct propagator actions"));

  {  // input operator adjoint and certified bound
    double worst_adj = 0.0;
    double worst_bound = 0.0;
    for (int k = 0; k < 10; ++k) {
      const StateVector u = random_state(rng, ev.grid);
      const StateVector phi = random_state(rng, ev.grid);
      const double lhs = pairing(apply_input(lp.input, u), phi);
      const double rhs = h_inner(u, apply_input_adjoint(lp.input, phi));
      worst_adj = std::max(
          worst_adj, std::abs(lhs - rhs) /
                         std::max({1.0, std::abs(lhs), std::abs(rhs)}));
      const double image = lp_norm(apply_input(lp.input, u), cfg);
      if (lp.input.norm_bound > 0.0) {
        worst_bound = std::max(
            worst_bound, image / (lp.input.norm_bound * hilbert_norm(u)));
      } else if (image > 0.0) {
        worst_bound = std::numeric_limits<double>::infinity();
      }
    }
    report.checks.push_back(
        make_check("input_adjoint", worst_adj, kExactTol,
                   "pairing(B u, phi) vs h_inner(u, B* phi) over probes"));
    report.checks.push_back(make_check(
        "input_bound_certificate", worst_bound, 1.0 + kExactTol,
        "max ||B u||_p / (N ||u||) over probes"));
  }

  {  // Gramian certificate sign
    const double cert = positivity_certificate(G);
    CheckResult c;
    c.name = "gramian_certificate";
    c.passed = cert >= -kExactTol;
    c.observed = cert;
    c.threshold = 0.0;
    c.detail = "smallest eigenvalue of the symmetrized Gramian form";
    report.checks.push_back(std::move(c));
  }

  {  // resolvent contract: residual and contraction
    std::vector<StateVector> probes;
    probes.push_back(target_defect(lp, ev));
    probes.push_back(random_state(rng, ev.grid));
    probes.push_back(random_state(rng, ev.grid));
    double worst_residual = 0.0;
    double worst_contraction = 0.0;
    for (double lambda : {1e-1, 1e-2}) {
      ResolventConfig rc;
      rc.lambda = lambda;
      for (const auto& h : probes) {
        const double hn = lp_norm(h, cfg);
        if (hn == 0.0) continue;
        const ResolventSolution sol = solve_resolvent(G, cfg, rc, h);
        worst_residual = std::max(
            worst_residual, sol.residual / (rc.tol * (1.0 + hn)));
        worst_contraction =
            std::max(worst_contraction, lp_norm(sol.state, cfg) / hn);
      }
    }
    report.checks.push_back(make_check(
        "resolvent_residual", worst_residual, 1.0,
        "residual over tol*(1+||h||) at lambda in {1e-1, 1e-2}"));
    report.checks.push_back(
        make_check("resolvent_contraction", worst_contraction,
                   1.0 + kExactTol, "max ||z|| / ||h||"));
  }

  if (cfg.p == 2.0) {  // the two solve paths must agree in Hilbert space
    ResolventConfig rc;
    rc.lambda = kIdentityLambda;
    const StateVector h = target_defect(lp, ev);
    const ResolventSolution direct = solve_resolvent(G, cfg, rc, h);
    const ResolventSolution iterative =
        solve_resolvent(G, cfg, rc, h, nullptr, /*force_iterative=*/true);
    StateVector diff{h.grid, direct.state.values - iterative.state.values};
    const double scale = std::max(lp_norm(direct.state, cfg), 1e-300);
    report.checks.push_back(make_check(
        "resolvent_hilbert_agreement", lp_norm(diff, cfg) / scale,
        kHilbertTol, "direct vs forced-iterative solution"));
  }

  {  // linear terminal identity at the reference regularization
    ResolventConfig rc;
    rc.lambda = kIdentityLambda;
    const double tol = cfg.p == 2.0 ? 1e-6 : 1e-5;
    report.checks.push_back(make_check(
        "terminal_identity", terminal_identity_defect(lp, ev, G, rc), tol,
        "relative ||x(T) - target + z|| at lambda = 1e-2"));
  }

  {  // first variation at the synthesized control
    ResolventConfig rc;
    rc.lambda = kIdentityLambda;
    const FeedbackSynthesis fb = feedback_control(lp, ev, G, rc);
    const StateTrajectory x = simulate_closed_loop(lp, ev, fb.control);
    StateVector gap{lp.target_state.grid,
                    x.states.back().values - lp.target_state.values};
    const StateVector jgap = duality_map(gap, cfg);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const ControlSignal w = random_signal(rng, lp.time, ev.grid);
      const double fv =
          first_variation(lp, ev, x, fb.control, w, rc.lambda);
      const StateVector reach = controllability_map(ev, lp.input, w);
      double inner_scale = 0.0;
      for (size_t j = 0; j < w.samples.size(); ++j) {
        inner_scale += lp.time->weights[static_cast<int>(j)] *
                       hilbert_norm(fb.control.samples[j]) *
                       hilbert_norm(w.samples[j]);
      }
      const double scale = 2.0 * lp_norm(reach, cfg) * lq_norm(jgap, cfg) +
                           2.0 * rc.lambda * inner_scale;
      worst = std::max(worst, std::abs(fv) / std::max(scale, 1e-300));
    }
    report.checks.push_back(make_check(
        "first_variation_feedback", worst, kFvFeedbackTol,
        "max relative first variation over 10 seeded directions"));
  }

  if (lp.input.norm_bound > 0.0) {
    // derivative check away from the optimum, where the variation is not
    // degenerate: centered finite difference of the cost at u = 0
    ResolventConfig rc;
    rc.lambda = kIdentityLambda;
    const ControlSignal u0 = zero_signal(lp.time, ev.grid);
    const StateTrajectory x0 = simulate_closed_loop(lp, ev, u0);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const ControlSignal w = random_signal(rng, lp.time, ev.grid);
      const double fv = first_variation(lp, ev, x0, u0, w, rc.lambda);
      ControlSignal up = u0;
      ControlSignal um = u0;
      for (size_t j = 0; j < w.samples.size(); ++j) {
        up.samples[j].values += kFdStep * w.samples[j].values;
        um.samples[j].values -= kFdStep * w.samples[j].values;
      }
      const double cp = cost_value(simulate_closed_loop(lp, ev, up), up,
                                   lp.target_state, rc.lambda, cfg);
      const double cm = cost_value(simulate_closed_loop(lp, ev, um), um,
                                   lp.target_state, rc.lambda, cfg);
      const double fd = (cp - cm) / (2.0 * kFdStep);
      worst = std::max(worst, std::abs(fv - fd) /
                                  std::max(std::abs(fv), std::abs(fd)));
    }
    report.checks.push_back(make_check(
        "first_variation_fd", worst, kFvFdTol,
        "first variation vs centered cost difference at zero control"));
  }

  return report;
}

}  // namespace evoctrl
