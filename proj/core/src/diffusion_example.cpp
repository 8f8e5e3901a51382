#include "evoctrl/diffusion_example.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace evoctrl {

namespace {

std::function<double(double, double)> coefficient_handle(
    const DiffusionConfig& dc) {
  switch (dc.a_kind) {
    case CoefficientKind::constant: {
      const double c = dc.a_value;
      return [c](double, double) { return c; };
    }
    case CoefficientKind::time_only: {
      if (!dc.a_time) {
        throw std::invalid_argument(
            "diffusion config: time_only coefficient handle not set");
      }
      auto h = dc.a_time;
      return [h](double t, double) { return h(t); };
    }
    case CoefficientKind::space_time: {
      if (!dc.a_space_time) {
        throw std::invalid_argument(
            "diffusion config: space_time coefficient handle not set");
      }
      return dc.a_space_time;
    }
  }
  throw std::invalid_argument("diffusion config: unknown coefficient kind");
}

void validate_config(const DiffusionConfig& dc) {
  if (dc.n_space < 1) {
    throw std::invalid_argument("diffusion config: n_space >= 1 required");
  }
  if (dc.n_time < 1) {
    throw std::invalid_argument("diffusion config: n_time >= 1 required");
  }
  if (!(dc.horizon > 0.0)) {
    throw std::invalid_argument("diffusion config: horizon > 0 required");
  }
  if (!(dc.lower_bound > 0.0)) {
    throw std::invalid_argument(
        "diffusion config: coefficient lower bound > 0 required");
  }
  if (!(dc.holder_mu > 0.0 && dc.holder_mu <= 1.0)) {
    throw std::invalid_argument(
        "diffusion config: holder order in (0, 1] required");
  }
  if (!(dc.gain >= 0.0)) {
    throw std::invalid_argument("diffusion config: gain >= 0 required");
  }
  if (!dc.initial) {
    throw std::invalid_argument(
        "diffusion config: initial profile not set");
  }
  if (dc.target_kind == TargetKind::profile && !dc.target_profile) {
    throw std::invalid_argument(
        "diffusion config: target profile not set");
  }
}

NonlinearitySpec make_source(const DiffusionConfig& dc,
                             const std::shared_ptr<const SpatialGrid>& grid,
                             const LpConfig& cfg) {
  switch (dc.source) {
    case SourceKind::none:
      return zero_nonlinearity();
    case SourceKind::sine: {
      NonlinearitySpec nl;
      nl.f = [](double, const StateVector& x) {
        return StateVector{x.grid, x.values.array().sin().matrix()};
      };
      // |sin| <= 1 pointwise, so the all-ones vector is the exact bound
      StateVector ones{grid,
                       Eigen::VectorXd::Ones(grid->size())};
      nl.bound = lp_norm(ones, cfg);
      return nl;
    }
  }
  throw std::invalid_argument("diffusion config: unknown source kind");
}

}  // namespace

BuiltProblem build_problem(const DiffusionConfig& dc) {
  validate_config(dc);

  auto grid = make_uniform_grid(dc.n_space);
  auto time = make_uniform_time_grid(dc.horizon, dc.n_time);
  const LpConfig cfg = make_lp_config(dc.p);

  GeneratorSpec gen;
  gen.grid = grid;
  gen.coefficient = coefficient_handle(dc);
  gen.lower_bound = dc.lower_bound;
  gen.holder_exponent = dc.holder_mu;

  EvolutionOperator ev = build_evolution(gen, time);

  LinearProblem base;
  base.generator = gen;
  base.input = make_scaled_identity_input(dc.gain, grid, cfg);
  base.initial_state = sample_profile(grid, dc.initial);
  base.time = time;
  base.cfg = cfg;

  NonlinearitySpec nl = make_source(dc, grid, cfg);

  switch (dc.target_kind) {
    case TargetKind::profile:
      base.target_state = sample_profile(grid, dc.target_profile);
      break;
    case TargetKind::free_flow_perturbation: {
      // uncontrolled terminal state plus an amplitude-scaled fundamental
      // mode; the target state itself plays no role in the free flow
      SemilinearProblem free_problem{base, nl};
      free_problem.base.target_state = zero_state(grid);
      auto flow = free_semilinear_flow(free_problem, ev, FixedPointConfig{});
      if (!flow.second.converged) {
        throw std::runtime_error(
            "diffusion config: uncontrolled flow for the target did not "
            "converge");
      }
      Eigen::VectorXd vals = flow.first.states.back().values +
                             dc.perturbation_amplitude *
                                 grid->nodes.array().sin().matrix();
      base.target_state = StateVector{grid, std::move(vals)};
      break;
    }
  }

  return BuiltProblem{SemilinearProblem{std::move(base), std::move(nl)},
                      std::move(ev)};
}

double holder_estimate(const DiffusionConfig& dc, int sample_count) {
  if (sample_count < 2) {
    throw std::invalid_argument("holder_estimate: sample_count >= 2");
  }
  if (dc.a_kind == CoefficientKind::constant) return 0.0;

  auto a = coefficient_handle(dc);
  auto grid = make_uniform_grid(dc.n_space);
  const int s = sample_count;

  std::vector<Eigen::VectorXd> slices;
  slices.reserve(s);
  for (int i = 0; i < s; ++i) {
    const double t = dc.horizon * i / (s - 1);
    Eigen::VectorXd slice(grid->size());
    for (int k = 0; k < grid->size(); ++k) slice[k] = a(t, grid->nodes[k]);
    slices.push_back(std::move(slice));
  }

  double estimate = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = i + 1; j < s; ++j) {
      const double dt = dc.horizon * (j - i) / (s - 1);
      const double diff = (slices[i] - slices[j]).cwiseAbs().maxCoeff();
      estimate = std::max(estimate, diff / std::pow(dt, dc.holder_mu));
    }
  }
  return estimate;
}

}  // namespace evoctrl
