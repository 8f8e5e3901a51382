#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

using namespace evoctrl;

namespace {

// scalar midpoint-rule recursion for one Dirichlet mode: the discrete
// second difference acts on sin(k xi_i) as multiplication by
// -(4 / h^2) sin^2(k h / 2), so each step is a scalar Moebius factor
double cn_mode_factor(int k, int n_space, int n_time, double T,
                      const std::function<double(double)>& a) {
  const double h = M_PI / (n_space + 1);
  const double mu = 4.0 / (h * h) * std::pow(std::sin(0.5 * k * h), 2);
  const double dt = T / n_time;
  double f = 1.0;
  for (int j = 0; j < n_time; ++j) {
    const double z = 0.5 * dt * a(dt * (j + 0.5)) * mu;
    f *= (1.0 - z) / (1.0 + z);
  }
  return f;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("single-mode propagation matches the scalar recursion") {
  const int n = 31, m = 50;
  const double T = 0.8;
  auto grid = make_uniform_grid(n);
  auto time = make_uniform_time_grid(T, m);
  const auto a = [](double t) { return 1.0 + 0.5 * t; };
  GeneratorSpec gen{grid, [a](double t, double) { return a(t); }, 1.0, 1.0};
  EvolutionOperator ev = build_evolution(gen, time);
  for (int k : {1, 2, 5}) {
    StateVector v =
        sample_profile(grid, [k](double x) { return std::sin(k * x); });
    StateVector w = apply(ev, m, 0, v);
    const double f = cn_mode_factor(k, n, m, T, a);
    CHECK((w.values - f * v.values).cwiseAbs().maxCoeff() <=
          1e-11 * std::abs(f) + 1e-13);
    // cached terminal operator agrees with the composed action
    StateVector wt = make_state(grid, Eigen::VectorXd(ev.terminal_ops[0] * v.values));
    CHECK(testutil::max_abs_diff(w, wt) <= 1e-12);
  }
}

TEST_CASE("terminal decay tracks the spectral reference") {
  // constant unit coefficient: mode k decays by exp(-k^2 T)
  auto grid = make_uniform_grid(101);
  auto time = make_uniform_time_grid(1.0, 200);
  GeneratorSpec gen{grid, [](double, double) { return 1.0; }, 1.0, 1.0};
  EvolutionOperator ev = build_evolution(gen, time);
  for (int k : {1, 2, 3}) {
    StateVector v =
        sample_profile(grid, [k](double x) { return std::sin(k * x); });
    StateVector w = apply(ev, 200, 0, v);
    // discrete orthogonality: sum_i w_i sin^2(k xi_i) = pi / 2 exactly
    const double amp = pairing(w, v) / (M_PI / 2.0);
    const double ref =
        spectral_reference(k, 1.0, 0.0, [](double) { return 1.0; });
    CHECK(std::abs(amp - ref) <= 1e-3);  // relative to unit initial amplitude
  }
}

TEST_CASE("cocycle and adjoint identities") {
  auto grid = make_uniform_grid(23);
  auto time = make_uniform_time_grid(0.5, 30);
  GeneratorSpec gen{
      grid, [](double t, double x) { return 2.0 + std::sin(t) * std::cos(x); },
      0.9, 1.0};
  EvolutionOperator ev = build_evolution(gen, time);
  CHECK(cocycle_defect(ev) <= 1e-10);
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    StateVector v = testutil::random_state(grid, rng);
    StateVector phi = testutil::random_state(grid, rng);
    const double lhs = pairing(apply(ev, 30, 10, v), phi);
    const double rhs = pairing(v, apply_adjoint(ev, 30, 10, phi));
    CHECK(std::abs(lhs - rhs) <=
          1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
  StateVector v = testutil::random_state(grid, rng);
  StateVector same = apply(ev, 7, 7, v);
  CHECK((same.values.array() == v.values.array()).all());
  CHECK_THROWS_AS(apply(ev, 10, 12, v), std::invalid_argument);
}

TEST_CASE("coefficient dipping below the declared bound is rejected") {
  auto grid = make_uniform_grid(11);
  auto time = make_uniform_time_grid(1.0, 10);
  GeneratorSpec gen{grid, [](double t, double) { return 1.0 - t; }, 0.5, 1.0};
  try {
    build_evolution(gen, time);
    FAIL("expected a rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("below declared lower bound") !=
          std::string::npos);
  }
}

TEST_CASE("frozen-coefficient propagation is an l2 contraction") {
  auto grid = make_uniform_grid(33);
  auto time = make_uniform_time_grid(1.0, 40);
  GeneratorSpec gen{grid, [](double, double) { return 1.0; }, 1.0, 1.0};
  EvolutionOperator ev = build_evolution(gen, time);
  CHECK(ev.norm_witness <= 1.0 + 1e-9);
  std::mt19937_64 rng(5);
  const LpConfig cfg = make_lp_config(2.0);
  for (int rep = 0; rep < 5; ++rep) {
    StateVector v = testutil::random_state(grid, rng);
    CHECK(lp_norm(apply(ev, 40, 0, v), cfg) <=
          lp_norm(v, cfg) * (1.0 + 1e-9));
  }
}

TEST_CASE("spectral reference quadrature") {
  CHECK(spectral_reference(2, 1.0, 0.0, [](double) { return 1.0; }) ==
        doctest::Approx(0.01831563888873418).epsilon(1e-12));
  // polynomial coefficient integrates exactly
  CHECK(spectral_reference(1, 1.0, 0.0,
                           [](double t) { return 1.0 + 0.5 * t; }) ==
        doctest::Approx(0.2865047968601901).epsilon(1e-12));
  CHECK_THROWS_AS(
      spectral_reference(0, 1.0, 0.0, [](double) { return 1.0; }),
      std::invalid_argument);
}

}  // TEST_SUITE
