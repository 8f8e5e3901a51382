#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <stdexcept>

using namespace evoctrl;

TEST_SUITE("control_core") {

TEST_CASE("scaled identity input, adjoint, and certified bound") {
  auto grid = make_uniform_grid(19);
  const LpConfig cfg = make_lp_config(4.0);
  InputOperator B = make_scaled_identity_input(0.7, grid, cfg);
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    StateVector u = testutil::random_state(grid, rng);
    StateVector phi = testutil::random_state(grid, rng);
    StateVector Bu = apply_input(B, u);
    CHECK((Bu.values - 0.7 * u.values).cwiseAbs().maxCoeff() <= 1e-15);
    const double lhs = pairing(Bu, phi);
    const double rhs = h_inner(u, apply_input_adjoint(B, phi));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    CHECK(lp_norm(Bu, cfg) <=
          B.norm_bound * std::sqrt(h_inner(u, u)) * (1.0 + 1e-12));
  }
  // the concentration extremal saturates the recorded bound
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(grid->size());
  spike[3] = 1.0;
  StateVector e = make_state(grid, std::move(spike));
  CHECK(lp_norm(apply_input(B, e), cfg) ==
        doctest::Approx(B.norm_bound * std::sqrt(h_inner(e, e)))
            .epsilon(1e-12));
}

TEST_CASE("dense input adjoint and bound hold on probes") {
  auto grid = make_uniform_grid(13);
  const LpConfig cfg = make_lp_config(2.0);
  std::mt19937_64 rng(9);
  Eigen::MatrixXd M(13, 13);
  std::normal_distribution<double> dist;
  for (int i = 0; i < M.size(); ++i) M.data()[i] = 0.3 * dist(rng);
  InputOperator B = make_dense_input(M, grid, cfg);
  for (int rep = 0; rep < 10; ++rep) {
    StateVector u = testutil::random_state(grid, rng);
    StateVector phi = testutil::random_state(grid, rng);
    const double lhs = pairing(apply_input(B, u), phi);
    const double rhs = h_inner(u, apply_input_adjoint(B, phi));
    CHECK(std::abs(lhs - rhs) <=
          1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    CHECK(lp_norm(apply_input(B, u), cfg) <=
          B.norm_bound * std::sqrt(h_inner(u, u)) * (1.0 + 1e-12));
  }
}

TEST_CASE("gramian symmetry, factorization, and certificates") {
  auto grid = make_uniform_grid(15);
  auto time = make_uniform_time_grid(0.6, 20);
  GeneratorSpec gen{grid, [](double t, double) { return 1.0 + 0.5 * t; },
                    1.0, 1.0};
  EvolutionOperator ev = build_evolution(gen, time);
  const LpConfig cfg = make_lp_config(2.0);
  InputOperator B = make_scaled_identity_input(1.0, grid, cfg);
  GramianOperator G = assemble_gramian(ev, B);
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    StateVector phi = testutil::random_state(grid, rng);
    StateVector psi = testutil::random_state(grid, rng);
    const double s1 = pairing(apply_gramian(G, phi), psi);
    const double s2 = pairing(apply_gramian(G, psi), phi);
    CHECK(std::abs(s1 - s2) <= 1e-10 * std::max(1.0, std::abs(s1)));
    // the assembled operator and the map-adjoint factorization use the
    // same quadrature, so they agree at rounding scale
    StateVector lhs = apply_gramian(G, phi);
    StateVector rhs =
        controllability_map(ev, B, controllability_map_adjoint(ev, B, phi));
    CHECK(testutil::max_abs_diff(lhs, rhs) <=
          1e-12 * std::max(1.0, lhs.values.cwiseAbs().maxCoeff()));
    CHECK(pairing(phi, lhs) >= -1e-12);
  }
  CHECK(positivity_certificate(G) > 0.0);
  CHECK(assemble_gramian(ev, B).build_hash == G.build_hash);

  InputOperator B0 = make_scaled_identity_input(0.0, grid, cfg);
  GramianOperator Gz = assemble_gramian(ev, B0);
  CHECK(Gz.build_hash != G.build_hash);
  CHECK(Gz.matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(positivity_certificate(Gz) == 0.0);
}

TEST_CASE("signal energy quadrature") {
  auto grid = make_uniform_grid(9);
  auto time = make_uniform_time_grid(2.0, 16);
  ControlSignal u = zero_signal(time, grid);
  CHECK(signal_energy(u) == 0.0);
  for (auto& s : u.samples) s.values.setOnes();
  // sum_j tau_j ||ones||^2 = T * sum_i w_i
  CHECK(signal_energy(u) ==
        doctest::Approx(2.0 * grid->weights.sum()).epsilon(1e-13));
}

TEST_CASE("input rejects negative gain and mismatched grids") {
  auto grid = make_uniform_grid(7);
  const LpConfig cfg = make_lp_config(2.0);
  CHECK_THROWS_AS(make_scaled_identity_input(-1.0, grid, cfg),
                  std::invalid_argument);
  InputOperator B = make_scaled_identity_input(1.0, grid, cfg);
  StateVector other = zero_state(make_uniform_grid(8));
  CHECK_THROWS_AS(apply_input(B, other), std::invalid_argument);
}

}  // TEST_SUITE
