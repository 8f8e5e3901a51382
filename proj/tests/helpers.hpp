#pragma once

#include "evoctrl/harness.hpp"

#include <cmath>
#include <random>
#include <utility>

namespace testutil {

using namespace evoctrl;

// the benchmark instance shared across suites: a(t) = 1 + t/2, unit gain,
// x0 = sin, x_T = 0.3 sin + 0.1 sin 2xi, sine source
inline ProblemParams canonical_params() { return ProblemParams{}; }

// cheap instance for the iterative paths
inline ProblemParams small_params() {
  ProblemParams pp;
  pp.n_space = 25;
  pp.n_time = 40;
  return pp;
}

inline StateVector random_state(std::shared_ptr<const SpatialGrid> grid,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return make_state(std::move(grid), std::move(v));
}

inline double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace testutil
