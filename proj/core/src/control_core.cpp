#include "evoctrl/control_core.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

namespace evoctrl {

namespace {

void require_grid(const std::shared_ptr<const SpatialGrid>& a,
                  const std::shared_ptr<const SpatialGrid>& b,
                  const char* who) {
  if (!grids_equal(a, b)) {
    throw std::invalid_argument(std::string(who) + ": grid mismatch");
  }
}

// l2 -> lp embedding constant on the discrete grid; the extremal vector
// concentrates on the smallest-weight node.
double embedding_constant(const SpatialGrid& g, double p) {
  if (p == 2.0) return 1.0;
  const double wmin = g.weights.minCoeff();
  return std::pow(wmin, 1.0 / p - 0.5);
}

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
  h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t double_bits(double x) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(x));
  std::memcpy(&u, &x, sizeof(u));
  return u;
}

}  // namespace

InputOperator make_scaled_identity_input(
    double gain, std::shared_ptr<const SpatialGrid> grid,
    const LpConfig& cfg) {
  if (!grid) throw std::invalid_argument("input operator: null grid");
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw std::invalid_argument("input operator: need finite gain >= 0");
  }
  InputOperator B;
  B.kind = InputOperator::Kind::scaled_identity;
  B.grid = grid;
  B.gain = gain;
  B.norm_bound = gain * embedding_constant(*grid, cfg.p);
  return B;
}

InputOperator make_dense_input(Eigen::MatrixXd matrix,
                               std::shared_ptr<const SpatialGrid> grid,
                               const LpConfig& cfg) {
  if (!grid) throw std::invalid_argument("input operator: null grid");
  const int n = grid->size();
  if (matrix.rows() != n || matrix.cols() != n) {
    throw std::invalid_argument("input operator: matrix must be n x n");
  }
  if (!matrix.allFinite()) {
    throw std::invalid_argument("input operator: non-finite matrix");
  }
  InputOperator B;
  B.kind = InputOperator::Kind::dense;
  B.grid = grid;
  B.gain = 0.0;
  B.matrix = std::move(matrix);
  // Row-wise Cauchy-Schwarz bound: |(Bu)_i| <= r_i ||u|| with
  // r_i = (sum_j M_ij^2 / w_j)^(1/2); then ||Bu||_p <= ||r||_p ||u||.
  const auto& w = grid->weights;
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    r[i] = std::sqrt((B.matrix.row(i).transpose().array().square() /
                      w.array()).sum());
  }
  B.norm_bound = weighted_norm(StateVector{grid, r}, cfg.p);
  return B;
}

StateVector apply_input(const InputOperator& B, const StateVector& u) {
  require_grid(B.grid, u.grid, "apply_input");
  if (B.kind == InputOperator::Kind::scaled_identity) {
    return StateVector{u.grid, B.gain * u.values};
  }
  return StateVector{u.grid, B.matrix * u.values};
}

StateVector apply_input_adjoint(const InputOperator& B,
                                const StateVector& phi) {
  require_grid(B.grid, phi.grid, "apply_input_adjoint");
  if (B.kind == InputOperator::Kind::scaled_identity) {
    return StateVector{phi.grid, B.gain * phi.values};
  }
  const auto& w = B.grid->weights;
  Eigen::VectorXd y = B.matrix.transpose() * (w.asDiagonal() * phi.values);
  return StateVector{phi.grid, w.cwiseInverse().asDiagonal() * y};
}

ControlSignal zero_signal(std::shared_ptr<const TimeGrid> time,
                          std::shared_ptr<const SpatialGrid> grid) {
  if (!time) throw std::invalid_argument("zero_signal: null time grid");
  ControlSignal u;
  u.time = time;
  u.samples.assign(time->nodes.size(), zero_state(grid));
  return u;
}

double signal_energy(const ControlSignal& u) {
  if (!u.time || u.samples.size() != static_cast<size_t>(u.time->nodes.size())) {
    throw std::invalid_argument("signal_energy: malformed signal");
  }
  double e = 0.0;
  for (size_t j = 0; j < u.samples.size(); ++j) {
    e += u.time->weights[static_cast<int>(j)] *
         h_inner(u.samples[j], u.samples[j]);
  }
  return e;
}

StateVector controllability_map(const EvolutionOperator& ev,
                                const InputOperator& B,
                                const ControlSignal& u) {
  require_grid(ev.grid, B.grid, "controllability_map");
  const int m = ev.steps();
  if (!u.time || u.time->nodes.size() != m + 1 ||
      u.samples.size() != static_cast<size_t>(m + 1)) {
    throw std::invalid_argument("controllability_map: time grid mismatch");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(ev.grid->size());
  for (int j = 0; j <= m; ++j) {
    const StateVector bu = apply_input(B, u.samples[j]);
    acc += u.time->weights[j] * (ev.terminal_ops[j] * bu.values);
  }
  return StateVector{ev.grid, std::move(acc)};
}

ControlSignal controllability_map_adjoint(const EvolutionOperator& ev,
                                          const InputOperator& B,
                                          const StateVector& phi) {
  require_grid(ev.grid, B.grid, "controllability_map_adjoint");
  require_grid(ev.grid, phi.grid, "controllability_map_adjoint");
  const int m = ev.steps();
  const auto& w = ev.grid->weights;
  ControlSignal out;
  out.time = ev.time;
  out.samples.reserve(m + 1);
  const Eigen::VectorXd wphi = w.asDiagonal() * phi.values;
  for (int j = 0; j <= m; ++j) {
    Eigen::VectorXd adj = w.cwiseInverse().asDiagonal() *
                          (ev.terminal_ops[j].transpose() * wphi);
    out.samples.push_back(
        apply_input_adjoint(B, StateVector{ev.grid, std::move(adj)}));
  }
  return out;
}

GramianOperator assemble_gramian(const EvolutionOperator& ev,
                                 const InputOperator& B) {
  require_grid(ev.grid, B.grid, "assemble_gramian");
  const int n = ev.grid->size();
  const int m = ev.steps();
  const auto& w = ev.grid->weights;
  const Eigen::VectorXd winv = w.cwiseInverse();

  GramianOperator G;
  G.grid = ev.grid;
  G.time = ev.time;
  G.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j <= m; ++j) {
    // M = U(T, t_j) B; contribution tau_j * M W^{-1} M^T W.
    Eigen::MatrixXd M;
    if (B.kind == InputOperator::Kind::scaled_identity) {
      M = B.gain * ev.terminal_ops[j];
    } else {
      M = ev.terminal_ops[j] * B.matrix;
    }
    G.matrix.noalias() += ev.time->weights[j] *
                          (M * winv.asDiagonal() * M.transpose());
  }
  G.matrix = G.matrix * w.asDiagonal();

  // Pairing-form symmetry: W G must be symmetric.
  Eigen::MatrixXd WG = w.asDiagonal() * G.matrix;
  const double asym = (WG - WG.transpose()).cwiseAbs().maxCoeff();
  const double scale = WG.cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-10 * scale) {
    throw std::runtime_error("assemble_gramian: pairing form not symmetric");
  }
  // Spot-check nonnegativity of the pairing form.
  std::mt19937_64 rng(0x9ea11U);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int probe = 0; probe < 4; ++probe) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);
    const double q = x.dot(WG * x);
    if (q < -1e-12 * scale * x.squaredNorm()) {
      throw std::runtime_error(
          "assemble_gramian: pairing form indefinite on probe");
    }
  }

  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv_mix(h, static_cast<std::uint64_t>(n));
  h = fnv_mix(h, static_cast<std::uint64_t>(m));
  h = fnv_mix(h, double_bits(ev.time->horizon));
  h = fnv_mix(h, static_cast<std::uint64_t>(B.kind));
  h = fnv_mix(h, double_bits(B.gain));
  if (B.kind == InputOperator::Kind::dense) {
    h = fnv_mix(h, double_bits(B.matrix.sum()));
  }
  h = fnv_mix(h, double_bits(ev.terminal_ops[0].sum()));
  h = fnv_mix(h, double_bits(G.matrix.sum()));
  G.build_hash = h;
  return G;
}

StateVector apply_gramian(const GramianOperator& G, const StateVector& phi) {
  require_grid(G.grid, phi.grid, "apply_gramian");
  return StateVector{phi.grid, G.matrix * phi.values};
}

double positivity_certificate(const GramianOperator& G) {
  const auto& w = G.grid->weights;
  const Eigen::VectorXd ws = w.cwiseSqrt();
  // Similarity W^{1/2} G W^{-1/2} turns the pairing form into an ordinary
  // symmetric form; eigenvalues are normalized against the weighted l2
  // norm of the density.
  Eigen::MatrixXd S = ws.asDiagonal() * G.matrix *
                      ws.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("positivity_certificate: eigensolve failed");
  }
  const double lo = es.eigenvalues().minCoeff();
  const double hi = std::max(std::abs(es.eigenvalues().maxCoeff()), 1.0);
  if (lo < -1e-10 * hi) {
    std::ostringstream msg;
    msg << "positivity_certificate: negative eigenvalue " << lo
        << " beyond tolerance; Gramian assembly is inconsistent";
    throw std::runtime_error(msg.str());
  }
  return lo;
}

}  // namespace evoctrl
