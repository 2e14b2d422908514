#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "smala/spectral.hpp"
#include "smala/target.hpp"

namespace smala {

/// Step-size configuration: proposal variance delta = ell / N^zeta.
/// zeta = 1/2 is the scaling under which the chain started out of
/// stationarity has an order-one acceptance probability; zeta = 1/3 is
/// the stationary-regime choice and degenerates otherwise.
struct MalaConfig {
  double ell = 1.0;
  double zeta = 0.5;
  int N = 1;
  std::uint64_t seed = 0;

  double delta() const { return ell / std::pow(double(N), zeta); }

  void validate() const {
    if (!(ell > 0.0)) throw std::invalid_argument("ell must be positive");
    if (!(zeta > 0.0 && zeta <= 1.0)) {
      throw std::invalid_argument("zeta must lie in (0, 1]");
    }
    if (N < 1) throw std::invalid_argument("N must be at least 1");
  }

  // delta in (0,1) keeps the contraction factor 1-delta positive.
  bool delta_admissible() const {
    const double d = delta();
    return d > 0.0 && d < 1.0;
  }
};

struct ChainState {
  SpectralField x;
  long k = 0;
  double S = 0.0;
  long accepts = 0;
};

inline ChainState make_state(SpectralField x0, const CovarianceModel& cov) {
  ChainState st;
  st.S = s_statistic(x0, cov);
  st.x = std::move(x0);
  return st;
}

struct AcceptanceBreakdown {
  double Q = 0.0;
  double I1 = 0.0;  // Gaussian part, -(delta/4)(||y||_C^2 - ||x||_C^2)
  double I2 = 0.0;  // cross terms involving grad Psi and Psi differences
  double I3 = 0.0;  // -(delta/4)(||C grad Psi(y)||_C^2 - ||C grad Psi(x)||_C^2)
};

struct StepRecord {
  double Q = 0.0;
  bool accepted = false;
  double S = 0.0;
  SpectralField noise;  // the scaled noise C_N^{1/2} xi used by the proposal
};

/// One Langevin proposal:
///   y = (1 - delta) x - delta C_N grad Psi(x) + sqrt(2 delta) C_N^{1/2} xi.
/// Returns (y, scaled noise) so diagnostics can correlate acceptance with
/// the driving noise.
inline std::pair<SpectralField, SpectralField> propose(
    const SpectralField& x, const TargetModel& model,
    const CovarianceModel& cov, const MalaConfig& cfg, RandomStream& rng) {
  require_dim(x, cov);
  const double delta = cfg.delta();
  const double noise_scale = std::sqrt(2.0 * delta);
  const SpectralField cg = c_grad_psi(model, x, cov);
  SpectralField noise(x.size());
  SpectralField y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    noise[j] = cov.lambdas()[j] * rng.gauss();
    y[j] = (1.0 - delta) * x[j] - delta * cg[j] + noise_scale * noise[j];
  }
  return {std::move(y), std::move(noise)};
}

namespace detail {
// log q(x,y) up to the (symmetric) normalizer:
// -(1/4 delta) || (y-x) - delta m(x) ||_C^2 with m(x) = -x - C grad Psi(x).
inline double log_proposal_density(const SpectralField& from,
                                   const SpectralField& to,
                                   const TargetModel& model,
                                   const CovarianceModel& cov, double delta) {
  const SpectralField cg = c_grad_psi(model, from, cov);
  double acc = 0.0;
  for (std::size_t j = 0; j < from.size(); ++j) {
    const double drift = -from[j] - cg[j];
    const double r = (to[j] - from[j] - delta * drift) / cov.lambdas()[j];
    acc += r * r;
  }
  return -acc / (4.0 * delta);
}
}  // namespace detail

/// Log Metropolis ratio straight from the densities:
/// Q = [log pi(y) - log pi(x)] + [log q(y,x) - log q(x,y)].
inline double log_accept_direct(const SpectralField& x, const SpectralField& y,
                                const TargetModel& model,
                                const CovarianceModel& cov,
                                const MalaConfig& cfg) {
  const double delta = cfg.delta();
  return log_target_unnorm(model, y, cov) - log_target_unnorm(model, x, cov) +
         detail::log_proposal_density(y, x, model, cov, delta) -
         detail::log_proposal_density(x, y, model, cov, delta);
}

/// Same quantity assembled from the exact three-term decomposition
/// Q = I1 + I2 + I3.  I2 and I3 vanish when Psi = 0; this route skips one
/// density evaluation and exposes the Gaussian part I1 separately.
inline AcceptanceBreakdown log_accept_decomposed(const SpectralField& x,
                                                 const SpectralField& y,
                                                 const TargetModel& model,
                                                 const CovarianceModel& cov,
                                                 const MalaConfig& cfg) {
  const double delta = cfg.delta();
  AcceptanceBreakdown out;
  out.I1 = -(delta / 4.0) * (cameron_martin_norm_sq(y, cov) -
                             cameron_martin_norm_sq(x, cov));
  if (model.kind() != TargetKind::Zero) {
    const SpectralField cgx = c_grad_psi(model, x, cov);
    const SpectralField cgy = c_grad_psi(model, y, cov);
    SpectralField ax(x.size()), ay(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      ax[j] = x[j] - (1.0 - delta) * y[j];
      ay[j] = y[j] - (1.0 - delta) * x[j];
    }
    out.I2 = -0.5 * (cameron_martin_inner(ax, cgy, cov) -
                     cameron_martin_inner(ay, cgx, cov)) -
             (psi_eval(model, y) - psi_eval(model, x));
    out.I3 = -(delta / 4.0) * (cameron_martin_norm_sq(cgy, cov) -
                               cameron_martin_norm_sq(cgx, cov));
  }
  out.Q = out.I1 + out.I2 + out.I3;
  return out;
}

/// One accept/reject transition.  Acceptance is decided in log space,
/// log U <= min(0, Q), so large |Q| never overflows; ties accept.
inline StepRecord step(ChainState& state, const TargetModel& model,
                       const CovarianceModel& cov, const MalaConfig& cfg,
                       RandomStream& rng) {
  auto [y, noise] = propose(state.x, model, cov, cfg, rng);
  const double q = log_accept_decomposed(state.x, y, model, cov, cfg).Q;
  const double u = rng.uniform();
  const bool accepted = std::log(u) <= std::min(0.0, q);
  if (accepted) {
    state.x = std::move(y);
    state.S = s_statistic(state.x, cov);
    ++state.accepts;
  }
  ++state.k;
  StepRecord rec;
  rec.Q = q;
  rec.accepted = accepted;
  rec.S = state.S;
  rec.noise = std::move(noise);
  return rec;
}

/// Time-indexed record of one chain on the grid t_k = k / sqrt(N).
/// S is stored at every step; full states only at a snapshot stride.
struct Trajectory {
  MalaConfig cfg;
  double T = 0.0;
  std::vector<double> S;         // length = steps + 1
  std::vector<std::uint8_t> accepted;  // entry 0 unused (no move yet)
  std::vector<double> Q;               // entry 0 is 0 by convention
  std::vector<std::pair<long, SpectralField>> snapshots;

  long steps() const { return static_cast<long>(S.size()) - 1; }
  double time_of(long k) const { return double(k) / std::sqrt(double(cfg.N)); }
};

/// Runs ceil(T sqrt(N)) steps from x0.  Deterministic given (cfg.seed, cfg).
/// snapshot_stride <= 0 picks a stride giving about 16 snapshots.
inline Trajectory run_chain(const SpectralField& x0, const TargetModel& model,
                            const CovarianceModel& cov, const MalaConfig& cfg,
                            double T, long snapshot_stride = 0) {
  if (!(T >= 0.0)) throw std::invalid_argument("horizon T must be nonnegative");
  cfg.validate();
  const long steps = static_cast<long>(std::ceil(T * std::sqrt(double(cfg.N))));
  if (snapshot_stride <= 0) snapshot_stride = std::max<long>(1, steps / 16);

  RandomStream rng(cfg.seed);
  ChainState st = make_state(x0, cov);

  Trajectory traj;
  traj.cfg = cfg;
  traj.T = T;
  traj.S.reserve(static_cast<std::size_t>(steps) + 1);
  traj.accepted.assign(static_cast<std::size_t>(steps) + 1, 0);
  traj.Q.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  traj.S.push_back(st.S);
  traj.snapshots.emplace_back(0, st.x);

  for (long k = 1; k <= steps; ++k) {
    StepRecord rec = step(st, model, cov, cfg, rng);
    traj.S.push_back(rec.S);
    traj.accepted[static_cast<std::size_t>(k)] = rec.accepted ? 1 : 0;
    traj.Q[static_cast<std::size_t>(k)] = rec.Q;
    if (k % snapshot_stride == 0 || k == steps) {
      traj.snapshots.emplace_back(k, st.x);
    }
  }
  return traj;
}

/// Piecewise-linear interpolant of S on the grid t_k = k / sqrt(N);
/// exact at grid points.
inline double interpolate_s(const Trajectory& traj, double t) {
  const double sqn = std::sqrt(double(traj.cfg.N));
  const double pos = t * sqn;
  const long last = traj.steps();
  if (t < 0.0 || pos > double(last) + 1e-9) {
    throw std::out_of_range("interpolation time outside recorded range");
  }
  const long k = std::min(last - 1 >= 0 ? static_cast<long>(pos) : 0L,
                          std::max(0L, last - 1));
  if (last == 0) return traj.S[0];
  const double frac = pos - double(k);
  return (1.0 - frac) * traj.S[static_cast<std::size_t>(k)] +
         frac * traj.S[static_cast<std::size_t>(k) + 1];
}

}  // namespace smala
