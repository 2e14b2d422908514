#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "smala/spectral.hpp"
#include "smala/target.hpp"

namespace smala {

struct LimitParams {
  double ell = 1.0;

  void validate() const {
    if (!(ell > 0.0)) throw std::invalid_argument("ell must be positive");
  }
};

/// alpha_l(s) = 1 ^ exp(ell^2 (s-1)/2): limiting acceptance probability as
/// a function of the S statistic; identically 1 for s >= 1.
inline double alpha_l(double s, const LimitParams& p) {
  if (s >= 1.0) return 1.0;
  return std::exp(p.ell * p.ell * (s - 1.0) / 2.0);
}

/// h_l(s) = ell * alpha_l(s), the limiting speed factor.
inline double h_l(double s, const LimitParams& p) {
  return p.ell * alpha_l(s, p);
}

/// b_l(s) = 2 ell (1-s) alpha_l(s) = 2 (1-s) h_l(s), the fluid-ODE drift.
/// Positive on [0,1), zero at 1, negative beyond.
inline double b_l(double s, const LimitParams& p) {
  return 2.0 * (1.0 - s) * h_l(s, p);
}

/// Solution of dS/dt = b_l(S) on a uniform grid, with cubic Hermite dense
/// output using b_l(S) as the slope.
class OdeSolution {
public:
  OdeSolution(double s0, LimitParams p, double h, std::vector<double> values)
      : s0_(s0), params_(p), h_(h), values_(std::move(values)) {}

  double initial() const { return s0_; }
  double step_size() const { return h_; }
  double horizon() const { return h_ * double(values_.size() - 1); }
  const std::vector<double>& grid_values() const { return values_; }
  const LimitParams& params() const { return params_; }

  double eval(double t) const {
    if (t < -1e-12 || t > horizon() + 1e-9) {
      throw std::out_of_range("time outside ODE solution range");
    }
    t = std::clamp(t, 0.0, horizon());
    const std::size_t last = values_.size() - 1;
    const std::size_t k =
        std::min(static_cast<std::size_t>(t / h_), last - (last > 0 ? 1 : 0));
    if (last == 0) return values_[0];
    const double u = (t - double(k) * h_) / h_;
    const double y0 = values_[k], y1 = values_[k + 1];
    const double m0 = h_ * b_l(y0, params_);
    const double m1 = h_ * b_l(y1, params_);
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
           (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
  }

private:
  double s0_;
  LimitParams params_;
  double h_;
  std::vector<double> values_;
};

/// Classical RK4 on a uniform grid.  b_l is globally Lipschitz so no step
/// control is needed; the solution stays in [min(S0,1), max(S0,1)].
inline OdeSolution solve_s_ode(double s0, const LimitParams& p, double T,
                               double h = 1e-3) {
  if (!(s0 >= 0.0)) throw std::invalid_argument("S0 must be nonnegative");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  p.validate();
  const std::size_t steps = static_cast<std::size_t>(std::ceil(T / h));
  std::vector<double> values;
  values.reserve(steps + 1);
  values.push_back(s0);
  double s = s0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1 = b_l(s, p);
    const double k2 = b_l(s + 0.5 * h * k1, p);
    const double k3 = b_l(s + 0.5 * h * k2, p);
    const double k4 = b_l(s + h * k3, p);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    values.push_back(s);
  }
  return OdeSolution(s0, p, h, std::move(values));
}

/// Drift field of the limiting diffusion: F(x) = -x - C grad Psi(x).
inline SpectralField drift_F(const SpectralField& x, const TargetModel& model,
                             const CovarianceModel& cov) {
  SpectralField f = c_grad_psi(model, x, cov);
  for (std::size_t j = 0; j < f.size(); ++j) {
    f[j] = -x[j] - f[j];
  }
  return f;
}

/// Theta(x, S) = h_l(S) F(x), the drift of the limit SDE.
inline SpectralField limit_drift_theta(const SpectralField& x, double S,
                                       const TargetModel& model,
                                       const CovarianceModel& cov,
                                       const LimitParams& p) {
  SpectralField f = drift_F(x, model, cov);
  const double h = h_l(S, p);
  for (auto& v : f) v *= h;
  return f;
}

/// Smallest mode count M <= N whose discarded tail of the truncated trace
/// stays below `rel_tol` times the full truncated trace.
inline int choose_mode_count(const CovarianceModel& cov,
                             double rel_tol = 1e-6) {
  const double total = trace_hs(cov);
  const double s = cov.sobolev_index();
  double tail = 0.0;
  int m = cov.dim();
  for (int j = cov.dim(); j >= 1; --j) {
    const double l = cov.lambda(j);
    const double term = l * l * std::pow(double(j), 2.0 * s);
    if (tail + term >= rel_tol * total) break;
    tail += term;
    m = j - 1;
  }
  return std::max(1, m);
}

struct SdePath {
  double dt = 0.0;
  int modes = 0;
  double discarded_trace_fraction = 0.0;
  std::vector<double> times;               // snapshot times, last one = T
  std::vector<SpectralField> states;       // snapshots (M coefficients each)
  std::vector<double> coefficient_S;       // S(t) driving the coefficients
};

namespace detail {
template <typename SpeedFn>
SdePath euler_maruyama(const SpectralField& x0, const TargetModel& model,
                       const CovarianceModel& cov, const LimitParams& p,
                       double T, double dt, RandomStream& rng,
                       SpeedFn&& speed, long snapshot_stride) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  p.validate();
  require_dim(x0, cov);

  const int modes = std::min(choose_mode_count(cov), cov.dim());
  CovarianceModel cm = CovarianceModel::with_eigenvalues(
      cov.kappa(), cov.sobolev_index(),
      std::vector<double>(cov.lambdas().begin(),
                          cov.lambdas().begin() + modes));
  SpectralField x(x0.begin(), x0.begin() + modes);

  const long steps = static_cast<long>(std::ceil(T / dt));
  if (snapshot_stride <= 0) snapshot_stride = std::max<long>(1, steps / 16);

  SdePath path;
  path.dt = dt;
  path.modes = modes;
  {
    double tail = 0.0;
    const double s = cov.sobolev_index();
    for (int j = modes + 1; j <= cov.dim(); ++j) {
      const double l = cov.lambda(j);
      tail += l * l * std::pow(double(j), 2.0 * s);
    }
    path.discarded_trace_fraction = tail / trace_hs(cov);
  }
  auto record = [&](long k) {
    const double t = std::min(double(k) * dt, T);
    path.times.push_back(t);
    path.states.push_back(x);
    path.coefficient_S.push_back(speed(t));
  };
  record(0);

  for (long k = 0; k < steps; ++k) {
    const double t = double(k) * dt;
    const double h = h_l(speed(t), p);
    const double noise_scale = std::sqrt(2.0 * h * dt);
    const SpectralField cg = c_grad_psi(model, x, cm);
    for (int j = 0; j < modes; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      const double drift = -x[u] - cg[u];
      x[u] += dt * h * drift + noise_scale * cm.lambdas()[u] * rng.gauss();
    }
    if ((k + 1) % snapshot_stride == 0 || k + 1 == steps) record(k + 1);
  }
  return path;
}
}  // namespace detail

/// Euler-Maruyama path of the limit SDE
///   dx = -h_l(S(t)) (x + C grad Psi(x)) dt + sqrt(2 h_l(S(t))) dW,
/// with S(t) read from a separately solved fluid ODE (the ODE evolves
/// autonomously; it is never co-integrated with the noise).
inline SdePath simulate_limit_sde(const SpectralField& x0, double S0,
                                  const TargetModel& model,
                                  const CovarianceModel& cov,
                                  const LimitParams& p, double T, double dt,
                                  RandomStream& rng,
                                  long snapshot_stride = 0) {
  const OdeSolution ode = solve_s_ode(S0, p, T + dt, std::min(dt, 1e-3));
  return detail::euler_maruyama(
      x0, model, cov, p, T, dt, rng,
      [&](double t) { return ode.eval(std::min(t, ode.horizon())); },
      snapshot_stride);
}

/// Long-time regime: the coefficient S has relaxed to 1, so the speed
/// factor is the constant h_l(1) = ell.
inline SdePath simulate_ergodic_sde(const SpectralField& x0,
                                    const TargetModel& model,
                                    const CovarianceModel& cov,
                                    const LimitParams& p, double T, double dt,
                                    RandomStream& rng,
                                    long snapshot_stride = 0) {
  return detail::euler_maruyama(
      x0, model, cov, p, T, dt, rng, [](double) { return 1.0; },
      snapshot_stride);
}

}  // namespace smala
