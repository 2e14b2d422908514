#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "smala/spectral.hpp"

namespace smala {

enum class TargetKind { Zero, SqrtSobolev, Custom };

/// Change-of-measure functional Psi defining the target density
/// exp(-Psi) against the Gaussian reference.  Two built-ins:
///   Zero        -- Psi = 0, pure Gaussian target.
///   SqrtSobolev -- Psi(x) = sqrt(1 + ||x||_s^2), bounded Lipschitz gradient.
/// Custom functionals supply a (value, gradient) callback pair and should
/// pass check_assumptions before use.
class TargetModel {
public:
  using ValueFn = std::function<double(const SpectralField&)>;
  using GradFn = std::function<SpectralField(const SpectralField&)>;

  static TargetModel zero() { return TargetModel(TargetKind::Zero, 0.0); }

  static TargetModel sqrt_sobolev(double s) {
    return TargetModel(TargetKind::SqrtSobolev, s);
  }

  static TargetModel custom(ValueFn value, GradFn grad) {
    TargetModel m(TargetKind::Custom, 0.0);
    m.value_ = std::move(value);
    m.grad_ = std::move(grad);
    return m;
  }

  TargetKind kind() const { return kind_; }
  double sobolev_index() const { return s_; }
  const ValueFn& value_fn() const { return value_; }
  const GradFn& grad_fn() const { return grad_; }

private:
  TargetModel(TargetKind kind, double s) : kind_(kind), s_(s) {}

  TargetKind kind_;
  double s_;
  ValueFn value_;
  GradFn grad_;
};

inline double psi_eval(const TargetModel& model, const SpectralField& x) {
  switch (model.kind()) {
    case TargetKind::Zero:
      return 0.0;
    case TargetKind::SqrtSobolev:
      return std::sqrt(1.0 + sobolev_norm_sq(x, model.sobolev_index()));
    case TargetKind::Custom:
      return model.value_fn()(x);
  }
  return 0.0;
}

/// Gradient of Psi as an H^{-s} coefficient vector.  For SqrtSobolev the
/// j-th coefficient is j^{2s} x_j / Psi(x), so ||grad||_{-s} <= 1.
inline SpectralField grad_psi(const TargetModel& model,
                              const SpectralField& x) {
  switch (model.kind()) {
    case TargetKind::Zero:
      return SpectralField(x.size(), 0.0);
    case TargetKind::SqrtSobolev: {
      const double psi = psi_eval(model, x);
      const double s = model.sobolev_index();
      SpectralField g(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        g[j] = std::pow(double(j + 1), 2.0 * s) * x[j] / psi;
      }
      return g;
    }
    case TargetKind::Custom:
      return model.grad_fn()(x);
  }
  return SpectralField(x.size(), 0.0);
}

/// Preconditioned gradient C_N grad Psi: coefficient j picks up lambda_j^2.
inline SpectralField c_grad_psi(const TargetModel& model,
                                const SpectralField& x,
                                const CovarianceModel& cov) {
  require_dim(x, cov);
  SpectralField g = grad_psi(model, x);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double l = cov.lambdas()[j];
    g[j] *= l * l;
  }
  return g;
}

/// log pi^N(x) up to the normalizing constant:
/// -Psi(x) - (1/2)||x||_{C_N}^2.
inline double log_target_unnorm(const TargetModel& model,
                                const SpectralField& x,
                                const CovarianceModel& cov) {
  return -psi_eval(model, x) - 0.5 * cameron_martin_norm_sq(x, cov);
}

struct AssumptionReport {
  double max_grad_error = 0.0;    // worst central finite-difference mismatch
  double lipschitz_ratio = 0.0;   // sup ||grad(x)-grad(y)||_{-s} / ||x-y||_s
  double grad_bound = 0.0;        // sup ||grad(x)||_{-s}
  bool passed = true;
};

/// Empirical verification of the gradient and its bounded/Lipschitz
/// behaviour over `trials` random states.  Failures are reported in the
/// `passed` flag, never thrown.
inline AssumptionReport check_assumptions(const TargetModel& model,
                                          const CovarianceModel& cov,
                                          int trials, double tol,
                                          RandomStream& rng,
                                          double fd_step = 1e-6) {
  AssumptionReport rep;
  const double s = cov.sobolev_index();
  const int n = cov.dim();
  auto random_state = [&] {
    SpectralField x(static_cast<std::size_t>(n));
    for (auto& v : x) v = rng.gauss();
    return x;
  };

  for (int t = 0; t < trials; ++t) {
    SpectralField x = random_state();
    const SpectralField g = grad_psi(model, x);
    rep.grad_bound = std::max(rep.grad_bound,
                              std::sqrt(sobolev_norm_sq(g, -s)));
    for (int j = 0; j < n; ++j) {
      const double xj = x[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(j)] = xj + fd_step;
      const double up = psi_eval(model, x);
      x[static_cast<std::size_t>(j)] = xj - fd_step;
      const double dn = psi_eval(model, x);
      x[static_cast<std::size_t>(j)] = xj;
      const double fd = (up - dn) / (2.0 * fd_step);
      rep.max_grad_error = std::max(
          rep.max_grad_error, std::abs(fd - g[static_cast<std::size_t>(j)]));
    }

    SpectralField y = random_state();
    SpectralField gy = grad_psi(model, y);
    SpectralField dg(x.size()), dx(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      dg[j] = g[j] - gy[j];
      dx[j] = x[j] - y[j];
    }
    const double den = std::sqrt(sobolev_norm_sq(dx, s));
    if (den > 0.0) {
      const double num = std::sqrt(sobolev_norm_sq(dg, -s));
      rep.lipschitz_ratio = std::max(rep.lipschitz_ratio, num / den);
    }
  }
  rep.passed = rep.max_grad_error <= tol;
  return rep;
}

}  // namespace smala
