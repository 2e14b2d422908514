#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "smala/experiments.hpp"
#include "smala/limits.hpp"
#include "smala/mala.hpp"

namespace smala {

struct VerifyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {
inline SpectralField random_field(int n, RandomStream& rng, double scale = 1.0) {
  SpectralField x(static_cast<std::size_t>(n));
  for (auto& v : x) v = scale * rng.gauss();
  return x;
}
}  // namespace detail

/// Cross-validates the direct and decomposed acceptance log-ratios over
/// random (state, proposal) pairs for both built-in targets.
inline VerifyResult verify_q_identity(std::uint64_t seed = 7) {
  VerifyResult res{"q-identity", true, ""};
  double worst = 0.0;
  for (int n : {1, 2, 4, 16, 64, 256}) {
    const CovarianceModel cov = CovarianceModel::power_law(1.0, 0.25, n);
    for (const TargetModel& model :
         {TargetModel::zero(), TargetModel::sqrt_sobolev(0.25)}) {
      RandomStream rng(derive_seed(seed, std::uint64_t(n)));
      const MalaConfig cfg{1.0, 0.5, n, 0};
      for (int trial = 0; trial < 100; ++trial) {
        const SpectralField x = detail::random_field(n, rng);
        auto [y, noise] = propose(x, model, cov, cfg, rng);
        const double qd = log_accept_direct(x, y, model, cov, cfg);
        const AcceptanceBreakdown b =
            log_accept_decomposed(x, y, model, cov, cfg);
        const double err = std::abs(qd - b.Q) / (1.0 + std::abs(qd));
        worst = std::max(worst, err);
      }
    }
  }
  res.passed = worst <= 1e-10;
  res.detail = "max relative mismatch " + fmt_double(worst);
  return res;
}

/// Finite-difference gradient verification for the bounded-Lipschitz
/// built-in target across several dimensions.
inline VerifyResult verify_gradients(std::uint64_t seed = 11) {
  VerifyResult res{"gradient-check", true, ""};
  double worst = 0.0;
  for (int n : {2, 8, 32}) {
    const CovarianceModel cov = CovarianceModel::power_law(1.0, 0.25, n);
    RandomStream rng(derive_seed(seed, std::uint64_t(n)));
    const AssumptionReport rep = check_assumptions(
        TargetModel::sqrt_sobolev(0.25), cov, 100, 1e-5, rng);
    worst = std::max(worst, rep.max_grad_error);
    if (!rep.passed) res.passed = false;
  }
  res.detail = "max finite-difference error " + fmt_double(worst);
  return res;
}

/// Confinement and monotonicity of the fluid-ODE solution.
inline VerifyResult verify_ode_bounds() {
  VerifyResult res{"ode-bounds", true, ""};
  double worst = 0.0;
  for (double ell : {0.5, 1.0, 2.0}) {
    for (double s0 : {0.0, 0.25, 1.0, 2.0, 5.0}) {
      const OdeSolution sol = solve_s_ode(s0, LimitParams{ell}, 50.0, 1e-3);
      const double lo = std::min(s0, 1.0) - 1e-8;
      const double hi = std::max(s0, 1.0) + 1e-8;
      double prev = sol.grid_values().front();
      for (double v : sol.grid_values()) {
        if (v < lo || v > hi) res.passed = false;
        if (s0 < 1.0 && v < prev - 1e-12) res.passed = false;
        if (s0 > 1.0 && v > prev + 1e-12) res.passed = false;
        prev = v;
      }
      worst = std::max(worst, std::abs(sol.grid_values().back() - 1.0));
    }
  }
  res.detail = "|S(50) - 1| worst case " + fmt_double(worst);
  if (worst >= 1e-3) res.passed = false;
  return res;
}

/// Reversibility consequence at N=1 with Psi = 0: the stationary law is
/// N(0, 1), so after burn-in the empirical mean is near 0 and the second
/// moment near 1 (both within 4 standard errors).
inline VerifyResult verify_detailed_balance(std::uint64_t seed = 2026,
                                            long burn_in = 10000,
                                            long steps = 1000000) {
  VerifyResult res{"detailed-balance-moments", true, ""};
  const CovarianceModel cov = CovarianceModel::power_law(1.0, 0.0, 1);
  const TargetModel model = TargetModel::zero();
  MalaConfig cfg{1.0, 0.5, 1, seed};
  RandomStream rng(cfg.seed);
  ChainState st = make_state({1.0}, cov);
  for (long k = 0; k < burn_in; ++k) step(st, model, cov, cfg, rng);

  // Batch means give autocorrelation-aware standard errors.
  const long n_batches = 1000;
  const long batch = steps / n_batches;
  std::vector<double> bm1(static_cast<std::size_t>(n_batches), 0.0);
  std::vector<double> bm2(static_cast<std::size_t>(n_batches), 0.0);
  for (long b = 0; b < n_batches; ++b) {
    double a1 = 0.0, a2 = 0.0;
    for (long k = 0; k < batch; ++k) {
      step(st, model, cov, cfg, rng);
      const double x = st.x[0];
      a1 += x;
      a2 += x * x;
    }
    bm1[static_cast<std::size_t>(b)] = a1 / double(batch);
    bm2[static_cast<std::size_t>(b)] = a2 / double(batch);
  }
  const double m1 = detail::mean_of(bm1);
  const double m2 = detail::mean_of(bm2);
  const double se_mean = std::sqrt(detail::variance_of(bm1) / double(n_batches));
  const double se_m2 = std::sqrt(detail::variance_of(bm2) / double(n_batches));
  const bool mean_ok = std::abs(m1) < 4.0 * se_mean;
  const bool m2_ok = std::abs(m2 - 1.0) < 4.0 * se_m2;
  res.passed = mean_ok && m2_ok;
  res.detail = "mean " + fmt_double(m1) + " (4se " + fmt_double(4 * se_mean) +
               "), second moment " + fmt_double(m2) + " (4se " +
               fmt_double(4 * se_m2) + ")";
  return res;
}

inline std::vector<VerifyResult> run_verification() {
  return {verify_q_identity(), verify_gradients(), verify_ode_bounds(),
          verify_detailed_balance()};
}

}  // namespace smala
