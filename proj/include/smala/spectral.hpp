#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "smala/rng.hpp"

namespace smala {

// Coefficient vector of a point in the span of the first N covariance
// eigenvectors.  All norms and samplers below operate on this
// representation.
using SpectralField = std::vector<double>;

/// Diagonal covariance with eigenvalues lambda_j^2, lambda_j = j^{-kappa},
/// together with the Sobolev index s of the state space H^s.
///
/// Admissibility: kappa > 1/2 (trace class) and 0 <= s < kappa - 1/2 so
/// that sum_j lambda_j^2 j^{2s} converges.
class CovarianceModel {
public:
  static CovarianceModel power_law(double kappa, double s, int n) {
    validate(kappa, s, n);
    std::vector<double> lambdas(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
      lambdas[static_cast<std::size_t>(j - 1)] = std::pow(double(j), -kappa);
    }
    return CovarianceModel(kappa, s, n, std::move(lambdas));
  }

  // Override hook for custom eigenvalue sequences; the declared (kappa, s)
  // pair is re-validated and every eigenvalue must be positive and finite.
  static CovarianceModel with_eigenvalues(double kappa, double s,
                                          std::vector<double> lambdas) {
    const int n = static_cast<int>(lambdas.size());
    validate(kappa, s, n);
    for (double l : lambdas) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw std::invalid_argument(
            "eigenvalues must be positive and finite");
      }
    }
    return CovarianceModel(kappa, s, n, std::move(lambdas));
  }

  double kappa() const { return kappa_; }
  double sobolev_index() const { return s_; }
  int dim() const { return n_; }
  double lambda(int j) const { return lambdas_[static_cast<std::size_t>(j - 1)]; }
  const std::vector<double>& lambdas() const { return lambdas_; }

private:
  CovarianceModel(double kappa, double s, int n, std::vector<double> lambdas)
      : kappa_(kappa), s_(s), n_(n), lambdas_(std::move(lambdas)) {}

  static void validate(double kappa, double s, int n) {
    if (n < 1) {
      throw std::invalid_argument("dimension N must be at least 1");
    }
    if (!(kappa > 0.5)) {
      throw std::invalid_argument(
          "eigenvalues not trace class: kappa must exceed 1/2 (got " +
          std::to_string(kappa) + ")");
    }
    if (!(s >= 0.0) || !(s < kappa - 0.5)) {
      throw std::invalid_argument(
          "Sobolev index outside admissible range [0, kappa - 1/2): s = " +
          std::to_string(s) + ", kappa = " + std::to_string(kappa));
    }
  }

  double kappa_;
  double s_;
  int n_;
  std::vector<double> lambdas_;
};

inline void require_dim(const SpectralField& x, const CovarianceModel& cov) {
  if (static_cast<int>(x.size()) != cov.dim()) {
    throw std::invalid_argument("field dimension " +
                                std::to_string(x.size()) +
                                " does not match covariance dimension " +
                                std::to_string(cov.dim()));
  }
}

/// ||x||_s^2 = sum_j j^{2s} x_j^2.
inline double sobolev_norm_sq(const SpectralField& x, double s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double w = std::pow(double(j + 1), 2.0 * s);
    acc += w * x[j] * x[j];
  }
  return acc;
}

/// Cameron-Martin norm ||x||_{C_N}^2 = sum_j x_j^2 / lambda_j^2.
inline double cameron_martin_norm_sq(const SpectralField& x,
                                     const CovarianceModel& cov) {
  require_dim(x, cov);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double r = x[j] / cov.lambdas()[j];
    acc += r * r;
  }
  return acc;
}

/// Weighted inner product <a,b>_{C_N} = sum_j a_j b_j / lambda_j^2.
inline double cameron_martin_inner(const SpectralField& a,
                                   const SpectralField& b,
                                   const CovarianceModel& cov) {
  require_dim(a, cov);
  require_dim(b, cov);
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double l2 = cov.lambdas()[j] * cov.lambdas()[j];
    acc += a[j] * b[j] / l2;
  }
  return acc;
}

/// S = (1/N) ||x||_{C_N}^2, the normalized distance-from-equilibrium
/// statistic; equals 1 in expectation under the Gaussian reference.
inline double s_statistic(const SpectralField& x, const CovarianceModel& cov) {
  return cameron_martin_norm_sq(x, cov) / double(cov.dim());
}

/// Truncated trace sum_{j<=N} lambda_j^2 j^{2s}.
inline double trace_hs(const CovarianceModel& cov) {
  double acc = 0.0;
  const double s = cov.sobolev_index();
  for (int j = 1; j <= cov.dim(); ++j) {
    const double l = cov.lambda(j);
    acc += l * l * std::pow(double(j), 2.0 * s);
  }
  return acc;
}

/// Draws C_N^{1/2} xi: independent N(0, lambda_j^2) coefficients.
inline SpectralField sample_scaled_noise(const CovarianceModel& cov,
                                         RandomStream& rng) {
  SpectralField out(static_cast<std::size_t>(cov.dim()));
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = cov.lambdas()[j] * rng.gauss();
  }
  return out;
}

}  // namespace smala
