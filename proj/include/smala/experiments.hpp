#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "smala/io.hpp"
#include "smala/limits.hpp"
#include "smala/mala.hpp"

namespace smala {

inline constexpr const char* kVersion = "spectral-mala 0.1.0";

/// Grid of experiment cells (N, zeta) with replica counts and the shared
/// model parameters.  A plan plus its master seed fully determines every
/// output; replica r of cell (N, zeta_i) draws from the stream seeded by
/// derive_seed(seed, N, i, r), so adding cells never perturbs existing ones.
struct ExperimentPlan {
  std::vector<int> Ns{64, 256, 1024, 4096};
  std::vector<double> zetas{0.5};
  double ell = 1.0;
  std::string target = "zero";  // "zero" or "sqrt_sobolev"
  double kappa = 1.0;
  double s = 0.25;
  double T = 5.0;
  double S0 = 0.25;
  int replicas = 64;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int grid_points = 129;
  double sde_dt = 1e-3;
  double ode_h = 1e-3;
  int drift_noise_draws = 20000;
  int threads = 0;

  void validate() const {
    if (Ns.empty() || zetas.empty()) {
      throw std::invalid_argument("N and zeta lists must be nonempty");
    }
    for (int n : Ns) {
      if (n < 1) throw std::invalid_argument("every N must be at least 1");
    }
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (target != "zero" && target != "sqrt_sobolev") {
      throw std::invalid_argument(
          "target must be \"zero\" or \"sqrt_sobolev\"");
    }
  }

  CovarianceModel covariance(int n) const {
    return CovarianceModel::power_law(kappa, s, n);
  }

  TargetModel target_model() const {
    if (target == "sqrt_sobolev") return TargetModel::sqrt_sobolev(s);
    return TargetModel::zero();
  }
};

inline void to_json(nlohmann::json& j, const ExperimentPlan& p) {
  j = nlohmann::json{{"Ns", p.Ns},
                     {"zetas", p.zetas},
                     {"ell", p.ell},
                     {"target", p.target},
                     {"kappa", p.kappa},
                     {"s", p.s},
                     {"T", p.T},
                     {"S0", p.S0},
                     {"replicas", p.replicas},
                     {"seed", p.seed},
                     {"output_dir", p.output_dir},
                     {"grid_points", p.grid_points},
                     {"sde_dt", p.sde_dt},
                     {"ode_h", p.ode_h},
                     {"drift_noise_draws", p.drift_noise_draws},
                     {"threads", p.threads}};
}

inline void from_json(const nlohmann::json& j, ExperimentPlan& p) {
  ExperimentPlan d;
  p.Ns = j.value("Ns", d.Ns);
  p.zetas = j.value("zetas", d.zetas);
  p.ell = j.value("ell", d.ell);
  p.target = j.value("target", d.target);
  p.kappa = j.value("kappa", d.kappa);
  p.s = j.value("s", d.s);
  p.T = j.value("T", d.T);
  p.S0 = j.value("S0", d.S0);
  p.replicas = j.value("replicas", d.replicas);
  p.seed = j.value("seed", d.seed);
  p.output_dir = j.value("output_dir", d.output_dir);
  p.grid_points = j.value("grid_points", d.grid_points);
  p.sde_dt = j.value("sde_dt", d.sde_dt);
  p.ode_h = j.value("ode_h", d.ode_h);
  p.drift_noise_draws = j.value("drift_noise_draws", d.drift_noise_draws);
  p.threads = j.value("threads", d.threads);
}

/// Deterministic initial state realizing S = S0 exactly at every N:
/// x_j = sqrt(S0) lambda_j, which also has finite ||.||_s norm.
inline SpectralField initial_state(double S0, const CovarianceModel& cov) {
  if (!(S0 >= 0.0)) throw std::invalid_argument("S0 must be nonnegative");
  SpectralField x(cov.lambdas());
  const double c = std::sqrt(S0);
  for (auto& v : x) v *= c;
  return x;
}

namespace detail {

// Work-stealing parallel map over [0, n); results land at their own index
// so aggregation order never depends on scheduling.
template <typename Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min<int>(threads, static_cast<int>(n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double pos = q * double(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return (1.0 - frac) * v[lo] + frac * v[hi];
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / double(v.size() - 1);
}

// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(double(i) / double(a.size()) -
                             double(j) / double(b.size())));
  }
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fluid-limit convergence study: sup_{t<=T} |S^(N)(t) - S(t)| per replica.
// ---------------------------------------------------------------------------

struct ConvergenceCell {
  int N = 0;
  double median_err = 0.0;
  double iqr = 0.0;
  std::vector<double> errors;  // one sup-distance per replica
};

struct ConvergenceReport {
  ExperimentPlan plan;
  double ode_step = 0.0;
  std::vector<ConvergenceCell> cells;
};

inline ConvergenceReport run_convergence_study(const ExperimentPlan& plan) {
  plan.validate();
  ConvergenceReport report;
  report.plan = plan;
  report.ode_step = plan.ode_h;

  const LimitParams lp{plan.ell};
  const OdeSolution ode = solve_s_ode(plan.S0, lp, plan.T, plan.ode_h);
  const TargetModel model = plan.target_model();
  const int gp = std::max(2, plan.grid_points);

  for (int n : plan.Ns) {
    const CovarianceModel cov = plan.covariance(n);
    const SpectralField x0 = initial_state(plan.S0, cov);
    ConvergenceCell cell;
    cell.N = n;
    cell.errors.assign(static_cast<std::size_t>(plan.replicas), 0.0);
    detail::parallel_for_index(
        static_cast<std::size_t>(plan.replicas), plan.threads,
        [&](std::size_t r) {
          MalaConfig cfg{plan.ell, 0.5, n,
                         derive_seed(plan.seed, std::uint64_t(n), 0, r)};
          const Trajectory traj = run_chain(x0, model, cov, cfg, plan.T);
          double sup = 0.0;
          for (int g = 0; g < gp; ++g) {
            const double t = plan.T * double(g) / double(gp - 1);
            sup = std::max(sup,
                           std::abs(interpolate_s(traj, t) - ode.eval(t)));
          }
          cell.errors[r] = sup;
        });
    cell.median_err = detail::median(cell.errors);
    cell.iqr = detail::quantile(cell.errors, 0.75) -
               detail::quantile(cell.errors, 0.25);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Acceptance study: first-move acceptance per (N, zeta) and deviation from
// the limiting acceptance law alpha_l(S).
// ---------------------------------------------------------------------------

struct AcceptanceCell {
  int N = 0;
  double zeta = 0.0;
  double mean_accept = 0.0;
  double stderr_accept = 0.0;
  double mean_abs_dev = 0.0;  // mean |indicator - alpha_l(S0)|
  double alpha_limit = 0.0;
};

struct AcceptanceReport {
  ExperimentPlan plan;
  std::vector<AcceptanceCell> cells;
};

inline AcceptanceReport run_acceptance_study(const ExperimentPlan& plan) {
  plan.validate();
  AcceptanceReport report;
  report.plan = plan;
  const TargetModel model = plan.target_model();
  const LimitParams lp{plan.ell};

  for (int n : plan.Ns) {
    const CovarianceModel cov = plan.covariance(n);
    const SpectralField x0 = initial_state(plan.S0, cov);
    const double s0 = s_statistic(x0, cov);
    const double alpha = alpha_l(s0, lp);
    for (std::size_t zi = 0; zi < plan.zetas.size(); ++zi) {
      const double zeta = plan.zetas[zi];
      std::vector<double> indicator(static_cast<std::size_t>(plan.replicas));
      detail::parallel_for_index(
          indicator.size(), plan.threads, [&](std::size_t r) {
            MalaConfig cfg{plan.ell, zeta, n,
                           derive_seed(plan.seed, std::uint64_t(n), zi, r)};
            RandomStream rng(cfg.seed);
            auto [y, noise] = propose(x0, model, cov, cfg, rng);
            const double q = log_accept_decomposed(x0, y, model, cov, cfg).Q;
            const double u = rng.uniform();
            indicator[r] = (std::log(u) <= std::min(0.0, q)) ? 1.0 : 0.0;
          });
      AcceptanceCell cell;
      cell.N = n;
      cell.zeta = zeta;
      cell.alpha_limit = alpha;
      cell.mean_accept = detail::mean_of(indicator);
      cell.stderr_accept = std::sqrt(
          cell.mean_accept * (1.0 - cell.mean_accept) / double(plan.replicas));
      double dev = 0.0;
      for (double ind : indicator) dev += std::abs(ind - alpha);
      cell.mean_abs_dev = dev / double(plan.replicas);
      report.cells.push_back(cell);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Drift and acceptance-noise diagnostics at a frozen state.
// ---------------------------------------------------------------------------

struct DriftResult {
  double b_hat = 0.0;    // Monte Carlo estimate of sqrt(N) E[S' - S]
  double b_limit = 0.0;  // b_l(S) at the frozen state
  double err = 0.0;
};

/// Estimates the one-step conditional drift of S at a frozen x over
/// n_noise fresh (noise, uniform) pairs and compares it with the fluid
/// drift b_l(S).
inline DriftResult drift_diagnostic(const SpectralField& x,
                                    const TargetModel& model,
                                    const CovarianceModel& cov,
                                    const MalaConfig& cfg, int n_noise,
                                    RandomStream& rng) {
  if (n_noise < 1) throw std::invalid_argument("n_noise must be >= 1");
  const double s_now = s_statistic(x, cov);
  double acc = 0.0;
  for (int i = 0; i < n_noise; ++i) {
    auto [y, noise] = propose(x, model, cov, cfg, rng);
    const double q = log_accept_decomposed(x, y, model, cov, cfg).Q;
    const double u = rng.uniform();
    if (std::log(u) <= std::min(0.0, q)) {
      acc += s_statistic(y, cov) - s_now;
    }
  }
  DriftResult res;
  res.b_hat = std::sqrt(double(cfg.N)) * acc / double(n_noise);
  res.b_limit = b_l(s_now, LimitParams{cfg.ell});
  res.err = std::abs(res.b_hat - res.b_limit);
  return res;
}

/// ||E[gamma * C^{1/2} xi]||_s estimated by Monte Carlo: measures how far
/// the acceptance indicator is from independent of the driving noise.
inline double epsilon_diagnostic(const SpectralField& x,
                                 const TargetModel& model,
                                 const CovarianceModel& cov,
                                 const MalaConfig& cfg, int n_noise,
                                 RandomStream& rng) {
  if (n_noise < 1) throw std::invalid_argument("n_noise must be >= 1");
  SpectralField mean(x.size(), 0.0);
  for (int i = 0; i < n_noise; ++i) {
    auto [y, noise] = propose(x, model, cov, cfg, rng);
    const double q = log_accept_decomposed(x, y, model, cov, cfg).Q;
    const double u = rng.uniform();
    if (std::log(u) <= std::min(0.0, q)) {
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += noise[j];
    }
  }
  for (auto& v : mean) v /= double(n_noise);
  return std::sqrt(sobolev_norm_sq(mean, cov.sobolev_index()));
}

struct DriftCell {
  int N = 0;
  double b_hat = 0.0;
  double b_limit = 0.0;
  double err = 0.0;
};

struct DriftReport {
  ExperimentPlan plan;
  std::vector<DriftCell> cells;
  double loglog_slope = 0.0;  // least-squares slope of log err vs log N
};

inline DriftReport run_drift_study(const ExperimentPlan& plan) {
  plan.validate();
  DriftReport report;
  report.plan = plan;
  const TargetModel model = plan.target_model();
  report.cells.resize(plan.Ns.size());
  detail::parallel_for_index(
      plan.Ns.size(), plan.threads, [&](std::size_t i) {
        const int n = plan.Ns[i];
        const CovarianceModel cov = plan.covariance(n);
        const SpectralField x = initial_state(plan.S0, cov);
        MalaConfig cfg{plan.ell, 0.5, n,
                       derive_seed(plan.seed, std::uint64_t(n), 0, 0xD21F7u)};
        RandomStream rng(cfg.seed);
        const DriftResult r =
            drift_diagnostic(x, model, cov, cfg, plan.drift_noise_draws, rng);
        report.cells[i] = DriftCell{n, r.b_hat, r.b_limit, r.err};
      });

  if (report.cells.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(report.cells.size());
    for (const auto& c : report.cells) {
      const double lx = std::log(double(c.N));
      const double ly = std::log(std::max(c.err, 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    report.loglog_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Path comparison: MALA ensembles vs limit-SDE ensembles vs the fluid ODE
// at checkpoint times.
// ---------------------------------------------------------------------------

struct PathCheckpoint {
  int N = 0;
  double t = 0.0;
  double mala_mean_S = 0.0;
  double sde_mean_S = 0.0;
  double ode_S = 0.0;
  double mala_mean_norm = 0.0;  // ensemble mean of ||x||_s
  double sde_mean_norm = 0.0;
  double mala_var_norm = 0.0;
  double sde_var_norm = 0.0;
  double ks_norm = 0.0;  // two-sample KS distance on ||x||_s
};

struct PathComparisonReport {
  ExperimentPlan plan;
  int sde_modes = 0;
  std::vector<PathCheckpoint> checkpoints;
};

inline PathComparisonReport run_path_comparison(const ExperimentPlan& plan) {
  plan.validate();
  PathComparisonReport report;
  report.plan = plan;
  const TargetModel model = plan.target_model();
  const LimitParams lp{plan.ell};
  const OdeSolution ode = solve_s_ode(plan.S0, lp, plan.T, plan.ode_h);
  const std::vector<double> cps{plan.T / 4.0, plan.T / 2.0, plan.T};
  const std::size_t R = static_cast<std::size_t>(plan.replicas);

  for (int n : plan.Ns) {
    const CovarianceModel cov = plan.covariance(n);
    const SpectralField x0 = initial_state(plan.S0, cov);
    const double sqn = std::sqrt(double(n));
    const long steps = static_cast<long>(std::ceil(plan.T * sqn));
    std::vector<long> cp_steps;
    for (double t : cps) {
      cp_steps.push_back(std::min<long>(
          steps, static_cast<long>(std::llround(t * sqn))));
    }

    // per replica and checkpoint: (S, ||x||_s) for chain and SDE
    std::vector<std::vector<double>> mala_S(cps.size(),
                                            std::vector<double>(R, 0.0));
    std::vector<std::vector<double>> mala_norm = mala_S;
    std::vector<std::vector<double>> sde_S = mala_S;
    std::vector<std::vector<double>> sde_norm = mala_S;
    std::atomic<int> modes_used{0};

    detail::parallel_for_index(R, plan.threads, [&](std::size_t r) {
      {
        MalaConfig cfg{plan.ell, 0.5, n,
                       derive_seed(plan.seed, std::uint64_t(n), 0, r)};
        RandomStream rng(cfg.seed);
        ChainState st = make_state(x0, cov);
        std::size_t next_cp = 0;
        while (next_cp < cp_steps.size() && cp_steps[next_cp] == 0) {
          mala_S[next_cp][r] = st.S;
          mala_norm[next_cp][r] =
              std::sqrt(sobolev_norm_sq(st.x, cov.sobolev_index()));
          ++next_cp;
        }
        for (long k = 1; k <= steps && next_cp < cp_steps.size(); ++k) {
          step(st, model, cov, cfg, rng);
          while (next_cp < cp_steps.size() && cp_steps[next_cp] == k) {
            mala_S[next_cp][r] = st.S;
            mala_norm[next_cp][r] =
                std::sqrt(sobolev_norm_sq(st.x, cov.sobolev_index()));
            ++next_cp;
          }
        }
      }
      {
        RandomStream rng(
            derive_seed(plan.seed, std::uint64_t(n), 0x5DEu, r));
        const long sde_steps =
            static_cast<long>(std::ceil(plan.T / plan.sde_dt));
        const long stride = std::max<long>(1, sde_steps / 4);
        SdePath path = simulate_limit_sde(x0, plan.S0, model, cov, lp,
                                          plan.T, plan.sde_dt, rng, stride);
        modes_used.store(path.modes);
        CovarianceModel cm = CovarianceModel::with_eigenvalues(
            cov.kappa(), cov.sobolev_index(),
            std::vector<double>(cov.lambdas().begin(),
                                cov.lambdas().begin() + path.modes));
        for (std::size_t c = 0; c < cps.size(); ++c) {
          // nearest recorded snapshot
          std::size_t best = 0;
          double bd = 1e300;
          for (std::size_t i = 0; i < path.times.size(); ++i) {
            const double d = std::abs(path.times[i] - cps[c]);
            if (d < bd) {
              bd = d;
              best = i;
            }
          }
          sde_S[c][r] = s_statistic(path.states[best], cm);
          sde_norm[c][r] = std::sqrt(
              sobolev_norm_sq(path.states[best], cov.sobolev_index()));
        }
      }
    });

    report.sde_modes = modes_used.load();
    for (std::size_t c = 0; c < cps.size(); ++c) {
      PathCheckpoint cp;
      cp.N = n;
      cp.t = cps[c];
      cp.mala_mean_S = detail::mean_of(mala_S[c]);
      cp.sde_mean_S = detail::mean_of(sde_S[c]);
      cp.ode_S = ode.eval(cps[c]);
      cp.mala_mean_norm = detail::mean_of(mala_norm[c]);
      cp.sde_mean_norm = detail::mean_of(sde_norm[c]);
      cp.mala_var_norm = detail::variance_of(mala_norm[c]);
      cp.sde_var_norm = detail::variance_of(sde_norm[c]);
      cp.ks_norm = detail::ks_distance(mala_norm[c], sde_norm[c]);
      report.checkpoints.push_back(cp);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report writing: CSV tables plus one JSON summary per output directory.
// ---------------------------------------------------------------------------

inline void write_convergence_csv(const ConvergenceReport& r,
                                  const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "N,replica,sup_error,median_error,iqr\n";
  for (const auto& cell : r.cells) {
    for (std::size_t i = 0; i < cell.errors.size(); ++i) {
      out << cell.N << ',' << i << ',' << fmt_double(cell.errors[i]) << ','
          << fmt_double(cell.median_err) << ',' << fmt_double(cell.iqr)
          << '\n';
    }
  }
}

inline void write_acceptance_csv(const AcceptanceReport& r,
                                 const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "N,zeta,mean_accept,stderr,mean_abs_dev,alpha_limit\n";
  for (const auto& c : r.cells) {
    out << c.N << ',' << fmt_double(c.zeta) << ','
        << fmt_double(c.mean_accept) << ',' << fmt_double(c.stderr_accept)
        << ',' << fmt_double(c.mean_abs_dev) << ','
        << fmt_double(c.alpha_limit) << '\n';
  }
}

inline void write_drift_csv(const DriftReport& r,
                            const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "N,b_hat,b_limit,err,loglog_slope\n";
  for (const auto& c : r.cells) {
    out << c.N << ',' << fmt_double(c.b_hat) << ',' << fmt_double(c.b_limit)
        << ',' << fmt_double(c.err) << ',' << fmt_double(r.loglog_slope)
        << '\n';
  }
}

inline void write_paths_csv(const PathComparisonReport& r,
                            const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "N,t,mala_mean_S,sde_mean_S,ode_S,mala_mean_norm,sde_mean_norm,"
         "mala_var_norm,sde_var_norm,ks_norm\n";
  for (const auto& c : r.checkpoints) {
    out << c.N << ',' << fmt_double(c.t) << ',' << fmt_double(c.mala_mean_S)
        << ',' << fmt_double(c.sde_mean_S) << ',' << fmt_double(c.ode_S)
        << ',' << fmt_double(c.mala_mean_norm) << ','
        << fmt_double(c.sde_mean_norm) << ',' << fmt_double(c.mala_var_norm)
        << ',' << fmt_double(c.sde_var_norm) << ',' << fmt_double(c.ks_norm)
        << '\n';
  }
}

struct ReportBundle {
  ExperimentPlan plan;
  const ConvergenceReport* convergence = nullptr;
  const AcceptanceReport* acceptance = nullptr;
  const DriftReport* drift = nullptr;
  const PathComparisonReport* paths = nullptr;
  bool plots = false;
};

/// Writes the standard output layout: plan.json, the CSV table for every
/// present report, summary.json, and optional plots/*.svg.
inline void write_report(const ReportBundle& bundle,
                         const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out = open_output(dir / "plan.json");
    out << nlohmann::json(bundle.plan).dump(2) << '\n';
  }

  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["plan"] = bundle.plan;
  {
    const auto now = std::chrono::system_clock::now();
    summary["wall_clock_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            now.time_since_epoch())
            .count();
  }

  if (bundle.convergence) {
    write_convergence_csv(*bundle.convergence, dir / "convergence.csv");
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : bundle.convergence->cells) {
      cells.push_back({{"N", c.N},
                       {"median_error", c.median_err},
                       {"iqr", c.iqr}});
    }
    summary["convergence"] = cells;
    if (bundle.plots) {
      PlotSeries s;
      s.label = "median sup-error";
      for (const auto& c : bundle.convergence->cells) {
        s.x.push_back(std::log10(double(c.N)));
        s.y.push_back(std::log10(std::max(c.median_err, 1e-300)));
      }
      write_svg_plot({s}, "median sup-error vs N (log10-log10)",
                     dir / "plots" / "convergence.svg");
    }
  }
  if (bundle.acceptance) {
    write_acceptance_csv(*bundle.acceptance, dir / "acceptance.csv");
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : bundle.acceptance->cells) {
      cells.push_back({{"N", c.N},
                       {"zeta", c.zeta},
                       {"mean_accept", c.mean_accept},
                       {"stderr", c.stderr_accept},
                       {"alpha_limit", c.alpha_limit}});
    }
    summary["acceptance"] = cells;
    if (bundle.plots) {
      std::vector<PlotSeries> series;
      const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
      std::vector<double> zetas;
      for (const auto& c : bundle.acceptance->cells) {
        if (std::find(zetas.begin(), zetas.end(), c.zeta) == zetas.end()) {
          zetas.push_back(c.zeta);
        }
      }
      for (std::size_t zi = 0; zi < zetas.size(); ++zi) {
        PlotSeries s;
        s.label = "zeta=" + fmt_double(zetas[zi]);
        s.color = colors[zi % 4];
        for (const auto& c : bundle.acceptance->cells) {
          if (c.zeta == zetas[zi]) {
            s.x.push_back(std::log10(double(c.N)));
            s.y.push_back(c.mean_accept);
          }
        }
        series.push_back(std::move(s));
      }
      write_svg_plot(series, "first-move acceptance vs log10 N",
                     dir / "plots" / "acceptance.svg");
    }
  }
  if (bundle.drift) {
    write_drift_csv(*bundle.drift, dir / "drift.csv");
    summary["drift"] = {{"loglog_slope", bundle.drift->loglog_slope}};
  }
  if (bundle.paths) {
    write_paths_csv(*bundle.paths, dir / "paths.csv");
    summary["paths"] = {{"sde_modes", bundle.paths->sde_modes}};
  }

  std::ofstream out = open_output(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

}  // namespace smala
