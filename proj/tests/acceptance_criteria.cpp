// Acceptance suite: quantitative desk-scale checks of the sampler, the
// limit integrators, and the experiment harness.  Prints one line per
// criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "smala/experiments.hpp"
#include "smala/io.hpp"
#include "smala/verify.hpp"

using namespace smala;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

SpectralField random_field(int n, RandomStream& rng) {
  SpectralField x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.gauss();
  return x;
}

// 1. Q-decomposition identity across dimensions and targets.
Outcome criterion_q_identity() {
  double worst = 0.0;
  for (int n : {1, 2, 4, 16, 64, 256}) {
    const auto cov = CovarianceModel::power_law(1.0, 0.25, n);
    const MalaConfig cfg{1.0, 0.5, n, 0};
    for (const TargetModel& model :
         {TargetModel::zero(), TargetModel::sqrt_sobolev(0.25)}) {
      RandomStream rng(derive_seed(101, std::uint64_t(n),
                                   model.kind() == TargetKind::Zero ? 0 : 1));
      for (int trial = 0; trial < 100; ++trial) {
        const SpectralField x = random_field(n, rng);
        auto [y, noise] = propose(x, model, cov, cfg, rng);
        const double qd = log_accept_direct(x, y, model, cov, cfg);
        const auto b = log_accept_decomposed(x, y, model, cov, cfg);
        worst = std::max(worst,
                         std::abs(qd - b.Q) / (1.0 + std::abs(qd)));
      }
    }
  }
  return {worst <= 1e-10, "max |Q_direct - (I1+I2+I3)| / (1+|Q|) = " +
                              fmt_double(worst) + " (tol 1e-10)"};
}

// 2. Stationary moments at N=1 via reversibility.
Outcome criterion_stationary() {
  const VerifyResult r = verify_detailed_balance(2026, 10000, 1000000);
  return {r.passed, r.detail};
}

// 3. Fluid-ODE confinement, monotonicity, equilibration, RK4 order.
Outcome criterion_ode() {
  std::string detail;
  bool ok = true;
  double worst_final = 0.0;
  for (double ell : {0.5, 1.0, 2.0}) {
    for (double s0 : {0.0, 0.25, 1.0, 2.0, 5.0}) {
      const OdeSolution sol = solve_s_ode(s0, LimitParams{ell}, 50.0, 1e-3);
      const double lo = std::min(s0, 1.0) - 1e-8;
      const double hi = std::max(s0, 1.0) + 1e-8;
      double prev = sol.grid_values().front();
      for (double v : sol.grid_values()) {
        if (v < lo || v > hi) ok = false;
        if (s0 < 1.0 && v < prev - 1e-12) ok = false;
        if (s0 > 1.0 && v > prev + 1e-12) ok = false;
        prev = v;
      }
      worst_final = std::max(worst_final,
                             std::abs(sol.grid_values().back() - 1.0));
    }
  }
  if (worst_final >= 1e-3) ok = false;

  double min_order = 100.0;
  for (double s0 : {0.0, 0.5, 2.0}) {
    const LimitParams p{1.0};
    const OdeSolution ref = solve_s_ode(s0, p, 5.0, 5e-4);
    const OdeSolution coarse = solve_s_ode(s0, p, 5.0, 0.05);
    const OdeSolution fine = solve_s_ode(s0, p, 5.0, 0.025);
    double ec = 0.0, ef = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double t = 5.0 * i / 100.0;
      ec = std::max(ec, std::abs(coarse.eval(t) - ref.eval(t)));
      ef = std::max(ef, std::abs(fine.eval(t) - ref.eval(t)));
    }
    min_order = std::min(min_order, std::log2(ec / ef));
  }
  if (min_order < 3.5) ok = false;
  detail = "worst |S(50)-1| = " + fmt_double(worst_final) +
           ", measured RK4 order >= " + fmt_double(min_order);
  return {ok, detail};
}

ExperimentPlan base_plan(std::uint64_t seed) {
  ExperimentPlan plan;
  plan.ell = 1.0;
  plan.target = "zero";
  plan.kappa = 1.0;
  plan.s = 0.25;
  plan.seed = seed;
  plan.threads = 0;
  return plan;
}

// 4. First-move acceptance law at zeta = 1/2.
Outcome criterion_acceptance_law(const fs::path& dir,
                                 AcceptanceReport* out) {
  ExperimentPlan plan = base_plan(42);
  plan.Ns = {4096};
  plan.zetas = {0.5};
  plan.S0 = 0.5;
  plan.replicas = 1024;
  *out = run_acceptance_study(plan);
  write_acceptance_csv(*out, dir / "acceptance_law.csv");
  const double target = std::exp(-0.25);
  const double gap = std::abs(out->cells[0].mean_accept - target);
  return {gap <= 0.05, "|mean acceptance - e^{-1/4}| = " + fmt_double(gap) +
                           " (tol 0.05, mean = " +
                           fmt_double(out->cells[0].mean_accept) + ")"};
}

// 5. Degeneracy of zeta = 1/3 out of stationarity.
Outcome criterion_degeneracy(const fs::path& dir, AcceptanceReport* out) {
  ExperimentPlan plan = base_plan(43);
  plan.Ns = {256, 4096, 65536};
  plan.zetas = {1.0 / 3.0};
  plan.S0 = 0.5;
  plan.replicas = 1024;
  *out = run_acceptance_study(plan);
  write_acceptance_csv(*out, dir / "degeneracy.csv");
  const double a0 = out->cells[0].mean_accept;
  const double a1 = out->cells[1].mean_accept;
  const double a2 = out->cells[2].mean_accept;
  const bool ok = a0 > a1 && a1 > a2 && a2 < 0.05;
  return {ok, "acceptance along N: " + fmt_double(a0) + " > " +
                  fmt_double(a1) + " > " + fmt_double(a2) +
                  " with final < 0.05"};
}

// 6. Fluid-limit convergence of the interpolated S statistic.
Outcome criterion_convergence(const fs::path& dir, ConvergenceReport* out) {
  ExperimentPlan plan = base_plan(44);
  plan.Ns = {64, 256, 1024, 4096};
  plan.zetas = {0.5};
  plan.S0 = 0.25;
  plan.T = 5.0;
  plan.replicas = 64;
  *out = run_convergence_study(plan);
  write_convergence_csv(*out, dir / "convergence.csv");
  int inversions = 0;
  for (std::size_t i = 1; i < out->cells.size(); ++i) {
    if (out->cells[i].median_err > out->cells[i - 1].median_err) ++inversions;
  }
  const double first = out->cells.front().median_err;
  const double last = out->cells.back().median_err;
  const bool ok = inversions <= 1 && last < 0.5 * first;
  std::string medians;
  for (const auto& c : out->cells) medians += fmt_double(c.median_err) + " ";
  return {ok, "median sup-errors: " + medians + "(inversions " +
                  std::to_string(inversions) + ")"};
}

// 7. One-step drift of S vs the fluid drift b_l.
Outcome criterion_drift(const fs::path& dir, DriftReport* out) {
  ExperimentPlan plan = base_plan(52);
  plan.Ns = {64, 256, 1024, 4096, 16384};
  plan.S0 = 0.25;
  plan.drift_noise_draws = 20000;
  *out = run_drift_study(plan);
  write_drift_csv(*out, dir / "drift.csv");
  const double slope = out->loglog_slope;
  const bool ok = slope >= -0.5 && slope <= -0.1;
  return {ok, "log-log slope of |b_hat - b_l| vs N = " + fmt_double(slope) +
                  " (band [-0.5, -0.1])"};
}

// 8. Three-way consistency: MALA ensemble, limit SDE ensemble, fluid ODE.
Outcome criterion_three_way(const fs::path& dir, PathComparisonReport* out) {
  ExperimentPlan plan = base_plan(46);
  plan.Ns = {4096};
  plan.zetas = {0.5};
  plan.S0 = 0.0;
  plan.T = 2.0;
  plan.replicas = 256;
  plan.sde_dt = 1e-3;
  *out = run_path_comparison(plan);
  write_paths_csv(*out, dir / "paths.csv");
  const PathCheckpoint& last = out->checkpoints.back();
  const double gap_ms = std::abs(last.mala_mean_S - last.sde_mean_S);
  const double gap_mo = std::abs(last.mala_mean_S - last.ode_S);
  const double gap_so = std::abs(last.sde_mean_S - last.ode_S);
  const bool ok = gap_ms <= 0.05 && gap_mo <= 0.05 && gap_so <= 0.05;
  return {ok, "S at t=T: mala " + fmt_double(last.mala_mean_S) + ", sde " +
                  fmt_double(last.sde_mean_S) + ", ode " +
                  fmt_double(last.ode_S) + " (all gaps <= 0.05)"};
}

// 9. Gradient and assumption checks.
Outcome criterion_gradients() {
  const VerifyResult g = verify_gradients();
  if (!g.passed) return {false, g.detail};
  double worst = 0.0;
  for (int n : {16, 32, 64, 128}) {
    const auto cov = CovarianceModel::power_law(1.0, 0.25, n);
    const auto model = TargetModel::sqrt_sobolev(0.25);
    RandomStream rng(derive_seed(909, std::uint64_t(n)));
    for (int trial = 0; trial < 200; ++trial) {
      const SpectralField x = random_field(n, rng);
      worst = std::max(worst,
                       sobolev_norm_sq(c_grad_psi(model, x, cov), 0.25));
    }
  }
  const bool ok = worst < 4.0;
  return {ok, g.detail + "; sup ||C grad Psi||_s^2 over N grid = " +
                  fmt_double(worst)};
}

// 10. Byte-identical reruns of criteria 4-8.
Outcome criterion_determinism(const fs::path& run1, const fs::path& run2) {
  AcceptanceReport a4, a5;
  ConvergenceReport c6;
  DriftReport d7;
  PathComparisonReport p8;
  criterion_acceptance_law(run2, &a4);
  criterion_degeneracy(run2, &a5);
  criterion_convergence(run2, &c6);
  criterion_drift(run2, &d7);
  criterion_three_way(run2, &p8);
  const char* files[] = {"acceptance_law.csv", "degeneracy.csv",
                         "convergence.csv", "drift.csv", "paths.csv"};
  for (const char* f : files) {
    if (read_file(run1 / f) != read_file(run2 / f)) {
      return {false, std::string("rerun of ") + f + " differs"};
    }
  }
  return {true, "all five CSV outputs byte-identical on rerun"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_root =
      argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  const fs::path run1 = out_root / "run1";
  const fs::path run2 = out_root / "run2";
  fs::create_directories(run1);
  fs::create_directories(run2);

  AcceptanceReport a4, a5;
  ConvergenceReport c6;
  DriftReport d7;
  PathComparisonReport p8;

  const std::vector<std::pair<std::string, std::function<Outcome()>>>
      criteria = {
          {"1 Q-decomposition identity", [] { return criterion_q_identity(); }},
          {"2 stationary moments (N=1)", [] { return criterion_stationary(); }},
          {"3 fluid-ODE properties", [] { return criterion_ode(); }},
          {"4 first-move acceptance law (zeta=1/2)",
           [&] { return criterion_acceptance_law(run1, &a4); }},
          {"5 zeta=1/3 degeneracy",
           [&] { return criterion_degeneracy(run1, &a5); }},
          {"6 fluid-limit convergence of S^(N)",
           [&] { return criterion_convergence(run1, &c6); }},
          {"7 drift diagnostic slope",
           [&] { return criterion_drift(run1, &d7); }},
          {"8 MALA/SDE/ODE three-way consistency",
           [&] { return criterion_three_way(run1, &p8); }},
          {"9 gradient and assumption checks",
           [] { return criterion_gradients(); }},
          {"10 determinism of criteria 4-8",
           [&] { return criterion_determinism(run1, run2); }},
      };

  bool all_ok = true;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = fn();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %s: %s (%.1fs)\n", o.passed ? "PASS" : "FAIL",
                name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    all_ok = all_ok && o.passed;
  }
  return all_ok ? 0 : 1;
}
