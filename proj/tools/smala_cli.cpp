// Command-line front end: single chains, limit ODE/SDE integration, the
// experiment studies, and the built-in verification suite.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "smala/experiments.hpp"
#include "smala/io.hpp"
#include "smala/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

smala::ExperimentPlan load_plan(const std::string& config_path) {
  smala::ExperimentPlan plan;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      throw std::runtime_error("cannot read config file: " + config_path);
    }
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ValidationError("config file " + config_path +
                            " is not valid JSON: " + e.what());
    }
    plan = j.get<smala::ExperimentPlan>();
  }
  return plan;
}

void apply_overrides(smala::ExperimentPlan& plan,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& N,
                     const std::optional<double>& ell,
                     const std::optional<double>& zeta,
                     const std::optional<double>& T,
                     const std::optional<std::string>& outdir,
                     const std::optional<int>& threads) {
  if (seed) plan.seed = *seed;
  if (N) plan.Ns = {*N};
  if (ell) plan.ell = *ell;
  if (zeta) plan.zetas = {*zeta};
  if (T) plan.T = *T;
  if (outdir) plan.output_dir = *outdir;
  if (threads) plan.threads = *threads;
}

fs::path default_outdir(const smala::ExperimentPlan& plan) {
  if (const char* env = std::getenv("SMALA_OUTPUT_DIR")) {
    return fs::path(env);
  }
  return fs::path(plan.output_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MALA in spectral coordinates: sampler, limit integrators, "
               "and diffusion-limit experiment harness"};
  app.require_subcommand(1);

  // shared options (paper parameters: ell = proposal constant, zeta =
  // step-size exponent, kappa = eigenvalue decay, s = Sobolev index)
  std::string config_path;
  std::optional<std::uint64_t> opt_seed;
  std::optional<int> opt_N, opt_threads;
  std::optional<double> opt_ell, opt_zeta, opt_T;
  std::optional<std::string> opt_out;
  std::optional<double> opt_kappa, opt_s, opt_S0;
  bool plots = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON plan file");
    sub->add_option("--seed", opt_seed, "master seed (fully determines all outputs)");
    sub->add_option("--N", opt_N, "dimension N (replaces the plan's N grid)");
    sub->add_option("--ell", opt_ell, "proposal constant ell (delta = ell/N^zeta)");
    sub->add_option("--zeta", opt_zeta, "step-size exponent zeta in (0,1], 1/2 is the non-stationary scaling");
    sub->add_option("--T", opt_T, "time horizon T");
    sub->add_option("--out", opt_out, "output directory or file");
    sub->add_option("--threads", opt_threads, "worker thread cap (0 = all cores)");
    sub->add_option("--kappa", opt_kappa, "eigenvalue decay exponent kappa (> 1/2)");
    sub->add_option("--s", opt_s, "Sobolev index s in [0, kappa - 1/2)");
    sub->add_option("--S0", opt_S0, "initial S statistic");
    sub->add_flag("--plots", plots, "emit static SVG plots");
  };

  // sample
  auto* sample = app.add_subcommand("sample", "run one MALA chain, write trajectory CSV");
  std::string sample_target = "zero";
  std::string snapshot_file;
  add_common(sample);
  sample->add_option("--target", sample_target, "target functional: zero | sqrt_sobolev");
  sample->add_option("--snapshots", snapshot_file, "companion CSV of state snapshots");

  // ode
  auto* ode = app.add_subcommand("ode", "integrate the fluid ODE dS = b_l(S) dt");
  double ode_h = 1e-3;
  add_common(ode);
  ode->add_option("--step", ode_h, "RK4 step size");

  // sde
  auto* sde = app.add_subcommand("sde", "Euler-Maruyama path of the limit SDE");
  double sde_dt = 1e-3;
  bool ergodic = false;
  std::string sde_target = "zero";
  add_common(sde);
  sde->add_option("--dt", sde_dt, "Euler-Maruyama step size");
  sde->add_option("--target", sde_target, "target functional: zero | sqrt_sobolev");
  sde->add_flag("--ergodic", ergodic, "use the long-time constant speed h_l(1) = ell");

  // studies
  auto* acceptance = app.add_subcommand("acceptance", "first-move acceptance study over (N, zeta)");
  add_common(acceptance);
  auto* convergence = app.add_subcommand("convergence", "fluid-limit convergence study of S^(N)");
  add_common(convergence);
  auto* compare = app.add_subcommand("compare", "MALA vs limit SDE vs ODE checkpoint comparison");
  add_common(compare);

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suites, nonzero exit on failure");
  add_common(verify);

  // report
  auto* report = app.add_subcommand("report", "print a human-readable summary of an output directory");
  std::string report_dir;
  report->add_option("--dir", report_dir, "directory holding summary.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    smala::ExperimentPlan plan = load_plan(config_path);
    apply_overrides(plan, opt_seed, opt_N, opt_ell, opt_zeta, opt_T, opt_out,
                    opt_threads);
    if (opt_kappa) plan.kappa = *opt_kappa;
    if (opt_s) plan.s = *opt_s;
    if (opt_S0) plan.S0 = *opt_S0;

    if (*sample) {
      plan.target = sample_target;
      plan.validate();
      const int n = plan.Ns.front();
      const auto cov = plan.covariance(n);
      const smala::MalaConfig cfg{plan.ell, plan.zetas.front(), n, plan.seed};
      cfg.validate();
      if (!cfg.delta_admissible()) {
        std::cerr << "warning: delta = " << cfg.delta()
                  << " is outside (0,1); the drift factor 1-delta is not a "
                     "contraction\n";
      }
      const auto x0 = smala::initial_state(plan.S0, cov);
      const auto traj =
          smala::run_chain(x0, plan.target_model(), cov, cfg, plan.T);
      const fs::path out =
          opt_out ? fs::path(*opt_out) : default_outdir(plan) / "trajectory.csv";
      smala::write_trajectory_csv(traj, out);
      if (!snapshot_file.empty()) {
        smala::write_snapshots_csv(traj, snapshot_file);
      }
      const double rate = double(std::count(traj.accepted.begin(),
                                            traj.accepted.end(), 1)) /
                          double(traj.steps());
      std::cout << "steps " << traj.steps() << ", acceptance rate " << rate
                << ", final S = " << traj.S.back() << "\n"
                << "trajectory written to " << out.string() << "\n";
    } else if (*ode) {
      if (!(plan.ell > 0.0)) throw ValidationError("ell must be positive");
      const auto sol =
          smala::solve_s_ode(plan.S0, smala::LimitParams{plan.ell}, plan.T, ode_h);
      const fs::path out =
          opt_out ? fs::path(*opt_out) : default_outdir(plan) / "ode.csv";
      smala::write_ode_csv(sol, out);
      std::cout << "S(" << plan.T << ") = " << sol.grid_values().back()
                << "\nsolution written to " << out.string() << "\n";
    } else if (*sde) {
      plan.target = sde_target;
      plan.validate();
      const int n = plan.Ns.front();
      const auto cov = plan.covariance(n);
      const auto x0 = smala::initial_state(plan.S0, cov);
      smala::RandomStream rng(plan.seed);
      const smala::LimitParams lp{plan.ell};
      const auto path =
          ergodic ? smala::simulate_ergodic_sde(x0, plan.target_model(), cov,
                                                lp, plan.T, sde_dt, rng)
                  : smala::simulate_limit_sde(x0, plan.S0, plan.target_model(),
                                              cov, lp, plan.T, sde_dt, rng);
      const fs::path out =
          opt_out ? fs::path(*opt_out) : default_outdir(plan) / "sde.csv";
      smala::write_sde_csv(path, out);
      std::cout << "modes " << path.modes << " (discarded trace fraction "
                << path.discarded_trace_fraction << ")\npath written to "
                << out.string() << "\n";
    } else if (*acceptance) {
      plan.validate();
      const auto rep = smala::run_acceptance_study(plan);
      smala::ReportBundle bundle;
      bundle.plan = plan;
      bundle.acceptance = &rep;
      bundle.plots = plots;
      smala::write_report(bundle, default_outdir(plan));
      for (const auto& c : rep.cells) {
        std::cout << "N=" << c.N << " zeta=" << c.zeta << ": acceptance "
                  << c.mean_accept << " +/- " << c.stderr_accept
                  << " (limit alpha = " << c.alpha_limit << ")\n";
      }
    } else if (*convergence) {
      plan.validate();
      const auto rep = smala::run_convergence_study(plan);
      smala::ReportBundle bundle;
      bundle.plan = plan;
      bundle.convergence = &rep;
      bundle.plots = plots;
      smala::write_report(bundle, default_outdir(plan));
      for (const auto& c : rep.cells) {
        std::cout << "N=" << c.N << ": median sup-error " << c.median_err
                  << " (IQR " << c.iqr << ")\n";
      }
    } else if (*compare) {
      plan.validate();
      const auto rep = smala::run_path_comparison(plan);
      smala::ReportBundle bundle;
      bundle.plan = plan;
      bundle.paths = &rep;
      bundle.plots = plots;
      smala::write_report(bundle, default_outdir(plan));
      for (const auto& c : rep.checkpoints) {
        std::cout << "N=" << c.N << " t=" << c.t << ": S(mala) "
                  << c.mala_mean_S << ", S(sde) " << c.sde_mean_S
                  << ", S(ode) " << c.ode_S << ", KS " << c.ks_norm << "\n";
      }
    } else if (*verify) {
      bool all_ok = true;
      for (const auto& r : smala::run_verification()) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": "
                  << r.detail << "\n";
        all_ok = all_ok && r.passed;
      }
      return all_ok ? 0 : 1;
    } else if (*report) {
      const json summary =
          json::parse(smala::read_file(fs::path(report_dir) / "summary.json"));
      std::cout << "version: " << summary.value("version", "?") << "\n";
      if (summary.contains("convergence")) {
        std::cout << "convergence (median sup-error by N):\n";
        for (const auto& c : summary["convergence"]) {
          std::cout << "  N=" << c["N"] << ": " << c["median_error"] << "\n";
        }
      }
      if (summary.contains("acceptance")) {
        std::cout << "first-move acceptance:\n";
        for (const auto& c : summary["acceptance"]) {
          std::cout << "  N=" << c["N"] << " zeta=" << c["zeta"] << ": "
                    << c["mean_accept"] << " (limit " << c["alpha_limit"]
                    << ")\n";
        }
      }
      if (summary.contains("drift")) {
        std::cout << "drift log-log slope: "
                  << summary["drift"]["loglog_slope"] << "\n";
      }
      if (summary.contains("paths")) {
        std::cout << "SDE modes: " << summary["paths"]["sde_modes"] << "\n";
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
