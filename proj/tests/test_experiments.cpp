#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smala/experiments.hpp"
#include "smala/verify.hpp"

using namespace smala;
namespace fs = std::filesystem;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.Ns = {16, 64};
  plan.zetas = {0.5};
  plan.ell = 1.0;
  plan.target = "zero";
  plan.kappa = 1.0;
  plan.s = 0.25;
  plan.T = 2.0;
  plan.S0 = 0.25;
  plan.replicas = 8;
  plan.seed = 12345;
  plan.threads = 1;
  return plan;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("smala_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("initial state realizes S0 exactly") {
  for (int n : {1, 7, 64}) {
    const auto cov = CovarianceModel::power_law(1.0, 0.25, n);
    for (double s0 : {0.0, 0.25, 1.0, 3.0}) {
      const SpectralField x = initial_state(s0, cov);
      CHECK(s_statistic(x, cov) == Catch::Approx(s0).margin(1e-12));
      CHECK(std::isfinite(sobolev_norm_sq(x, 0.25)));
    }
  }
  CHECK_THROWS(initial_state(-1.0, CovarianceModel::power_law(1.0, 0.0, 4)));
}

TEST_CASE("plan JSON round trip") {
  ExperimentPlan plan = small_plan();
  plan.target = "sqrt_sobolev";
  plan.drift_noise_draws = 777;
  const nlohmann::json j = plan;
  const ExperimentPlan back = j.get<ExperimentPlan>();
  CHECK(nlohmann::json(back) == j);
}

TEST_CASE("plan validation") {
  ExperimentPlan plan = small_plan();
  plan.Ns.clear();
  CHECK_THROWS(plan.validate());
  plan = small_plan();
  plan.target = "banana";
  CHECK_THROWS(plan.validate());
  plan = small_plan();
  plan.replicas = 0;
  CHECK_THROWS(plan.validate());
}

TEST_CASE("convergence study shape and determinism") {
  const ExperimentPlan plan = small_plan();
  const ConvergenceReport a = run_convergence_study(plan);
  REQUIRE(a.cells.size() == 2);
  for (const auto& cell : a.cells) {
    CHECK(cell.errors.size() == 8);
    for (double e : cell.errors) CHECK(e >= 0.0);
    CHECK(cell.median_err >= 0.0);
    CHECK(cell.iqr >= 0.0);
  }
  const ConvergenceReport b = run_convergence_study(plan);
  CHECK(a.cells[0].errors == b.cells[0].errors);
  CHECK(a.cells[1].errors == b.cells[1].errors);
}

TEST_CASE("adding cells never perturbs existing ones") {
  ExperimentPlan plan = small_plan();
  plan.Ns = {16};
  const ConvergenceReport solo = run_convergence_study(plan);
  plan.Ns = {16, 64};
  const ConvergenceReport both = run_convergence_study(plan);
  CHECK(solo.cells[0].errors == both.cells[0].errors);
}

TEST_CASE("parallel and serial execution agree") {
  ExperimentPlan plan = small_plan();
  plan.threads = 1;
  const ConvergenceReport serial = run_convergence_study(plan);
  plan.threads = 4;
  const ConvergenceReport parallel = run_convergence_study(plan);
  CHECK(serial.cells[0].errors == parallel.cells[0].errors);
  CHECK(serial.cells[1].errors == parallel.cells[1].errors);
}

TEST_CASE("acceptance study") {
  ExperimentPlan plan = small_plan();
  plan.Ns = {64, 1024};
  plan.zetas = {0.5, 1.0 / 3.0};
  plan.S0 = 0.5;
  plan.replicas = 256;
  const AcceptanceReport rep = run_acceptance_study(plan);
  REQUIRE(rep.cells.size() == 4);
  for (const auto& c : rep.cells) {
    CHECK(c.mean_accept >= 0.0);
    CHECK(c.mean_accept <= 1.0);
    CHECK(c.stderr_accept >= 0.0);
    CHECK(c.alpha_limit == Catch::Approx(alpha_l(0.5, LimitParams{1.0})));
  }
  const AcceptanceReport again = run_acceptance_study(plan);
  for (std::size_t i = 0; i < rep.cells.size(); ++i) {
    CHECK(rep.cells[i].mean_accept == again.cells[i].mean_accept);
  }
}

TEST_CASE("acceptance clips to one above equilibrium") {
  ExperimentPlan plan = small_plan();
  plan.Ns = {4096};
  plan.S0 = 1.5;
  plan.replicas = 256;
  const AcceptanceReport rep = run_acceptance_study(plan);
  CHECK(rep.cells[0].alpha_limit == 1.0);
  CHECK(rep.cells[0].mean_accept > 0.95);
}

TEST_CASE("drift diagnostic") {
  const auto zero = TargetModel::zero();
  SECTION("at equilibrium the limit drift vanishes") {
    const int n = 4096;
    const auto cov = CovarianceModel::power_law(1.0, 0.0, n);
    const SpectralField x = initial_state(1.0, cov);
    MalaConfig cfg{1.0, 0.5, n, 2};
    RandomStream rng(cfg.seed);
    const DriftResult r = drift_diagnostic(x, zero, cov, cfg, 4000, rng);
    CHECK(r.b_limit == 0.0);
    CHECK(std::abs(r.b_hat) < 0.25);  // Monte Carlo band around zero
  }
  SECTION("from the origin S can only grow") {
    const int n = 64;
    const auto cov = CovarianceModel::power_law(1.0, 0.0, n);
    MalaConfig cfg{1.0, 0.5, n, 3};
    RandomStream rng(cfg.seed);
    const DriftResult r =
        drift_diagnostic(SpectralField(n, 0.0), zero, cov, cfg, 500, rng);
    CHECK(r.b_hat >= 0.0);
  }
  SECTION("degenerate budget") {
    const auto cov = CovarianceModel::power_law(1.0, 0.0, 8);
    MalaConfig cfg{1.0, 0.5, 8, 4};
    RandomStream rng(cfg.seed);
    const DriftResult r =
        drift_diagnostic(initial_state(0.5, cov), zero, cov, cfg, 1, rng);
    CHECK(std::isfinite(r.b_hat));
    CHECK_THROWS(
        drift_diagnostic(initial_state(0.5, cov), zero, cov, cfg, 0, rng));
  }
}

TEST_CASE("epsilon diagnostic") {
  const auto zero = TargetModel::zero();
  SECTION("certain acceptance decouples gamma from the noise") {
    const int n = 64;
    const auto cov = CovarianceModel::power_law(1.0, 0.0, n);
    const SpectralField x = initial_state(50.0, cov);  // alpha = 1 numerically
    MalaConfig cfg{1.0, 0.5, n, 5};
    RandomStream rng(cfg.seed);
    const int draws = 4000;
    const double est = epsilon_diagnostic(x, zero, cov, cfg, draws, rng);
    // pure Monte Carlo noise, roughly sqrt(trace/draws)
    CHECK(est < 5.0 * std::sqrt(trace_hs(cov) / draws));
  }
  SECTION("correlation decays with N at fixed budget") {
    double prev = 1e300;
    int shrink = 0;
    for (int n : {64, 1024, 16384}) {
      const auto cov = CovarianceModel::power_law(1.0, 0.0, n);
      MalaConfig cfg{1.0, 0.5, n, 6};
      RandomStream rng(cfg.seed);
      const double est = epsilon_diagnostic(initial_state(0.25, cov), zero,
                                            cov, cfg, 8000, rng);
      if (est < prev) ++shrink;
      prev = est;
    }
    CHECK(shrink >= 2);
  }
  SECTION("single draw is finite") {
    const auto cov = CovarianceModel::power_law(1.0, 0.0, 4);
    MalaConfig cfg{1.0, 0.5, 4, 7};
    RandomStream rng(cfg.seed);
    CHECK(std::isfinite(
        epsilon_diagnostic(initial_state(0.25, cov), zero, cov, cfg, 1, rng)));
  }
}

TEST_CASE("drift study regression") {
  ExperimentPlan plan = small_plan();
  plan.Ns = {64, 256, 1024};
  plan.drift_noise_draws = 2000;
  const DriftReport rep = run_drift_study(plan);
  REQUIRE(rep.cells.size() == 3);
  for (const auto& c : rep.cells) {
    CHECK(c.b_limit == Catch::Approx(b_l(0.25, LimitParams{1.0})));
    CHECK(c.err >= 0.0);
  }
  CHECK(std::isfinite(rep.loglog_slope));
}

TEST_CASE("path comparison") {
  ExperimentPlan plan = small_plan();
  plan.Ns = {64};
  plan.T = 1.0;
  plan.S0 = 0.0;
  plan.replicas = 32;
  plan.sde_dt = 5e-3;
  const PathComparisonReport rep = run_path_comparison(plan);
  REQUIRE(rep.checkpoints.size() == 3);
  for (const auto& c : rep.checkpoints) {
    CHECK(c.ks_norm >= 0.0);
    CHECK(c.ks_norm <= 1.0);
    CHECK(c.mala_mean_S >= 0.0);
    CHECK(c.sde_mean_S >= 0.0);
    CHECK(c.ode_S >= 0.0);
    CHECK(c.ode_S <= 1.0);
  }
  CHECK(rep.sde_modes >= 1);
  const PathComparisonReport again = run_path_comparison(plan);
  CHECK(rep.checkpoints[2].mala_mean_S == again.checkpoints[2].mala_mean_S);
  CHECK(rep.checkpoints[2].ks_norm == again.checkpoints[2].ks_norm);
}

TEST_CASE("report writing") {
  TempDir tmp;
  ExperimentPlan plan = small_plan();
  plan.replicas = 4;

  SECTION("empty bundle still yields valid files") {
    ReportBundle bundle;
    bundle.plan = plan;
    write_report(bundle, tmp.path);
    CHECK(fs::exists(tmp.path / "plan.json"));
    CHECK(fs::exists(tmp.path / "summary.json"));
    const auto j = nlohmann::json::parse(read_file(tmp.path / "plan.json"));
    CHECK(j.get<ExperimentPlan>().replicas == 4);
  }

  SECTION("CSV round trip and byte-identical reruns") {
    const AcceptanceReport rep = run_acceptance_study(plan);
    ReportBundle bundle;
    bundle.plan = plan;
    bundle.acceptance = &rep;
    write_report(bundle, tmp.path);

    // re-parse the CSV and compare against the in-memory report
    std::ifstream in(tmp.path / "acceptance.csv");
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "N,zeta,mean_accept,stderr,mean_abs_dev,alpha_limit");
    std::size_t i = 0;
    while (std::getline(in, line)) {
      REQUIRE(i < rep.cells.size());
      std::stringstream ss(line);
      std::string field;
      std::getline(ss, field, ',');
      CHECK(std::stoi(field) == rep.cells[i].N);
      std::getline(ss, field, ',');
      CHECK(std::stod(field) == rep.cells[i].zeta);
      std::getline(ss, field, ',');
      CHECK(std::stod(field) == rep.cells[i].mean_accept);
      ++i;
    }
    CHECK(i == rep.cells.size());

    const std::string first = read_file(tmp.path / "acceptance.csv");
    const AcceptanceReport rep2 = run_acceptance_study(plan);
    ReportBundle bundle2;
    bundle2.plan = plan;
    bundle2.acceptance = &rep2;
    write_report(bundle2, tmp.path);
    CHECK(read_file(tmp.path / "acceptance.csv") == first);
  }

  SECTION("plots are emitted on request") {
    const AcceptanceReport rep = run_acceptance_study(plan);
    ReportBundle bundle;
    bundle.plan = plan;
    bundle.acceptance = &rep;
    bundle.plots = true;
    write_report(bundle, tmp.path);
    CHECK(fs::exists(tmp.path / "plots" / "acceptance.svg"));
  }
}

TEST_CASE("fast verification suites pass") {
  CHECK(verify_q_identity().passed);
  CHECK(verify_gradients().passed);
  CHECK(verify_ode_bounds().passed);
}
