// Command-line front end for the SiDAR workbench: validation, finite and
// steady-state solves, region/convergence/turnpike studies, receding-horizon
// simulation, and the complexity benchmark. Every command prints a single
// machine-greppable key=value summary line; figure data goes to CSV files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sidar/analysis.hpp"
#include "sidar/figures.hpp"
#include "sidar/lambda_opt.hpp"
#include "sidar/model.hpp"
#include "sidar/riccati.hpp"
#include "sidar/steady_state.hpp"

namespace {

struct Flags {
  std::string system_path;
  std::string out_dir = ".";
  int N = 10;
  std::vector<int> N_list;
  std::vector<double> x0;
  double alpha = -1.0;  // negative: keep the value from the system file
  double eps = 1e-6;
  std::uint64_t seed = 0;
  std::vector<int> dims;
  int samples = 4;
  std::string policy = "worst";
};

sidar::ProblemInstance load_instance(const Flags& f) {
  std::vector<std::string> warnings;
  sidar::ProblemInstance inst = sidar::load_system(f.system_path, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  Eigen::VectorXd x0 = inst.x0;
  if (!f.x0.empty()) {
    x0 = Eigen::Map<const Eigen::VectorXd>(f.x0.data(),
                                           static_cast<long>(f.x0.size()));
  }
  const double alpha = f.alpha > 0.0 ? f.alpha : inst.alpha;
  return sidar::make_instance(inst.system, x0, alpha);
}

std::string csv_path(const Flags& f, const std::string& name) {
  std::filesystem::create_directories(f.out_dir);
  return (std::filesystem::path(f.out_dir) / name).string();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int run_validate(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  const sidar::ValidationReport rep = sidar::validate(inst.system);
  for (const auto& msg : rep.messages) {
    std::fprintf(stderr, "note: %s\n", msg.c_str());
  }
  std::printf(
      "stabilizable=%d detectable=%d range_inclusion=%d terminal_coupling=%d "
      "q_pd=%d pf_pd=%d ok=%d\n",
      rep.stabilizable, rep.detectable, rep.range_inclusion,
      rep.terminal_coupling, rep.q_pd, rep.pf_pd, rep.all_ok());
  return 0;
}

int run_finite(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  const sidar::FiniteHorizonSolution sol = sidar::solve_finite(inst, f.N);
  print_warnings(sol.trajectory.warnings);
  std::printf(
      "lambda_star=%.6f value=%.6f region=%s worst_energy=%.6f "
      "lambda_lo=%.6f pi0_norm=%.6f\n",
      sol.lambda_star, sol.value,
      sol.region == sidar::Region::Linear ? "linear" : "nonlinear",
      sol.worst_energy, sol.lambda_lo, sol.trajectory.pis[0].norm());
  return 0;
}

int run_steady(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  const sidar::SteadyStateSolution sol = sidar::solve_steady_lmi(inst);
  print_warnings(sol.warnings);
  std::printf(
      "lambda_bar=%.6f pi_bar_norm=%.6f slack=%.6f chi=%.6f g_residual=%.3e "
      "newton_iters=%d\n",
      sol.lambda_bar, sol.Pi_bar.norm(), sol.slack, sol.chi,
      sol.g_residual_norm, sol.sdp.iterations);
  return 0;
}

int run_classify(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  const sidar::Classification c =
      sidar::classify(inst.system, inst.alpha);
  std::printf("kind=%s slack=%.6f tolerance=%.3e\n",
              c.kind == sidar::SystemKind::Degenerate ? "degenerate"
                                                      : "nondegenerate",
              c.slack_at_origin, c.tolerance_used);
  return 0;
}

int run_region(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  std::vector<int> Ns = f.N_list.empty() ? std::vector<int>{f.N} : f.N_list;
  std::string file;
  if (inst.system.n() == 1) {
    file = csv_path(f, "regions.csv");
    sidar::write_regions_csv(file, inst, Ns);
  } else if (inst.system.n() == 2) {
    file = csv_path(f, "regions2d.csv");
    sidar::write_regions2d_csv(file, inst, Ns);
  } else {
    std::fprintf(stderr, "region CSV output supports n in {1, 2} only\n");
    return 2;
  }
  const sidar::Ellipsoid e = sidar::region_linear(inst, Ns.back());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape,
                                                    Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  std::printf("file=%s N_last=%d boundary_min=%s\n", file.c_str(), Ns.back(),
              emax > 1e-300
                  ? sidar::format_double(std::sqrt(e.radius_sq / emax)).c_str()
                  : "inf");
  return 0;
}

int run_sweep(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  std::vector<int> Ns = f.N_list.empty() ? std::vector<int>{f.N} : f.N_list;
  const std::string sweep_file = csv_path(f, "lambda_sweep.csv");
  const std::string rec_file = csv_path(f, "recursion.csv");
  sidar::write_lambda_sweep_csv(sweep_file, inst, Ns);
  sidar::write_recursion_csv(rec_file, inst, Ns);
  const std::vector<sidar::SweepRow> rows = sidar::convergence_sweep(inst, Ns);
  const sidar::SweepRow& last = rows.back();
  std::printf(
      "files=%s,%s N_last=%d lambda_star=%.6f lambda_deviation=%.3e "
      "pi_deviation=%.3e\n",
      sweep_file.c_str(), rec_file.c_str(), last.N, last.lambda_star,
      last.lambda_deviation, last.pi_deviation);
  return 0;
}

int run_turnpike(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  const sidar::TurnpikeProfile prof =
      sidar::turnpike_profile(inst, f.N, f.eps);
  const std::string rec_file = csv_path(f, "recursion.csv");
  sidar::write_recursion_csv(rec_file, inst, {f.N});
  std::printf(
      "plateau_fraction=%.6f plateau_start=%d plateau_end=%d entry_layer=%d "
      "exit_layer=%d fixed_point=%d file=%s\n",
      prof.plateau_fraction, prof.plateau_start, prof.plateau_end,
      prof.entry_layer, prof.exit_layer, prof.fixed_point_exists,
      rec_file.c_str());
  return 0;
}

int run_simulate(const Flags& f) {
  const sidar::ProblemInstance inst = load_instance(f);
  sidar::DisturbancePolicy policy = sidar::DisturbancePolicy::WorstCase;
  if (f.policy == "worst") {
    policy = sidar::DisturbancePolicy::WorstCase;
  } else if (f.policy == "random") {
    policy = sidar::DisturbancePolicy::Random;
  } else if (f.policy == "zero") {
    policy = sidar::DisturbancePolicy::Zero;
  } else {
    std::fprintf(stderr, "unknown policy \"%s\"\n", f.policy.c_str());
    return 2;
  }
  const sidar::SimTrace trace =
      sidar::simulate_receding(inst, f.N, policy, f.seed);
  const std::string file = csv_path(f, "sim.csv");
  sidar::write_sim_csv(file, trace);
  std::printf("steps=%d x_final_norm=%s budget_final=%s file=%s\n",
              trace.horizon,
              sidar::format_double(trace.x.back().norm()).c_str(),
              sidar::format_double(trace.budget.back()).c_str(), file.c_str());
  return 0;
}

int run_bench(const Flags& f) {
  std::vector<int> dims = f.dims.empty() ? std::vector<int>{4, 8, 16, 32, 48}
                                         : f.dims;
  const sidar::BenchResult result =
      sidar::bench_complexity(dims, f.samples, f.seed);
  const std::string file = csv_path(f, "bench.csv");
  sidar::write_bench_csv(file, result);
  std::string medians;
  for (const auto& m : result.medians) {
    if (!medians.empty()) medians += ";";
    medians += std::to_string(m.first) + ":" + sidar::format_double(m.second);
  }
  if (result.slope) {
    std::printf("slope=%.4f medians=%s file=%s\n", *result.slope,
                medians.c_str(), file.c_str());
  } else {
    std::printf("slope=absent medians=%s file=%s\n", medians.c_str(),
                file.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SiDAR workbench: signal-bound disturbance attenuation"};
  app.require_subcommand(1);

  Flags f;
  auto add_common = [&f](CLI::App* cmd, bool needs_system) {
    auto* sys = cmd->add_option("--system", f.system_path, "system JSON file");
    if (needs_system) sys->required();
    cmd->add_option("--x0", f.x0, "initial state override")->delimiter(',');
    cmd->add_option("--alpha", f.alpha, "disturbance budget override");
    cmd->add_option("--out", f.out_dir, "output directory for CSV files");
  };

  auto* validate = app.add_subcommand("validate", "check model assumptions");
  add_common(validate, true);

  auto* finite = app.add_subcommand("finite", "finite-horizon solve");
  add_common(finite, true);
  finite->add_option("--N", f.N, "horizon length");

  auto* steady = app.add_subcommand("steady", "steady-state LMI solve");
  add_common(steady, true);

  auto* classify = app.add_subcommand("classify", "degeneracy classification");
  add_common(classify, true);

  auto* region = app.add_subcommand("region", "linear-policy region CSV");
  add_common(region, true);
  region->add_option("--N", f.N, "horizon length");
  region->add_option("--N-list", f.N_list, "horizon list")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "convergence sweep CSVs");
  add_common(sweep, true);
  sweep->add_option("--N", f.N, "horizon length");
  sweep->add_option("--N-list", f.N_list, "horizon list")->delimiter(',');

  auto* turnpike = app.add_subcommand("turnpike", "turnpike profile");
  add_common(turnpike, true);
  turnpike->add_option("--N", f.N, "horizon length");
  turnpike->add_option("--eps", f.eps, "relative plateau tolerance");

  auto* simulate = app.add_subcommand("simulate", "receding-horizon run");
  add_common(simulate, true);
  simulate->add_option("--N", f.N, "number of steps");
  simulate->add_option("--seed", f.seed, "random seed");
  simulate->add_option("--policy", f.policy,
                       "disturbance policy: worst|random|zero");

  auto* bench = app.add_subcommand("bench", "complexity benchmark");
  add_common(bench, false);
  bench->add_option("--dims", f.dims, "state dimensions")->delimiter(',');
  bench->add_option("--samples", f.samples, "samples per dimension");
  bench->add_option("--seed", f.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(validate)) return run_validate(f);
    if (app.got_subcommand(finite)) return run_finite(f);
    if (app.got_subcommand(steady)) return run_steady(f);
    if (app.got_subcommand(classify)) return run_classify(f);
    if (app.got_subcommand(region)) return run_region(f);
    if (app.got_subcommand(sweep)) return run_sweep(f);
    if (app.got_subcommand(turnpike)) return run_turnpike(f);
    if (app.got_subcommand(simulate)) return run_simulate(f);
    if (app.got_subcommand(bench)) return run_bench(f);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
