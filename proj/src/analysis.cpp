#include "sidar/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sidar/riccati.hpp"
#include "sidar/steady_state.hpp"

namespace sidar {

Ellipsoid region_linear(const ProblemInstance& inst, int N) {
  const LinearSystem& sys = inst.system;
  const double lambda_lo = lambda_lower_bound(sys, N);
  const Eigen::MatrixXd Jt = jtilde(lambda_lo, N, sys);
  Ellipsoid e;
  e.shape = Jt.transpose() * Jt;
  e.shape = 0.5 * (e.shape + e.shape.transpose());
  e.radius_sq = inst.alpha;
  return e;
}

RegionLimit region_limit_membership(const ProblemInstance& inst, int N_max) {
  if (N_max < 1) throw std::invalid_argument("N_max must be at least 1");
  RegionLimit lim;
  lim.alpha = inst.alpha;
  lim.shapes.reserve(N_max);
  for (int N = 1; N <= N_max; ++N) {
    lim.shapes.push_back(region_linear(inst, N).shape);
  }
  lim.outer = Ellipsoid{lim.shapes.back(), inst.alpha};
  return lim;
}

std::vector<SweepRow> convergence_sweep(const ProblemInstance& inst,
                                        const std::vector<int>& N_list) {
  const SteadyStateSolution steady = solve_steady_lmi(inst);
  std::vector<SweepRow> rows;
  rows.reserve(N_list.size());
  for (int N : N_list) {
    const FiniteHorizonSolution fin = solve_finite(inst, N);
    SweepRow row;
    row.N = N;
    row.lambda_star = fin.lambda_star;
    row.pi_deviation = (fin.trajectory.pis[0] - steady.Pi_bar).norm();
    row.lambda_deviation = std::abs(fin.lambda_star - steady.lambda_bar);
    row.region = fin.region;
    rows.push_back(row);
  }
  return rows;
}

TurnpikeProfile turnpike_profile(const ProblemInstance& inst, int N,
                                 double epsilon) {
  const FiniteHorizonSolution fin = solve_finite(inst, N);
  const auto& pis = fin.trajectory.pis;

  TurnpikeProfile prof;
  prof.epsilon_used = epsilon;
  try {
    prof.plateau_value = riccati_fixed_point(fin.lambda_star, inst.system);
    prof.fixed_point_exists = true;
  } catch (const std::runtime_error&) {
    // No fixed point at lambda*(N) (degenerate regime): estimate the plateau
    // level from the middle of the horizon.
    prof.plateau_value = pis[N / 2];
    prof.fixed_point_exists = false;
  }

  const double tol = epsilon * std::max(1.0, prof.plateau_value.norm());
  int best_start = 0, best_len = 0;
  int run_start = -1;
  for (int k = 0; k <= N; ++k) {
    const bool close = (pis[k] - prof.plateau_value).norm() <= tol;
    if (close && run_start < 0) run_start = k;
    if ((!close || k == N) && run_start >= 0) {
      const int end = close ? k : k - 1;
      const int len = end - run_start + 1;
      if (len > best_len) {
        best_len = len;
        best_start = run_start;
      }
      run_start = -1;
    }
  }
  prof.plateau_start = best_start;
  prof.plateau_end = best_len > 0 ? best_start + best_len - 1 : best_start;
  prof.plateau_fraction = static_cast<double>(best_len) / (N + 1);
  prof.entry_layer = prof.plateau_start;
  prof.exit_layer = best_len > 0 ? N - prof.plateau_end : 0;
  return prof;
}

SimTrace simulate_receding(const ProblemInstance& inst, int T,
                           DisturbancePolicy policy, std::uint64_t seed) {
  const LinearSystem& sys = inst.system;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SimTrace trace;
  trace.horizon = T;
  Eigen::VectorXd x = inst.x0;
  double b = inst.alpha;
  for (int k = 0; k < T; ++k) {
    ProblemInstance stage{sys, x, std::max(b, 1e-12)};
    const SteadyStateSolution ss = solve_steady_lmi(stage);
    const Eigen::VectorXd u = ss.K_bar * x;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(sys.q());
    if (b > 1e-12) {
      if (policy == DisturbancePolicy::WorstCase) {
        const StageGains g = gains(ss.Pi_bar, ss.lambda_bar, sys);
        w = -(g.J * x);
        const double energy = w.squaredNorm();
        if (energy > b) w *= std::sqrt(b / energy);
      } else if (policy == DisturbancePolicy::Random) {
        Eigen::VectorXd dir(sys.q());
        for (int i = 0; i < sys.q(); ++i) dir(i) = normal(rng);
        const double norm = dir.norm();
        if (norm > 0.0) {
          w = dir * (std::sqrt(b / static_cast<double>(T - k)) / norm);
        }
      }
    }

    trace.x.push_back(x);
    trace.u.push_back(u);
    trace.w.push_back(w);
    trace.K.push_back(ss.K_bar);
    trace.budget.push_back(b);
    trace.lambda.push_back(ss.lambda_bar);

    x = sys.A * x + sys.B * u + sys.G * w;
    b -= w.squaredNorm();
    if (b < 0.0) b = 0.0;
  }
  trace.x.push_back(x);  // terminal state, so x has T + 1 entries
  return trace;
}

BenchResult bench_complexity(const std::vector<int>& dims, int samples_per_dim,
                             std::uint64_t seed) {
  for (std::size_t i = 1; i < dims.size(); ++i) {
    if (dims[i] <= dims[i - 1]) {
      throw std::invalid_argument("dims must be sorted ascending");
    }
  }
  BenchResult result;
  for (int n : dims) {
    if (n < 2) throw std::invalid_argument("bench dims must be at least 2");
    std::vector<double> times;
    for (int s = 0; s < samples_per_dim; ++s) {
      const std::uint64_t sample_seed =
          seed + 1000003ULL * static_cast<std::uint64_t>(n) +
          static_cast<std::uint64_t>(s);
      const LinearSystem sys = random_stable_system(n, sample_seed);
      ProblemInstance inst{sys, Eigen::VectorXd::Zero(n), 1.0};
      const auto start = std::chrono::steady_clock::now();
      const SteadyStateSolution sol = solve_steady_lmi(inst);
      const auto stop = std::chrono::steady_clock::now();
      (void)sol;
      const double secs =
          std::chrono::duration<double>(stop - start).count();
      times.push_back(secs);
      result.rows.push_back(BenchRow{n, s, secs});
    }
    std::sort(times.begin(), times.end());
    const std::size_t h = times.size() / 2;
    const double median = times.size() % 2 == 1
                              ? times[h]
                              : 0.5 * (times[h - 1] + times[h]);
    result.medians.emplace_back(n, median);
  }

  if (result.medians.size() >= 2) {
    const std::size_t start = result.medians.size() / 2;
    const std::size_t count = result.medians.size() - start;
    if (count >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = start; i < result.medians.size(); ++i) {
        const double lx = std::log(static_cast<double>(result.medians[i].first));
        const double ly = std::log(std::max(result.medians[i].second, 1e-12));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      const double c = static_cast<double>(count);
      result.slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
    }
  }
  return result;
}

}  // namespace sidar
