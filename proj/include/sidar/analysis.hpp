#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sidar/lambda_opt.hpp"
#include "sidar/model.hpp"

namespace sidar {

// {x : x' shape x <= radius_sq}
struct Ellipsoid {
  Eigen::MatrixXd shape;
  double radius_sq = 1.0;

  bool contains(const Eigen::VectorXd& x) const {
    return x.dot(shape * x) <= radius_sq;
  }
};

// Linear-policy region X_L(alpha, N) as an ellipsoid in x (not x/sqrt(alpha)).
Ellipsoid region_linear(const ProblemInstance& inst, int N);

struct RegionLimit {
  std::vector<Eigen::MatrixXd> shapes;  // shapes[i] for horizon i+1
  double alpha = 1.0;
  Ellipsoid outer;  // the N_max ellipsoid (superset of the true limit)

  bool contains(const Eigen::VectorXd& x) const {
    for (const auto& E : shapes) {
      if (x.dot(E * x) > alpha) return false;
    }
    return true;
  }
};

// Truncated intersection of X_L(alpha, N) over N = 1..N_max; a superset of
// the true infinite intersection.
RegionLimit region_limit_membership(const ProblemInstance& inst, int N_max);

struct SweepRow {
  int N = 0;
  double lambda_star = 0.0;
  double pi_deviation = 0.0;
  double lambda_deviation = 0.0;
  Region region = Region::Linear;
};

std::vector<SweepRow> convergence_sweep(const ProblemInstance& inst,
                                        const std::vector<int>& N_list);

struct TurnpikeProfile {
  Eigen::MatrixXd plateau_value;
  int plateau_start = 0;
  int plateau_end = 0;
  double plateau_fraction = 0.0;
  int entry_layer = 0;
  int exit_layer = 0;
  double epsilon_used = 0.0;
  bool fixed_point_exists = false;  // false: plateau estimated mid-horizon
};

TurnpikeProfile turnpike_profile(const ProblemInstance& inst, int N,
                                 double epsilon = 1e-6);

enum class DisturbancePolicy { WorstCase, Random, Zero };

struct SimTrace {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> w;
  std::vector<Eigen::MatrixXd> K;
  std::vector<double> budget;
  std::vector<double> lambda;
  int horizon = 0;
};

SimTrace simulate_receding(const ProblemInstance& inst, int T,
                           DisturbancePolicy policy, std::uint64_t seed);

struct BenchRow {
  int n = 0;
  int sample = 0;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<std::pair<int, double>> medians;
  std::optional<double> slope;  // log-log fit over the upper half of dims
};

BenchResult bench_complexity(const std::vector<int>& dims, int samples_per_dim,
                             std::uint64_t seed);

}  // namespace sidar
