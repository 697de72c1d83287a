#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sidar/lambda_opt.hpp"
#include "sidar/model.hpp"

using namespace sidar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ProblemInstance scalar_instance(double x0, double alpha) {
  auto m = [](double v) { return MatrixXd::Constant(1, 1, v); };
  const LinearSystem sys = make_system(m(1), m(1), m(1), m(1), m(1), m(0));
  return make_instance(sys, VectorXd::Constant(1, x0), alpha);
}

}  // namespace

TEST_CASE("closed-form two-stage solution") {
  const ProblemInstance inst = scalar_instance(2.0, 1.0);
  const FiniteHorizonSolution sol = solve_finite(inst, 2);
  CHECK(sol.lambda_star == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(sol.value == doctest::Approx(4.25).epsilon(1e-9));
  CHECK(sol.worst_energy == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.region == Region::Nonlinear);
  CHECK(sol.lambda_lo == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("derivative matches the analytic value") {
  const ProblemInstance inst = scalar_instance(2.0, 1.0);
  CHECK(derivative(2.0, inst, 2) ==
        doctest::Approx(5.0 / 18.0).epsilon(1e-10));
  // Nondecreasing in lambda.
  double prev = -1e300;
  for (double lam = 1.1; lam < 4.0; lam += 0.3) {
    const double d = derivative(lam, inst, 2);
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
}

TEST_CASE("objective is convex along lambda") {
  const ProblemInstance inst = scalar_instance(1.5, 1.0);
  const int N = 5;
  const double lo = 2.05;
  std::vector<double> vals;
  for (int i = 0; i <= 40; ++i) vals.push_back(objective(lo + 0.05 * i, inst, N));
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    CHECK(vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-10);
  }
}

TEST_CASE("origin solves at the feasibility bound") {
  const ProblemInstance inst = scalar_instance(0.0, 1.0);
  const FiniteHorizonSolution sol = solve_finite(inst, 4);
  CHECK(sol.lambda_star == doctest::Approx(sol.lambda_lo).epsilon(1e-9));
  CHECK(sol.region == Region::Linear);
  CHECK(sol.value == doctest::Approx(0.5 * sol.lambda_lo).epsilon(1e-9));
}

TEST_CASE("solution is invariant under the (x, alpha) scaling") {
  std::mt19937_64 rng(5);
  for (int d = 0; d < 10; ++d) {
    const LinearSystem sys = sidar_test::random_system(rng, 2, 1, 1);
    const VectorXd x0 = sidar_test::random_matrix(rng, 2, 1, 2.0);
    const double c = 3.0;
    const ProblemInstance a = make_instance(sys, x0, 1.0);
    const ProblemInstance b = make_instance(sys, c * x0, c * c);
    const FiniteHorizonSolution sa = solve_finite(a, 5);
    const FiniteHorizonSolution sb = solve_finite(b, 5);
    CHECK(sa.lambda_star ==
          doctest::Approx(sb.lambda_star).epsilon(1e-7));
    CHECK(sa.value == doctest::Approx(sb.value).epsilon(1e-7));
  }
}

TEST_CASE("lambda_star is nondecreasing in the horizon") {
  const ProblemInstance inst = scalar_instance(2.0, 1.0);
  double prev = 0.0;
  for (int N = 1; N <= 12; ++N) {
    const double lam = solve_finite(inst, N).lambda_star;
    CHECK(lam >= prev - 1e-9);
    prev = lam;
  }
}

TEST_CASE("dynamic-programming oracle agrees on short horizons") {
  const ProblemInstance inst = scalar_instance(2.0, 1.0);
  const double dp = dp_oracle(inst, 2);
  CHECK(dp == doctest::Approx(4.25).epsilon(0.05 / 4.25));
  const ProblemInstance origin = scalar_instance(0.0, 1.0);
  const double dp0 = dp_oracle(origin, 2);
  const double direct0 = solve_finite(origin, 2).value;
  CHECK(std::abs(dp0 - direct0) <= 0.05);
}

TEST_CASE("one-stage solve uses the terminal bound") {
  auto m = [](double v) { return MatrixXd::Constant(1, 1, v); };
  const LinearSystem sys = make_system(m(1), m(1), m(1), m(1), m(1), m(0.7));
  const ProblemInstance inst = make_instance(sys, VectorXd::Zero(1), 1.0);
  const FiniteHorizonSolution sol = solve_finite(inst, 1);
  // lambda*(1) = ||G' P_f G|| at the origin.
  CHECK(sol.lambda_star == doctest::Approx(0.7).epsilon(1e-8));
}
