#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sidar/analysis.hpp"
#include "sidar/figures.hpp"
#include "sidar/model.hpp"
#include "sidar/steady_state.hpp"

using namespace sidar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ProblemInstance reference_system(int i) {
  return load_system(
      sidar_test::data_file("system" + std::to_string(i) + ".json"));
}

double scalar_boundary(const Ellipsoid& e) {
  return std::sqrt(e.radius_sq / e.shape(0, 0));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("two-stage linear region of the scalar benchmark") {
  const ProblemInstance inst = reference_system(1);
  const Ellipsoid e = region_linear(inst, 2);
  // Derived by hand from the stacked worst-case map at the feasibility
  // bound: the N = 2 region is exactly [-1, 1].
  CHECK(scalar_boundary(e) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(e.contains(VectorXd::Constant(1, 0.99)));
  CHECK_FALSE(e.contains(VectorXd::Constant(1, 1.01)));
}

TEST_CASE("linear region boundary converges as the horizon grows") {
  const ProblemInstance inst = reference_system(1);
  // N = 1 leaves the region unbounded (no disturbance response yet); from
  // N = 2 the boundary settles at +-sqrt(3): the worst-case energy
  // ||Jtilde x||^2 at the feasibility bound tends to x^2 / 3 here.
  CHECK(scalar_boundary(region_linear(inst, 1)) > 1e6);
  double last = 0.0;
  for (int N = 2; N <= 200; N = (N < 20 ? N + 1 : N * 2)) {
    last = scalar_boundary(region_linear(inst, N));
  }
  CHECK(last == doctest::Approx(std::sqrt(3.0)).epsilon(1e-3));
}

TEST_CASE("region scales with the disturbance budget") {
  const ProblemInstance base = reference_system(1);
  const ProblemInstance wide = make_instance(base.system, base.x0, 4.0);
  const Ellipsoid e1 = region_linear(base, 3);
  const Ellipsoid e4 = region_linear(wide, 3);
  // x enters as x / sqrt(alpha): quadrupling alpha doubles the boundary.
  CHECK(scalar_boundary(e4) ==
        doctest::Approx(2.0 * scalar_boundary(e1)).epsilon(1e-9));
}

TEST_CASE("region membership for the truncated intersection") {
  const ProblemInstance inst = reference_system(1);
  const RegionLimit lim = region_limit_membership(inst, 60);
  CHECK(lim.contains(VectorXd::Zero(1)));
  // The two-stage ellipsoid [-1, 1] dominates the intersection here.
  CHECK(lim.contains(VectorXd::Constant(1, 0.9)));
  CHECK_FALSE(lim.contains(VectorXd::Constant(1, 1.1)));
  // Never larger than any single horizon it intersects over.
  const Ellipsoid e60 = region_linear(inst, 60);
  CHECK((!lim.contains(VectorXd::Constant(1, 1.7)) ||
         scalar_boundary(e60) >= 1.7));
}

TEST_CASE("uncontrolled system has a degenerate region") {
  // System 3 cannot steer: only a neighborhood of the origin admits the
  // boundary multiplier. The region stays bounded and shrinks.
  const ProblemInstance inst = reference_system(3);
  const Ellipsoid e = region_linear(inst, 40);
  CHECK(scalar_boundary(e) < 1.0);
  CHECK(e.contains(VectorXd::Zero(1)));
}

TEST_CASE("multiplier converges to the boundary value from the origin") {
  // At x0 = 0 the objective reduces to lambda / 2, so the limit is the
  // steady boundary value 2 of the nondegenerate benchmark.
  const ProblemInstance inst = reference_system(1);  // x0 = 0
  const std::vector<SweepRow> rows = convergence_sweep(inst, {2, 10, 100});
  CHECK(std::abs(rows.back().lambda_star - 2.0) <= 1e-4);
  CHECK(rows.back().pi_deviation <= 1e-4);
}

TEST_CASE("convergence sweep approaches the steady multiplier") {
  // The steady objective carries the x0 / sqrt(alpha) term, so the large-N
  // limit of lambda*(N) is the x0-matched steady optimum, not the boundary
  // value 2 seen at x0 = 0. The scan route gives the reference directly.
  const ProblemInstance inst =
      make_instance(reference_system(1).system, VectorXd::Constant(1, 2.0), 1.0);
  const SteadyStateSolution ref = solve_steady_scan(inst);
  CHECK(ref.lambda_bar == doctest::Approx(2.1746006).epsilon(1e-6));
  std::vector<int> Ns;
  for (int N = 2; N <= 100; N += 7) Ns.push_back(N);
  Ns.push_back(100);
  const std::vector<SweepRow> rows = convergence_sweep(inst, Ns);
  REQUIRE(rows.size() == Ns.size());
  double prev = 0.0;
  for (const SweepRow& r : rows) {
    CHECK(r.lambda_star >= prev - 1e-9);
    prev = r.lambda_star;
  }
  CHECK(std::abs(rows.back().lambda_star - ref.lambda_bar) <= 1e-5);
  CHECK(rows.back().pi_deviation <= 1e-4);
}

TEST_CASE("degenerate system multiplier converges from below") {
  // Same x0 dependence as above: the x0 = 2 limit sits above the x0 = 0
  // steady value 4/9 because the Pi term now enters the objective.
  const ProblemInstance inst =
      make_instance(reference_system(2).system, VectorXd::Constant(1, 2.0), 1.0);
  const SteadyStateSolution ref = solve_steady_scan(inst);
  const std::vector<SweepRow> rows = convergence_sweep(inst, {50, 150, 250});
  CHECK(std::abs(rows.back().lambda_star - ref.lambda_bar) <= 1e-5);
  CHECK(rows.back().lambda_star > 4.0 / 9.0);
}

TEST_CASE("turnpike plateau for the degenerate system") {
  const ProblemInstance inst = reference_system(2);  // x0 = 0
  const TurnpikeProfile p250 = turnpike_profile(inst, 250, 1e-2);
  CHECK(p250.plateau_fraction >= 0.6);
  const TurnpikeProfile p100 = turnpike_profile(inst, 100, 1e-2);
  CHECK(p250.plateau_end - p250.plateau_start >
        p100.plateau_end - p100.plateau_start);
  // The plateau sits strictly inside the horizon: boundary layers exist.
  CHECK(p250.plateau_start > 0);
  CHECK(p250.plateau_end < 250);
}

TEST_CASE("nondegenerate system plateaus at the fixed point") {
  const ProblemInstance inst = reference_system(1);
  const TurnpikeProfile p = turnpike_profile(inst, 100, 1e-2);
  CHECK(p.fixed_point_exists);
  CHECK(p.plateau_fraction >= 0.9);
  CHECK(std::abs(p.plateau_value(0, 0) - 2.0) <= 1e-2);
}

TEST_CASE("receding-horizon simulation invariants") {
  for (const DisturbancePolicy pol :
       {DisturbancePolicy::WorstCase, DisturbancePolicy::Random,
        DisturbancePolicy::Zero}) {
    ProblemInstance inst = reference_system(1);
    inst.x0 = VectorXd::Constant(1, 0.5);
    const SimTrace tr = simulate_receding(inst, 30, pol, 7);
    REQUIRE(tr.horizon == 30);
    REQUIRE(tr.x.size() == 31);
    REQUIRE(tr.u.size() == 30);
    REQUIRE(tr.w.size() == 30);
    double spent = 0.0;
    for (int k = 0; k < 30; ++k) {
      // Dynamics hold exactly along the stored trace.
      const VectorXd next = inst.system.A * tr.x[k] + inst.system.B * tr.u[k] +
                            inst.system.G * tr.w[k];
      CHECK((tr.x[k + 1] - next).norm() <= 1e-12);
      spent += tr.w[k].squaredNorm();
      // Remaining budget is consistent and never negative.
      CHECK(tr.budget[k] >= -1e-12);
      CHECK(tr.budget[k] <= inst.alpha + 1e-12);
    }
    CHECK(spent <= inst.alpha + 1e-9);
    if (pol == DisturbancePolicy::Zero) CHECK(spent == 0.0);
  }
}

TEST_CASE("figure CSVs rewrite byte-identically") {
  const ProblemInstance inst =
      make_instance(reference_system(1).system, VectorXd::Constant(1, 1.0), 1.0);
  const std::string a = "/tmp/sidar_fig_a.csv";
  const std::string b = "/tmp/sidar_fig_b.csv";
  write_regions_csv(a, inst, {1, 2, 5});
  write_regions_csv(b, inst, {1, 2, 5});
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
  write_lambda_sweep_csv(a, inst, {2, 5, 10});
  write_lambda_sweep_csv(b, inst, {2, 5, 10});
  CHECK(slurp(a) == slurp(b));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("bench handles a short dimension list") {
  const BenchResult r = bench_complexity({2, 3}, 1, 9);
  CHECK(r.rows.size() == 2);
  REQUIRE(r.medians.size() == 2);
  CHECK(r.medians[0].second > 0.0);
  // The fit runs over the upper half of the dimension list; two dims leave
  // a single point, so no slope is reported.
  CHECK_FALSE(r.slope.has_value());
  const BenchResult r4 = bench_complexity({2, 3, 4, 5}, 1, 9);
  CHECK(r4.slope.has_value());
  CHECK_THROWS(bench_complexity({3, 2}, 1, 9));
}
