#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sidar/sdp.hpp"

using namespace sidar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("scalar bound constraint") {
  // minimize x subject to x - 1 >= 0.
  SdpProblem prob;
  prob.num_scalars = 1;
  prob.objective = VectorXd::Ones(1);
  const int b = prob.add_block(1, MatrixXd::Constant(1, 1, -1.0));
  prob.add_coeff_dense(b, 0, MatrixXd::Identity(1, 1));
  const SdpSolution sol = solve_sdp(prob);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x(0) >= 1.0 - 1e-12);  // strictly feasible path
  CHECK(sol.duality_gap <= 1e-8);
}

TEST_CASE("two diagonal bounds") {
  // minimize x + y subject to diag(x - 1, y - 2) >= 0.
  SdpProblem prob;
  prob.num_scalars = 2;
  prob.objective = VectorXd::Ones(2);
  MatrixXd C = MatrixXd::Zero(2, 2);
  C(0, 0) = -1.0;
  C(1, 1) = -2.0;
  const int b = prob.add_block(2, C);
  const int e0 = prob.add_pool_vector(b, VectorXd::Unit(2, 0));
  const int e1 = prob.add_pool_vector(b, VectorXd::Unit(2, 1));
  prob.add_pair(b, 0, e0, e0, 0.5);
  prob.add_pair(b, 1, e1, e1, 0.5);
  const SdpSolution sol = solve_sdp(prob);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.x(1) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("largest eigenvalue as an SDP") {
  // minimize t subject to t I - A >= 0: optimum is eigmax(A).
  std::mt19937_64 rng(11);
  for (int d = 0; d < 5; ++d) {
    const MatrixXd A = sidar_test::random_spd(rng, 4, 0.0);
    SdpProblem prob;
    prob.num_scalars = 1;
    prob.objective = VectorXd::Ones(1);
    const int b = prob.add_block(4, -A);
    prob.add_coeff_dense(b, 0, MatrixXd::Identity(4, 4));
    const SdpSolution sol = solve_sdp(prob);
    CHECK(sol.status == SdpStatus::Optimal);
    CHECK(sol.x(0) ==
          doctest::Approx(sidar_test::eigmax(A)).epsilon(1e-6));
  }
}

TEST_CASE("infeasible problem reported through phase one") {
  // x >= 0 and -x - 1 >= 0 cannot hold together.
  SdpProblem prob;
  prob.num_scalars = 1;
  prob.objective = VectorXd::Ones(1);
  const int b0 = prob.add_block(1, MatrixXd::Zero(1, 1));
  prob.add_coeff_dense(b0, 0, MatrixXd::Identity(1, 1));
  const int b1 = prob.add_block(1, MatrixXd::Constant(1, 1, -1.0));
  prob.add_coeff_dense(b1, 0, -MatrixXd::Identity(1, 1));
  const SdpSolution sol = solve_sdp(prob);
  CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("pair encoding matches the dense coefficient route") {
  // The same random SDP assembled twice: once with rank-2 pool pairs, once
  // through add_coeff_dense. Identical solutions expected.
  std::mt19937_64 rng(7);
  const int n = 3;
  const MatrixXd C = sidar_test::random_spd(rng, n, 0.5);
  const VectorXd u = sidar_test::random_matrix(rng, n, 1);
  const VectorXd v = sidar_test::random_matrix(rng, n, 1);
  const MatrixXd A0 = u * v.transpose() + v * u.transpose();

  SdpProblem via_pairs;
  via_pairs.num_scalars = 1;
  via_pairs.objective = VectorXd::Ones(1);
  int b = via_pairs.add_block(n, C);
  const int iu = via_pairs.add_pool_vector(b, u);
  const int iv = via_pairs.add_pool_vector(b, v);
  via_pairs.add_pair(b, 0, iu, iv, 1.0);

  SdpProblem via_dense;
  via_dense.num_scalars = 1;
  via_dense.objective = VectorXd::Ones(1);
  b = via_dense.add_block(n, C);
  via_dense.add_coeff_dense(b, 0, A0);

  const VectorXd x = VectorXd::Constant(1, 0.3);
  CHECK((via_pairs.block_value(0, x) - via_dense.block_value(0, x)).norm() <=
        1e-12);
  const SdpSolution sp = solve_sdp(via_pairs);
  const SdpSolution sd = solve_sdp(via_dense);
  CHECK(sp.status == SdpStatus::Optimal);
  CHECK(sp.objective_value ==
        doctest::Approx(sd.objective_value).epsilon(1e-6));
}

TEST_CASE("check_solution reports feasibility of the returned point") {
  SdpProblem prob;
  prob.num_scalars = 1;
  prob.objective = VectorXd::Ones(1);
  const int b = prob.add_block(1, MatrixXd::Constant(1, 1, -1.0));
  prob.add_coeff_dense(b, 0, MatrixXd::Identity(1, 1));
  const SdpSolution sol = solve_sdp(prob);
  const SdpDiagnostics diag = check_solution(prob, sol);
  CHECK(diag.objective_value == doctest::Approx(sol.objective_value));
  CHECK(diag.block_eigmins.size() == 1);
  CHECK(diag.block_eigmins[0] >= -1e-12);
}

TEST_CASE("warm start skips phase one and reaches the same optimum") {
  SdpProblem prob;
  prob.num_scalars = 1;
  prob.objective = VectorXd::Ones(1);
  const int b = prob.add_block(1, MatrixXd::Constant(1, 1, -1.0));
  prob.add_coeff_dense(b, 0, MatrixXd::Identity(1, 1));
  const SdpSolution cold = solve_sdp(prob);
  const SdpSolution warm = solve_sdp(prob, VectorXd::Constant(1, 5.0));
  CHECK(warm.status == SdpStatus::Optimal);
  CHECK(warm.x(0) == doctest::Approx(cold.x(0)).epsilon(1e-6));
}
