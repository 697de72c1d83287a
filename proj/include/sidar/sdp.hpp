#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sidar {

// Linear SDP: minimize c'x subject to S_j(x) = C_j + sum_i x_i A_ji >= 0.
//
// Coefficient matrices are stored as sums of symmetrized rank-2 terms
// scale * (w_u w_v' + w_v w_u') over a per-block pool of vectors. Gradients
// and Hessians of the log-det barrier then reduce to entries of the Gram
// matrix W' S^{-1} W, which keeps the cost per Newton step low even when the
// number of scalar variables is large. Dense coefficient matrices can be
// added through their eigendecomposition.
struct SdpProblem {
  struct Pair {
    int var;
    int u;
    int v;
    double scale;
  };

  struct Block {
    int dim = 0;
    Eigen::MatrixXd constant;
    std::vector<Eigen::VectorXd> pool;
    std::vector<Pair> pairs;
  };

  int num_scalars = 0;
  Eigen::VectorXd objective;
  std::vector<Block> blocks;

  int add_block(int dim, const Eigen::MatrixXd& constant);
  int add_pool_vector(int block, const Eigen::VectorXd& w);
  // Adds scale * (w_u w_v' + w_v w_u') to the coefficient of variable var.
  void add_pair(int block, int var, int u, int v, double scale = 1.0);
  void add_coeff_dense(int block, int var, const Eigen::MatrixXd& A);

  Eigen::MatrixXd block_value(int block, const Eigen::VectorXd& x) const;
};

enum class SdpStatus { Optimal, MaxIter, Infeasible };

struct SdpSolution {
  Eigen::VectorXd x;
  double objective_value = 0.0;
  double duality_gap = 0.0;
  double primal_residual = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::MaxIter;
};

struct SdpOptions {
  double t0 = 1.0;
  double mu = 10.0;
  double gap_tol = 1e-9;
  int max_newton = 500;
  int max_stage_newton = 16;  // centering budget per path parameter
  double armijo = 0.01;
  double backtrack = 0.5;
  double centering_tol = 0.01;  // threshold on the squared Newton decrement
  int dense_threshold = 700;    // above this many scalars, use matrix-free PCG
};

SdpSolution solve_sdp(const SdpProblem& prob,
                      const std::optional<Eigen::VectorXd>& init = std::nullopt,
                      const SdpOptions& opts = {});

struct SdpDiagnostics {
  double objective_value = 0.0;
  double primal_residual = 0.0;
  std::vector<double> block_eigmins;
};

SdpDiagnostics check_solution(const SdpProblem& prob, const SdpSolution& sol);

}  // namespace sidar
