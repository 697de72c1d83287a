#pragma once

#include "sidar/model.hpp"
#include "sidar/sdp.hpp"

namespace sidar {

enum class SteadyMethod { LMI, Scan };

struct SteadyStateSolution {
  double lambda_bar = 0.0;
  double chi = 0.0;
  Eigen::MatrixXd P;
  Eigen::MatrixXd F;
  Eigen::MatrixXd Pi_bar;
  Eigen::MatrixXd K_bar;  // policy u = K_bar x
  double slack = 0.0;
  double g_residual_norm = 0.0;
  SteadyMethod method = SteadyMethod::LMI;
  SdpSolution sdp;
  std::vector<std::string> warnings;
};

enum class SystemKind { Nondegenerate, Degenerate };

struct Classification {
  SystemKind kind = SystemKind::Nondegenerate;
  double slack_at_origin = 0.0;
  double tolerance_used = 0.0;
};

// Variable layout of the assembled SDP: x = (lambda, chi, vech(P), vec(F))
// with sqrt(2) scaling on the off-diagonal entries of P.
struct LmiAssembly {
  SdpProblem problem;
  Eigen::VectorXd init;
  int n = 0;
  int m = 0;

  int lambda_index() const { return 0; }
  int chi_index() const { return 1; }
  Eigen::MatrixXd decode_P(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd decode_F(const Eigen::VectorXd& x) const;
};

LmiAssembly assemble_lmi(const ProblemInstance& inst);

SteadyStateSolution solve_steady_lmi(const ProblemInstance& inst);

// g(lambda, Pi): the Riccati map minus Pi; zero exactly at a fixed point.
Eigen::MatrixXd g_residual(double lambda, const Eigen::MatrixXd& Pi,
                           const LinearSystem& sys);

// Minimal fixed point by monotone iteration from P_f.
Eigen::MatrixXd riccati_fixed_point(double lambda, const LinearSystem& sys);

SteadyStateSolution solve_steady_scan(const ProblemInstance& inst);

Classification classify(const LinearSystem& sys, double alpha);

// Infimal lambda for which the steady Riccati fixed point exists with
// lambda >= ||G'PiG||; the H-infinity feasibility boundary (lambda = gamma^2).
double hinf_gamma_oracle(const LinearSystem& sys);

// Gain with rho(A - BK) < 1 from a unit-weight Riccati iteration.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B);

}  // namespace sidar
