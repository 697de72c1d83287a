#pragma once

#include <vector>

#include "sidar/model.hpp"

namespace sidar {

// Backward trajectory of the lambda-parameterized recursion.
// pis[k] holds Pi_k for k = 0..N (pis[N] = P_f). Gains are indexed by stage,
// control_gains[k] = K_k with policy u_k = -K_k x_k, disturbance_gains[k] =
// J_k with unconstrained worst case w_k = -J_k x_k.
struct RiccatiTrajectory {
  double lambda = 0.0;
  double lambda_lo = 0.0;
  std::vector<Eigen::MatrixXd> pis;
  std::vector<Eigen::MatrixXd> control_gains;
  std::vector<Eigen::MatrixXd> disturbance_gains;
  std::vector<std::string> warnings;

  int horizon() const { return static_cast<int>(control_gains.size()); }
};

struct StageGains {
  Eigen::MatrixXd K;
  Eigen::MatrixXd J;
};

// [[B'PiB + R, B'PiG], [G'PiB, G'PiG - lambda I]]
Eigen::MatrixXd mixed_matrix(const Eigen::MatrixXd& Pi_next, double lambda,
                             const LinearSystem& sys);

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& Pi_next, double lambda,
                             const LinearSystem& sys,
                             std::vector<std::string>* warnings = nullptr);

// Solves M [K; J] = [B'PiA; G'PiA].
StageGains gains(const Eigen::MatrixXd& Pi_next, double lambda,
                 const LinearSystem& sys,
                 std::vector<std::string>* warnings = nullptr);

// Closed-loop rewrite: Qbar + Abar'PiAbar - Abar'PiG (G'PiG - lambda I)^+ G'PiAbar
// with Abar = A - BK and Qbar = Q + K'RK. Agrees with riccati_step.
Eigen::MatrixXd closed_loop_form(const Eigen::MatrixXd& Pi_next, double lambda,
                                 const LinearSystem& sys);

// Smallest lambda for which G'Pi_{k+1}(lambda)G - lambda I is negative
// semidefinite at every stage of the N-step recursion from P_f.
double lambda_lower_bound(const LinearSystem& sys, int N);

RiccatiTrajectory recursion_trajectory(double lambda, int N,
                                       const LinearSystem& sys);

// Variant with a precomputed feasibility bound, for callers that sweep many
// lambda values over the same horizon.
RiccatiTrajectory recursion_trajectory(double lambda, int N,
                                       const LinearSystem& sys,
                                       double lambda_lo);

// Stacked (N q) x n map from x0 to the worst-case disturbance sequence,
// block k = J_k Phi_k with Phi_0 = I, Phi_k = (A - B K_{k-1} - G J_{k-1}) Phi_{k-1}.
Eigen::MatrixXd jtilde(double lambda, int N, const LinearSystem& sys);
Eigen::MatrixXd jtilde(const RiccatiTrajectory& traj, const LinearSystem& sys);

}  // namespace sidar
