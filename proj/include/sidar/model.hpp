#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sidar {

// Plant x+ = Ax + Bu + Gw with stage cost (1/2) x'Qx + (1/2) u'Ru and
// terminal cost (1/2) x'P_f x. Immutable after construction.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd G;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P_f;
  std::string name;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int q() const { return static_cast<int>(G.cols()); }
};

// Checks dimensions, finiteness and symmetry of the weights. Asymmetry above
// 1e-12 relative is averaged away and reported through `warnings`.
LinearSystem make_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& G, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P_f,
                         const std::string& name = "",
                         std::vector<std::string>* warnings = nullptr);

struct ProblemInstance {
  LinearSystem system;
  Eigen::VectorXd x0;
  double alpha = 1.0;
};

ProblemInstance make_instance(const LinearSystem& sys, const Eigen::VectorXd& x0,
                              double alpha);

struct ValidationReport {
  bool stabilizable = false;
  bool detectable = false;
  bool range_inclusion = false;
  bool terminal_coupling = false;
  bool q_pd = false;
  bool pf_pd = false;
  std::vector<std::string> messages;

  bool all_ok() const {
    return stabilizable && detectable && range_inclusion && terminal_coupling &&
           q_pd && pf_pd;
  }
};

ValidationReport validate(const LinearSystem& sys);

ProblemInstance load_system(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);
void save_system(const ProblemInstance& inst, const std::string& path);

// Random A rescaled to spectral radius 0.9, B = G = Q = R = P_f = I.
// Resamples (derived seed) until the steady-state classification is
// nondegenerate; throws after 50 attempts.
LinearSystem random_stable_system(int n, std::uint64_t seed);

// Symmetric square root with negative eigenvalues clamped at zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

double spectral_radius(const Eigen::MatrixXd& A);

}  // namespace sidar
