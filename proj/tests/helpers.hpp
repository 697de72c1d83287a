#pragma once

// Shared helpers for the unit suites and the acceptance gate: random
// problem generators and the appendix equivalence checks.

#include <cstdlib>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "sidar/model.hpp"
#include "sidar/riccati.hpp"

namespace sidar_test {

inline std::string data_dir() {
  const char* env = std::getenv("SIDAR_DATA_DIR");
  return env != nullptr ? std::string(env) : std::string("data");
}

inline std::string data_file(const std::string& name) {
  return data_dir() + "/" + name;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols,
                                     double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = unif(rng);
  }
  return M;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n,
                                  double ridge = 0.1) {
  const Eigen::MatrixXd M = random_matrix(rng, n, n);
  return M * M.transpose() + ridge * Eigen::MatrixXd::Identity(n, n);
}

// Random system with all weights PD and A scaled to a subunit spectral
// radius; suitable for the appendix draws and invariance properties.
inline sidar::LinearSystem random_system(std::mt19937_64& rng, int n, int m,
                                         int q, double rho = 0.8) {
  Eigen::MatrixXd A = random_matrix(rng, n, n);
  const double r = sidar::spectral_radius(A);
  if (r > 1e-12) A *= rho / r;
  return sidar::make_system(A, random_matrix(rng, n, m),
                            random_matrix(rng, n, q), random_spd(rng, n),
                            random_spd(rng, m), random_spd(rng, n));
}

inline double eigmin(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double eigmax(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// One draw of the two-form Riccati equality: the mixed-matrix step and the
// closed-loop rewrite must agree to relative 1e-9.
inline double lemma1_relative_gap(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> margin(0.1, 2.0);
  const int n = dim(rng);
  const sidar::LinearSystem sys = random_system(rng, n, dim(rng), dim(rng));
  const Eigen::MatrixXd Pi = random_spd(rng, n, 0.05);
  const double lambda =
      eigmax(sys.G.transpose() * Pi * sys.G) + margin(rng);
  const Eigen::MatrixXd direct = sidar::riccati_step(Pi, lambda, sys);
  const Eigen::MatrixXd closed = sidar::closed_loop_form(Pi, lambda, sys);
  return (direct - closed).norm() / std::max(1.0, direct.norm());
}

// Assembles the 4x4-block synthesis LMI for a given (sys, Pi, K, lambda)
// with P = Pi^{-1} and F = -K P. Independent of the SDP assembly path.
inline Eigen::MatrixXd synthesis_lmi_matrix(const sidar::LinearSystem& sys,
                                            const Eigen::MatrixXd& Pi,
                                            const Eigen::MatrixXd& K,
                                            double lambda) {
  const int n = sys.n();
  const int m = sys.m();
  const int q = sys.q();
  const Eigen::MatrixXd P = Pi.inverse();
  const Eigen::MatrixXd F = -K * P;
  const Eigen::MatrixXd Qh = sidar::psd_sqrt(sys.Q);
  const Eigen::MatrixXd Rh = sidar::psd_sqrt(sys.R);

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3 * n + q + m, 3 * n + q + m);
  const Eigen::MatrixXd APBF = sys.A * P - sys.B * F;  // (A + BK) P
  Eigen::MatrixXd CP(n + m, n);  // [Q^{1/2} P; R^{1/2} K P]
  CP.topRows(n) = Qh * P;
  CP.bottomRows(m) = -Rh * F;
  S.block(0, 0, n, n) = P;
  S.block(0, n, n, n) = APBF.transpose();
  S.block(n, 0, n, n) = APBF;
  S.block(n, n, n, n) = P;
  S.block(n, 2 * n, n, q) = sys.G;
  S.block(2 * n, n, q, n) = sys.G.transpose();
  S.block(2 * n, 2 * n, q, q) =
      lambda * Eigen::MatrixXd::Identity(q, q);
  S.block(0, 2 * n + q, n, n + m) = CP.transpose();
  S.block(2 * n + q, 0, n + m, n) = CP;
  S.block(2 * n + q, 2 * n + q, n + m, n + m) =
      Eigen::MatrixXd::Identity(n + m, n + m);
  return S;
}

// The 2x2-block Riccati inequality matrix whose positivity is equivalent to
// the synthesis LMI above.
inline Eigen::MatrixXd riccati_inequality_matrix(const sidar::LinearSystem& sys,
                                                 const Eigen::MatrixXd& Pi,
                                                 const Eigen::MatrixXd& K,
                                                 double lambda) {
  const int n = sys.n();
  const int q = sys.q();
  const Eigen::MatrixXd Abar = sys.A + sys.B * K;
  const Eigen::MatrixXd Qbar = sys.Q + K.transpose() * sys.R * K;
  Eigen::MatrixXd M(n + q, n + q);
  M.topLeftCorner(n, n) =
      Pi - Qbar - Abar.transpose() * Pi * Abar;
  M.topRightCorner(n, q) = -Abar.transpose() * Pi * sys.G;
  M.bottomLeftCorner(q, n) = M.topRightCorner(n, q).transpose();
  M.bottomRightCorner(q, q) =
      lambda * Eigen::MatrixXd::Identity(q, q) -
      sys.G.transpose() * Pi * sys.G;
  return 0.5 * (M + M.transpose());
}

struct EquivalenceStats {
  int draws = 0;
  int decisive = 0;
  int failures = 0;
};

// Equivalence of the synthesis LMI and the Riccati-inequality block, tested
// in both directions on random draws. Draws whose smallest eigenvalue sits
// inside the tolerance band on either side are not decisive.
inline EquivalenceStats lemma23_suite(int draws, std::uint64_t seed,
                                      double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> lam_scale(0.2, 3.0);
  EquivalenceStats stats;
  for (int d = 0; d < draws; ++d) {
    ++stats.draws;
    const int n = dim(rng);
    const sidar::LinearSystem sys = random_system(rng, n, dim(rng), dim(rng));
    const Eigen::MatrixXd Pi = random_spd(rng, n, 0.2);
    const Eigen::MatrixXd K = random_matrix(rng, sys.m(), n, 0.5);
    // lambda drawn around the disturbance-block boundary so both signs of
    // the inequality appear in the sample.
    const double lambda =
        lam_scale(rng) * std::max(1.0, eigmax(sys.G.transpose() * Pi * sys.G));
    const Eigen::MatrixXd S = synthesis_lmi_matrix(sys, Pi, K, lambda);
    const Eigen::MatrixXd Ric = riccati_inequality_matrix(sys, Pi, K, lambda);
    const double scale_s = std::max(1.0, S.norm());
    const double scale_r = std::max(1.0, Ric.norm());
    const double es = eigmin(S) / scale_s;
    const double er = eigmin(Ric) / scale_r;
    // The equivalence needs the (3,3) block regular: skip lambda too close
    // to the disturbance-block boundary.
    const double dist_block =
        eigmin(lambda * Eigen::MatrixXd::Identity(sys.q(), sys.q()) -
               sys.G.transpose() * Pi * sys.G);
    if (std::abs(dist_block) < 1e-6) continue;
    const double band = 1e-7;
    if (std::abs(es) < band || std::abs(er) < band) continue;
    ++stats.decisive;
    const bool lmi_psd = es > -tol;
    const bool ric_psd = er > -tol;
    const bool lmi_pd = es > tol;
    const bool ric_pd = er > tol;
    if (lmi_psd != ric_psd || lmi_pd != ric_pd) ++stats.failures;
  }
  return stats;
}

// Schur complement equivalence on random symmetric block matrices.
inline EquivalenceStats prop7_suite(int draws, std::uint64_t seed,
                                    double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> shift(-1.0, 2.0);
  EquivalenceStats stats;
  for (int d = 0; d < draws; ++d) {
    ++stats.draws;
    const int na = dim(rng);
    const int nc = dim(rng);
    Eigen::MatrixXd A = random_spd(rng, na, 0.0);
    A += shift(rng) * Eigen::MatrixXd::Identity(na, na);
    A = 0.5 * (A + A.transpose());
    Eigen::MatrixXd C = random_spd(rng, nc, 0.2);  // keep C invertible
    const Eigen::MatrixXd B = random_matrix(rng, na, nc);
    Eigen::MatrixXd M(na + nc, na + nc);
    M.topLeftCorner(na, na) = A;
    M.topRightCorner(na, nc) = B;
    M.bottomLeftCorner(nc, na) = B.transpose();
    M.bottomRightCorner(nc, nc) = C;
    const Eigen::MatrixXd Schur = A - B * C.inverse() * B.transpose();
    const double em = eigmin(M) / std::max(1.0, M.norm());
    const double ec = eigmin(C) / std::max(1.0, C.norm());
    const double es = eigmin(Schur) / std::max(1.0, Schur.norm());
    const double band = 1e-7;
    if (std::abs(em) < band || std::abs(es) < band || std::abs(ec) < band) {
      continue;
    }
    ++stats.decisive;
    const bool m_pd = em > tol;
    const bool split_pd = ec > tol && es > tol;
    const bool m_psd = em > -tol;
    const bool split_psd = ec > -tol && es > -tol;
    if (m_pd != split_pd || m_psd != split_psd) ++stats.failures;
  }
  return stats;
}

}  // namespace sidar_test
