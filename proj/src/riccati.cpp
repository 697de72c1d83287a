#include "sidar/riccati.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sidar {

namespace {

double eigmax_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double eigmin_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_disturbance_block(const Eigen::MatrixXd& Pi_next, double lambda,
                             const LinearSystem& sys) {
  const Eigen::MatrixXd D = sys.G.transpose() * Pi_next * sys.G -
                            lambda * Eigen::MatrixXd::Identity(sys.q(), sys.q());
  const double tol = 1e-9 * std::max({1.0, std::abs(lambda), Pi_next.norm()});
  if (eigmax_sym(0.5 * (D + D.transpose())) > tol) {
    throw std::runtime_error(
        "disturbance block G'PiG - lambda I is not negative semidefinite "
        "(lambda below the feasibility bound)");
  }
}

struct MixedSolve {
  Eigen::MatrixXd M;
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  bool full_rank = true;
  Eigen::MatrixXd pinv;  // used only when rank deficient

  // At the feasibility boundary M is singular but the gain equations stay
  // consistent; the minimum-norm solution is the right limit there. An
  // inconsistent right-hand side means the gains do not exist at all.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    if (full_rank) return lu.solve(rhs);
    Eigen::MatrixXd z = pinv * rhs;
    if ((M * z - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm())) {
      throw std::runtime_error(
          "mixed matrix system is inconsistent (stage gains undefined)");
    }
    return z;
  }
};

MixedSolve factor_mixed(const Eigen::MatrixXd& Pi_next, double lambda,
                        const LinearSystem& sys,
                        std::vector<std::string>* warnings) {
  MixedSolve ms;
  ms.M = mixed_matrix(Pi_next, lambda, sys);
  ms.lu.compute(ms.M);
  const Eigen::VectorXd piv = ms.lu.matrixLU().diagonal().cwiseAbs();
  const double pmax = piv.maxCoeff();
  const double pmin = piv.minCoeff();
  if (!(pmin > 1e-14 * pmax) || pmax == 0.0) {
    ms.full_rank = false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ms.M);
    const double cutoff = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff() *
                          static_cast<double>(ms.M.rows());
    Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(ms.M.rows());
    for (int i = 0; i < ms.M.rows(); ++i) {
      if (std::abs(es.eigenvalues()(i)) > cutoff) {
        inv_ev(i) = 1.0 / es.eigenvalues()(i);
      }
    }
    ms.pinv = es.eigenvectors() * inv_ev.asDiagonal() *
              es.eigenvectors().transpose();
    if (warnings != nullptr) {
      warnings->push_back(
          "mixed matrix M singular: solving through the pseudo-inverse");
    }
  } else if (pmin <= 1e-12 * pmax && warnings != nullptr) {
    warnings->push_back("mixed matrix M nearly singular (pivot ratio " +
                        std::to_string(pmin / pmax) + ")");
  }
  return ms;
}

}  // namespace

Eigen::MatrixXd mixed_matrix(const Eigen::MatrixXd& Pi_next, double lambda,
                             const LinearSystem& sys) {
  const int m = sys.m();
  const int q = sys.q();
  Eigen::MatrixXd M(m + q, m + q);
  const Eigen::MatrixXd PB = Pi_next * sys.B;
  const Eigen::MatrixXd PG = Pi_next * sys.G;
  M.topLeftCorner(m, m) = sys.B.transpose() * PB + sys.R;
  M.topRightCorner(m, q) = sys.B.transpose() * PG;
  M.bottomLeftCorner(q, m) = M.topRightCorner(m, q).transpose();
  M.bottomRightCorner(q, q) =
      sys.G.transpose() * PG - lambda * Eigen::MatrixXd::Identity(q, q);
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& Pi_next, double lambda,
                             const LinearSystem& sys,
                             std::vector<std::string>* warnings) {
  check_disturbance_block(Pi_next, lambda, sys);
  MixedSolve ms = factor_mixed(Pi_next, lambda, sys, warnings);

  const int n = sys.n();
  Eigen::MatrixXd BGtPA(sys.m() + sys.q(), n);
  const Eigen::MatrixXd PA = Pi_next * sys.A;
  BGtPA.topRows(sys.m()) = sys.B.transpose() * PA;
  BGtPA.bottomRows(sys.q()) = sys.G.transpose() * PA;

  Eigen::MatrixXd Pi = sys.Q + sys.A.transpose() * PA -
                       BGtPA.transpose() * ms.solve(BGtPA);
  Pi = 0.5 * (Pi + Pi.transpose());
  if (warnings != nullptr) {
    const double emin = eigmin_sym(Pi);
    if (emin < -1e-9 * std::max(1.0, Pi.norm())) {
      warnings->push_back("Riccati step produced an indefinite matrix (eigmin=" +
                          std::to_string(emin) + ")");
    }
  }
  return Pi;
}

StageGains gains(const Eigen::MatrixXd& Pi_next, double lambda,
                 const LinearSystem& sys, std::vector<std::string>* warnings) {
  MixedSolve ms = factor_mixed(Pi_next, lambda, sys, warnings);
  const Eigen::MatrixXd PA = Pi_next * sys.A;
  Eigen::MatrixXd rhs(sys.m() + sys.q(), sys.n());
  rhs.topRows(sys.m()) = sys.B.transpose() * PA;
  rhs.bottomRows(sys.q()) = sys.G.transpose() * PA;
  const Eigen::MatrixXd KJ = ms.solve(rhs);
  StageGains g;
  g.K = KJ.topRows(sys.m());
  g.J = KJ.bottomRows(sys.q());
  return g;
}

Eigen::MatrixXd closed_loop_form(const Eigen::MatrixXd& Pi_next, double lambda,
                                 const LinearSystem& sys) {
  check_disturbance_block(Pi_next, lambda, sys);
  const StageGains g = gains(Pi_next, lambda, sys);
  const Eigen::MatrixXd Abar = sys.A - sys.B * g.K;
  const Eigen::MatrixXd Qbar = sys.Q + g.K.transpose() * sys.R * g.K;

  Eigen::MatrixXd D = sys.G.transpose() * Pi_next * sys.G -
                      lambda * Eigen::MatrixXd::Identity(sys.q(), sys.q());
  D = 0.5 * (D + D.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  const double cutoff = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(sys.q());
  for (int i = 0; i < sys.q(); ++i) {
    if (std::abs(es.eigenvalues()(i)) > cutoff) {
      inv_ev(i) = 1.0 / es.eigenvalues()(i);
    }
  }
  const Eigen::MatrixXd Dpinv =
      es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();

  const Eigen::MatrixXd PAbar = Pi_next * Abar;
  const Eigen::MatrixXd GtPAbar = sys.G.transpose() * PAbar;
  Eigen::MatrixXd Pi = Qbar + Abar.transpose() * PAbar -
                       GtPAbar.transpose() * Dpinv * GtPAbar;
  return 0.5 * (Pi + Pi.transpose());
}

namespace {

// lambda - max_k ||G'Pi_k(lambda)G|| over the recursion Pi_N..Pi_1;
// negative infinity stands in when the recursion cannot be continued.
double feasibility_margin(const LinearSystem& sys, int N, double lambda) {
  Eigen::MatrixXd Pi = sys.P_f;
  double vmax = eigmax_sym(sys.G.transpose() * Pi * sys.G);
  for (int j = 0; j < N - 1; ++j) {
    if (lambda < vmax - 1e-12 * std::max(1.0, vmax)) {
      return lambda - vmax;
    }
    try {
      Pi = riccati_step(Pi, std::max(lambda, vmax), sys);
    } catch (const std::runtime_error&) {
      return -std::numeric_limits<double>::infinity();
    }
    vmax = std::max(vmax, eigmax_sym(sys.G.transpose() * Pi * sys.G));
  }
  return lambda - vmax;
}

}  // namespace

double lambda_lower_bound(const LinearSystem& sys, int N) {
  if (N < 1) throw std::invalid_argument("horizon must be at least 1");
  if (feasibility_margin(sys, N, 0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (feasibility_margin(sys, N, hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      throw std::runtime_error(
          "lambda_lower_bound bracket expansion failed (unbounded growth)");
    }
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (feasibility_margin(sys, N, mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

RiccatiTrajectory recursion_trajectory(double lambda, int N,
                                       const LinearSystem& sys) {
  return recursion_trajectory(lambda, N, sys, lambda_lower_bound(sys, N));
}

RiccatiTrajectory recursion_trajectory(double lambda, int N,
                                       const LinearSystem& sys,
                                       double lambda_lo) {
  if (N < 1) throw std::invalid_argument("horizon must be at least 1");
  RiccatiTrajectory traj;
  traj.lambda = lambda;
  traj.lambda_lo = lambda_lo;
  traj.pis.assign(N + 1, Eigen::MatrixXd());
  traj.control_gains.assign(N, Eigen::MatrixXd());
  traj.disturbance_gains.assign(N, Eigen::MatrixXd());
  traj.pis[N] = sys.P_f;
  for (int k = N - 1; k >= 0; --k) {
    const StageGains g = gains(traj.pis[k + 1], lambda, sys, &traj.warnings);
    traj.control_gains[k] = g.K;
    traj.disturbance_gains[k] = g.J;
    traj.pis[k] = riccati_step(traj.pis[k + 1], lambda, sys, &traj.warnings);
    const double emin = eigmin_sym(traj.pis[k] - traj.pis[k + 1]);
    if (emin < -1e-9 * std::max(1.0, traj.pis[k].norm())) {
      traj.warnings.push_back("stage monotonicity violated at k=" +
                              std::to_string(k) +
                              " (eigmin=" + std::to_string(emin) + ")");
    }
  }
  return traj;
}

Eigen::MatrixXd jtilde(const RiccatiTrajectory& traj, const LinearSystem& sys) {
  const int N = traj.horizon();
  const int n = sys.n();
  const int q = sys.q();
  Eigen::MatrixXd Jt(N * q, n);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < N; ++k) {
    Jt.middleRows(k * q, q) = traj.disturbance_gains[k] * Phi;
    Phi = (sys.A - sys.B * traj.control_gains[k] -
           sys.G * traj.disturbance_gains[k]) *
          Phi;
  }
  return Jt;
}

Eigen::MatrixXd jtilde(double lambda, int N, const LinearSystem& sys) {
  return jtilde(recursion_trajectory(lambda, N, sys), sys);
}

}  // namespace sidar
