#include "sidar/steady_state.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sidar/riccati.hpp"

namespace sidar {

namespace {

double eigmax_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm_psd(const Eigen::MatrixXd& M) {
  return std::max(0.0, eigmax_sym(0.5 * (M + M.transpose())));
}

int vech_index(int i, int j, int n) {  // requires i <= j
  return i * n - i * (i - 1) / 2 + (j - i);
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& M) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("matrix inverse of a non-PD recovered P");
  }
  Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

Eigen::MatrixXd LmiAssembly::decode_P(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd P(n, n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = x(2 + vech_index(i, j, n));
      P(i, j) = (i == j) ? v : v * inv_sqrt2;
      P(j, i) = P(i, j);
    }
  }
  return P;
}

Eigen::MatrixXd LmiAssembly::decode_F(const Eigen::VectorXd& x) const {
  const int f0 = 2 + n * (n + 1) / 2;
  Eigen::MatrixXd F(m, n);
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < n; ++s) F(r, s) = x(f0 + r * n + s);
  }
  return F;
}

Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd Pi = I;
  for (int it = 0; it < 10000; ++it) {
    const Eigen::MatrixXd PA = Pi * A;
    const Eigen::MatrixXd BtPA = B.transpose() * PA;
    const Eigen::MatrixXd M = B.transpose() * Pi * B + Im;
    Eigen::MatrixXd next = I + A.transpose() * PA -
                           BtPA.transpose() * M.ldlt().solve(BtPA);
    next = 0.5 * (next + next.transpose());
    const double change = (next - Pi).norm();
    Pi = next;
    if (change <= 1e-10 * std::max(1.0, Pi.norm())) break;
  }
  const Eigen::MatrixXd M = B.transpose() * Pi * B + Im;
  const Eigen::MatrixXd K = M.ldlt().solve(B.transpose() * Pi * A);
  if (spectral_radius(A - B * K) >= 1.0 - 1e-9) {
    throw std::runtime_error(
        "no stabilizing gain found; system appears non-stabilizable");
  }
  return K;
}

namespace {

// Solves Pi = Abar' Pi Abar + W for Schur-stable Abar by doubling.
Eigen::MatrixXd discrete_lyapunov(const Eigen::MatrixXd& Abar,
                                  const Eigen::MatrixXd& W) {
  Eigen::MatrixXd T = W;
  Eigen::MatrixXd M = Abar;
  for (int it = 0; it < 200; ++it) {
    if (M.norm() < 1e-150) break;
    T = T + M.transpose() * T * M;
    M = M * M;
    T = 0.5 * (T + T.transpose());
  }
  return T;
}

}  // namespace

LmiAssembly assemble_lmi(const ProblemInstance& inst) {
  const LinearSystem& sys = inst.system;
  const int n = sys.n();
  const int m = sys.m();
  const int q = sys.q();
  const Eigen::MatrixXd Qh = psd_sqrt(sys.Q);
  const Eigen::MatrixXd Rh = psd_sqrt(sys.R);

  LmiAssembly out;
  out.n = n;
  out.m = m;
  SdpProblem& prob = out.problem;
  const int nv_p = n * (n + 1) / 2;
  prob.num_scalars = 2 + nv_p + m * n;
  prob.objective = Eigen::VectorXd::Zero(prob.num_scalars);
  prob.objective(0) = 0.5;  // lambda
  prob.objective(1) = 0.5;  // chi

  // S block: row groups of sizes (n, n, q, n+m).
  const int d1 = 3 * n + m + q;
  const int o1 = 0, o2 = n, o3 = 2 * n, o4 = 2 * n + q;
  Eigen::MatrixXd C0 = Eigen::MatrixXd::Zero(d1, d1);
  C0.block(o4, o4, n + m, n + m).setIdentity();
  if (q == n) {
    C0.block(o2, o3, n, q) = sys.G.transpose();
    C0.block(o3, o2, q, n) = sys.G;
  } else {
    C0.block(o2, o3, n, q) = sys.G;
    C0.block(o3, o2, q, n) = sys.G.transpose();
  }
  const int sb = prob.add_block(d1, C0);

  std::vector<int> c_idx(n), c2_idx(n), a_idx(n), y_idx(m), l_idx(q);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d1);
    c(o1 + i) = 1.0;
    c_idx[i] = prob.add_pool_vector(sb, c);
    c2_idx[i] = prob.add_pool_vector(sb, Eigen::VectorXd::Unit(d1, o2 + i));
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d1);
    z(o1 + i) = 1.0;
    for (int r = 0; r < n; ++r) {
      z(o2 + r) = sys.A(r, i);
      z(o4 + r) = Qh(r, i);
    }
    a_idx[i] = prob.add_pool_vector(sb, z - 0.5 * c);
  }
  for (int r = 0; r < m; ++r) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(d1);
    for (int t = 0; t < n; ++t) y(o2 + t) = -sys.B(t, r);
    for (int t = 0; t < m; ++t) y(o4 + n + t) = -Rh(t, r);
    y_idx[r] = prob.add_pool_vector(sb, y);
  }
  for (int t = 0; t < q; ++t) {
    l_idx[t] = prob.add_pool_vector(sb, Eigen::VectorXd::Unit(d1, o3 + t));
  }

  for (int t = 0; t < q; ++t) prob.add_pair(sb, 0, l_idx[t], l_idx[t], 0.5);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int var = 2 + vech_index(i, j, n);
      if (i == j) {
        prob.add_pair(sb, var, a_idx[i], c_idx[i], 1.0);
        prob.add_pair(sb, var, c2_idx[i], c2_idx[i], 0.5);
      } else {
        prob.add_pair(sb, var, a_idx[i], c_idx[j], inv_sqrt2);
        prob.add_pair(sb, var, a_idx[j], c_idx[i], inv_sqrt2);
        prob.add_pair(sb, var, c2_idx[i], c2_idx[j], inv_sqrt2);
      }
    }
  }
  const int f0 = 2 + nv_p;
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < n; ++s) {
      prob.add_pair(sb, f0 + r * n + s, y_idx[r], c_idx[s], 1.0);
    }
  }

  // T block.
  const int d2 = n + 1;
  const Eigen::VectorXd xs = inst.x0 / std::sqrt(inst.alpha);
  Eigen::MatrixXd T0 = Eigen::MatrixXd::Zero(d2, d2);
  T0.block(0, n, n, 1) = xs;
  T0.block(n, 0, 1, n) = xs.transpose();
  const int tb = prob.add_block(d2, T0);
  std::vector<int> ch_idx(n);
  for (int i = 0; i < n; ++i) {
    ch_idx[i] = prob.add_pool_vector(tb, Eigen::VectorXd::Unit(d2, i));
  }
  const int e_idx = prob.add_pool_vector(tb, Eigen::VectorXd::Unit(d2, n));
  prob.add_pair(tb, 1, e_idx, e_idx, 0.5);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int var = 2 + vech_index(i, j, n);
      if (i == j) {
        prob.add_pair(tb, var, ch_idx[i], ch_idx[i], 0.5);
      } else {
        prob.add_pair(tb, var, ch_idx[i], ch_idx[j], inv_sqrt2);
      }
    }
  }

  // Strictly feasible initialization: a stabilizing gain, a Lyapunov
  // certificate with unit margin, and lambda large enough to dominate the
  // disturbance coupling.
  const Eigen::MatrixXd K = stabilizing_gain(sys.A, sys.B);
  const Eigen::MatrixXd Abar = sys.A - sys.B * K;
  const Eigen::MatrixXd Qbar = sys.Q + K.transpose() * sys.R * K;
  const Eigen::MatrixXd Pi0 = discrete_lyapunov(
      Abar, Qbar + Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd P0 = symmetric_inverse(Pi0);
  const Eigen::MatrixXd F0 = K * P0;
  double lambda0 = spectral_norm_psd(sys.G.transpose() * Pi0 * sys.G) +
                   std::pow((Abar.transpose() * Pi0 * sys.G).norm(), 2) + 1.0;
  const double chi0 = xs.dot(Pi0 * xs) + 1.0;

  Eigen::VectorXd x0v = Eigen::VectorXd::Zero(prob.num_scalars);
  x0v(1) = chi0;
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      x0v(2 + vech_index(i, j, n)) = (i == j) ? P0(i, j) : sqrt2 * P0(i, j);
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < n; ++s) x0v(f0 + r * n + s) = F0(r, s);
  }
  for (int attempt = 0; attempt < 60; ++attempt) {
    x0v(0) = lambda0;
    double emin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(prob.blocks.size()); ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          prob.block_value(j, x0v), Eigen::EigenvaluesOnly);
      emin = std::min(emin, es.eigenvalues().minCoeff());
    }
    if (emin > 0.0) {
      out.init = x0v;
      return out;
    }
    lambda0 *= 2.0;
  }
  // Leave init empty; solve_sdp falls back to its Phase-I search.
  return out;
}

Eigen::MatrixXd g_residual(double lambda, const Eigen::MatrixXd& Pi,
                           const LinearSystem& sys) {
  // Evaluated as a plain algebraic expression: the only requirement is an
  // invertible mixed matrix, not concavity of the inner maximization, so
  // this stays usable above the feasibility bound too.
  const Eigen::MatrixXd M = mixed_matrix(Pi, lambda, sys);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(piv.minCoeff() > 1e-14 * piv.maxCoeff()) || piv.maxCoeff() == 0.0) {
    throw std::runtime_error("mixed matrix M is singular");
  }
  const Eigen::MatrixXd PA = Pi * sys.A;
  Eigen::MatrixXd BGtPA(sys.m() + sys.q(), sys.n());
  BGtPA.topRows(sys.m()) = sys.B.transpose() * PA;
  BGtPA.bottomRows(sys.q()) = sys.G.transpose() * PA;
  Eigen::MatrixXd g = sys.Q + sys.A.transpose() * PA -
                      BGtPA.transpose() * lu.solve(BGtPA) - Pi;
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd riccati_fixed_point(double lambda, const LinearSystem& sys) {
  Eigen::MatrixXd Pi = sys.P_f;
  for (int it = 0; it < 100000; ++it) {
    const Eigen::MatrixXd next = riccati_step(Pi, lambda, sys);
    const double change = (next - Pi).norm();
    Pi = next;
    if (Pi.norm() > 1e12) {
      throw std::runtime_error("riccati_fixed_point diverged");
    }
    if (change <= 1e-12 * std::max(1.0, Pi.norm())) return Pi;
  }
  throw std::runtime_error("riccati_fixed_point did not converge");
}

namespace {

bool steady_feasible(double lambda, const LinearSystem& sys,
                     Eigen::MatrixXd* Pi_out = nullptr) {
  try {
    Eigen::MatrixXd Pi = riccati_fixed_point(lambda, sys);
    const double bound = spectral_norm_psd(sys.G.transpose() * Pi * sys.G);
    if (lambda < bound - 1e-9 * std::max(1.0, bound)) return false;
    if (Pi_out != nullptr) *Pi_out = std::move(Pi);
    return true;
  } catch (const std::runtime_error&) {
    return false;
  }
}

double min_feasible_lambda(const LinearSystem& sys) {
  if (steady_feasible(0.0, sys)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!steady_feasible(hi, sys)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      throw std::runtime_error(
          "steady-state feasibility bracket expansion failed");
    }
  }
  while (hi - lo > 1e-9 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (steady_feasible(mid, sys)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void fill_diagnostics(SteadyStateSolution& sol, const LinearSystem& sys) {
  sol.slack = sol.lambda_bar -
              spectral_norm_psd(sys.G.transpose() * sol.Pi_bar * sys.G);
  try {
    sol.g_residual_norm = g_residual(sol.lambda_bar, sol.Pi_bar, sys).norm();
  } catch (const std::runtime_error& e) {
    sol.g_residual_norm = std::numeric_limits<double>::quiet_NaN();
    sol.warnings.push_back(std::string("g residual unavailable: ") + e.what());
  }
}

}  // namespace

SteadyStateSolution solve_steady_lmi(const ProblemInstance& inst) {
  const LinearSystem& sys = inst.system;
  LmiAssembly lmi = assemble_lmi(inst);
  std::optional<Eigen::VectorXd> init;
  if (lmi.init.size() > 0) init = lmi.init;
  SdpSolution sdp = solve_sdp(lmi.problem, init);
  if (sdp.status == SdpStatus::Infeasible) {
    throw std::runtime_error("steady-state LMI reported infeasible");
  }
  if (sdp.status == SdpStatus::MaxIter) {
    throw std::runtime_error(
        "steady-state LMI solver hit the Newton iteration cap");
  }

  SteadyStateSolution sol;
  sol.method = SteadyMethod::LMI;
  sol.sdp = sdp;
  sol.lambda_bar = sdp.x(lmi.lambda_index());
  sol.chi = sdp.x(lmi.chi_index());
  sol.P = lmi.decode_P(sdp.x);
  sol.F = lmi.decode_F(sdp.x);
  sol.Pi_bar = symmetric_inverse(sol.P);
  sol.K_bar = -(sol.F * sol.Pi_bar);
  fill_diagnostics(sol, sys);

  if (std::isfinite(sol.g_residual_norm) &&
      sol.g_residual_norm > 1e-6 * std::max(1.0, sol.Pi_bar.norm())) {
    sol.warnings.push_back("steady-state equation residual " +
                           std::to_string(sol.g_residual_norm) +
                           " above tolerance (possible rank deficiency)");
  }
  const Eigen::MatrixXd Qh = psd_sqrt(sys.Q);
  const double p_bound = eigmax_sym(Qh * sol.P * Qh);
  if (p_bound > 1.0 + 1e-8) {
    sol.warnings.push_back("P bound eigmax(Q^{1/2}PQ^{1/2}) = " +
                           std::to_string(p_bound) + " exceeds 1");
  }
  return sol;
}

SteadyStateSolution solve_steady_scan(const ProblemInstance& inst) {
  const LinearSystem& sys = inst.system;
  const Eigen::VectorXd xs = inst.x0 / std::sqrt(inst.alpha);
  const double lambda_min = min_feasible_lambda(sys);

  const auto value_at = [&](double lambda) {
    const Eigen::MatrixXd Pi = riccati_fixed_point(lambda, sys);
    return 0.5 * xs.dot(Pi * xs) + 0.5 * lambda;
  };

  SteadyStateSolution sol;
  sol.method = SteadyMethod::Scan;

  double lambda_bar = lambda_min;
  if (xs.norm() > 0.0) {
    // Expand until the minimum is interior to [lambda_min, hi].
    double width = 1.0;
    double hi = lambda_min + width;
    int doublings = 0;
    while (value_at(hi) < value_at(lambda_min + 0.5 * width)) {
      width *= 2.0;
      hi = lambda_min + width;
      if (++doublings > 60) {
        throw std::runtime_error("steady scan bracket expansion failed");
      }
    }
    // Unimodality spot check; fall back to a grid if it fails.
    double lo = lambda_min;
    const int samples = 100;
    std::vector<double> vals(samples + 1);
    for (int i = 0; i <= samples; ++i) {
      vals[i] = value_at(lo + (hi - lo) * i / samples);
    }
    int imin = 0;
    for (int i = 1; i <= samples; ++i) {
      if (vals[i] < vals[imin]) imin = i;
    }
    bool unimodal = true;
    for (int i = 1; i <= samples; ++i) {
      const bool should_decrease = i <= imin;
      const double diff = vals[i] - vals[i - 1];
      if ((should_decrease && diff > 1e-10 * std::max(1.0, vals[i])) ||
          (!should_decrease && diff < -1e-10 * std::max(1.0, vals[i]))) {
        unimodal = false;
      }
    }
    if (!unimodal) {
      sol.warnings.push_back(
          "sampled objective not unimodal; refining around the grid minimum");
    }
    lo = lambda_min + (hi - lambda_min) * std::max(0, imin - 1) / samples;
    hi = lambda_min + (hi - lambda_min) * std::min(samples, imin + 1) / samples;

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a);
    double c2 = a + gr * (b - a);
    double f1 = value_at(c1), f2 = value_at(c2);
    while (b - a > 1e-10 * std::max(1.0, b)) {
      if (f1 <= f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = value_at(c1);
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = value_at(c2);
      }
    }
    lambda_bar = std::max(lambda_min, 0.5 * (a + b));
  }

  sol.lambda_bar = lambda_bar;
  sol.Pi_bar = riccati_fixed_point(lambda_bar, sys);
  sol.P = symmetric_inverse(sol.Pi_bar);
  const StageGains g = gains(sol.Pi_bar, lambda_bar, sys);
  sol.K_bar = -g.K;
  sol.F = -(sol.K_bar * sol.P);
  sol.chi = xs.dot(sol.Pi_bar * xs);
  fill_diagnostics(sol, sys);
  return sol;
}

Classification classify(const LinearSystem& sys, double alpha) {
  ProblemInstance origin{sys, Eigen::VectorXd::Zero(sys.n()), alpha};
  const SteadyStateSolution lmi = solve_steady_lmi(origin);
  const SteadyStateSolution scan = solve_steady_scan(origin);

  const double tol = 1e-6 * std::max(1.0, lmi.lambda_bar);
  const bool nd_lmi = lmi.slack <= tol;
  const bool nd_scan = scan.slack <= 1e-6 * std::max(1.0, scan.lambda_bar);
  if (nd_lmi != nd_scan) {
    throw std::runtime_error(
        "classification routes disagree (LMI slack " +
        std::to_string(lmi.slack) + ", scan slack " +
        std::to_string(scan.slack) + ")");
  }
  Classification cls;
  cls.kind = nd_lmi ? SystemKind::Nondegenerate : SystemKind::Degenerate;
  cls.slack_at_origin = lmi.slack;
  cls.tolerance_used = tol;
  return cls;
}

double hinf_gamma_oracle(const LinearSystem& sys) {
  return min_feasible_lambda(sys);
}

}  // namespace sidar
