#include "sidar/lambda_opt.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sidar {

namespace {

Eigen::MatrixXd pi0_of_lambda(double lambda, const LinearSystem& sys, int N) {
  Eigen::MatrixXd Pi = sys.P_f;
  for (int k = 0; k < N; ++k) Pi = riccati_step(Pi, lambda, sys);
  return Pi;
}

double worst_energy_of(const RiccatiTrajectory& traj,
                       const ProblemInstance& inst) {
  const Eigen::MatrixXd Jt = jtilde(traj, inst.system);
  return (Jt * inst.x0).squaredNorm() / inst.alpha;
}

double derivative_at(const RiccatiTrajectory& traj,
                     const ProblemInstance& inst) {
  return 0.5 - 0.5 * worst_energy_of(traj, inst);
}

}  // namespace

double objective(double lambda, const ProblemInstance& inst, int N) {
  const Eigen::VectorXd xs = inst.x0 / std::sqrt(inst.alpha);
  const Eigen::MatrixXd Pi0 = pi0_of_lambda(lambda, inst.system, N);
  return 0.5 * xs.dot(Pi0 * xs) + 0.5 * lambda;
}

double derivative(double lambda, const ProblemInstance& inst, int N) {
  return derivative_at(recursion_trajectory(lambda, N, inst.system), inst);
}

FiniteHorizonSolution solve_finite(const ProblemInstance& inst, int N) {
  const LinearSystem& sys = inst.system;
  const double lambda_lo = lambda_lower_bound(sys, N);

  FiniteHorizonSolution sol;
  sol.lambda_lo = lambda_lo;

  RiccatiTrajectory traj_lo = recursion_trajectory(lambda_lo, N, sys, lambda_lo);
  if (derivative_at(traj_lo, inst) >= 0.0) {
    sol.lambda_star = lambda_lo;
    sol.region = Region::Linear;
    sol.trajectory = std::move(traj_lo);
  } else {
    double lo = lambda_lo;
    double offset = 1.0;
    double hi = lambda_lo + offset;
    int doublings = 0;
    while (derivative_at(recursion_trajectory(hi, N, sys, lambda_lo), inst) <
           0.0) {
      lo = hi;
      offset *= 2.0;
      hi = lambda_lo + offset;
      if (++doublings > 60) {
        throw std::runtime_error(
            "solve_finite bracket expansion failed: the budget-alpha worst "
            "case cannot be dominated for this x0");
      }
    }
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (derivative_at(recursion_trajectory(mid, N, sys, lambda_lo), inst) >=
          0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    sol.lambda_star = 0.5 * (lo + hi);
    sol.region = Region::Nonlinear;
    sol.trajectory = recursion_trajectory(sol.lambda_star, N, sys, lambda_lo);
  }

  const Eigen::VectorXd xs = inst.x0 / std::sqrt(inst.alpha);
  sol.value = 0.5 * xs.dot(sol.trajectory.pis[0] * xs) + 0.5 * sol.lambda_star;
  sol.worst_energy = worst_energy_of(sol.trajectory, inst);
  return sol;
}

namespace {

class Grid1d {
 public:
  Grid1d(double lo, double hi, double step)
      : lo_(lo), step_(step),
        count_(static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1) {}

  int count() const { return count_; }
  double at(int i) const { return lo_ + step_ * i; }

  double interp(const std::vector<double>& values, double x) const {
    double t = (x - lo_) / step_;
    if (t <= 0.0) return values.front();
    if (t >= count_ - 1) return values.back();
    const int i = static_cast<int>(t);
    const double frac = t - i;
    return (1.0 - frac) * values[i] + frac * values[i + 1];
  }

 private:
  double lo_;
  double step_;
  int count_;
};

}  // namespace

double dp_oracle(const ProblemInstance& inst, int N, const GridSpec& grid) {
  const LinearSystem& sys = inst.system;
  if (sys.n() != 1 || sys.m() != 1 || sys.q() != 1) {
    throw std::invalid_argument("dp_oracle requires a scalar system");
  }
  if (N < 1 || N > 3) {
    throw std::invalid_argument("dp_oracle supports horizons 1..3");
  }
  const double A = sys.A(0, 0), B = sys.B(0, 0), G = sys.G(0, 0);
  const double Q = sys.Q(0, 0), R = sys.R(0, 0), Pf = sys.P_f(0, 0);
  const double x0 = inst.x0(0);
  const double alpha = inst.alpha;

  const double xr = 2.0 * grid.range + std::abs(x0);
  const Grid1d xg(-xr, xr, grid.step);
  const Grid1d ug(-grid.range, grid.range, grid.step);
  const Grid1d wg(-grid.range, grid.range, grid.step);
  const int L = grid.budget_levels;
  const auto budget_of = [&](int j) { return alpha * j / L; };
  const auto level_of = [&](double b) {
    const int j = static_cast<int>(std::floor(b / alpha * L + 1e-9));
    return std::max(0, std::min(L, j));
  };

  const auto stage_cost = [&](double x, double u) {
    return 0.5 * Q * x * x + 0.5 * R * u * u;
  };
  const auto terminal = [&](double x) { return 0.5 * Pf * x * x; };

  // Worst case of the terminal cost sits at an endpoint of the admissible
  // disturbance interval (convex quadratic).
  const auto terminal_worst = [&](double a, double b) {
    const double wmax = std::min(std::sqrt(std::max(b, 0.0)), grid.range);
    return std::max(terminal(a + G * wmax), terminal(a - G * wmax));
  };

  if (N == 1) {
    double best = std::numeric_limits<double>::infinity();
    for (int iu = 0; iu < ug.count(); ++iu) {
      const double u = ug.at(iu);
      best = std::min(best, stage_cost(x0, u) +
                                terminal_worst(A * x0 + B * u, alpha));
    }
    return best / alpha;
  }

  // U[j][i] = value at budget level j, state xg.at(i), for the current stage.
  std::vector<std::vector<double>> U(L + 1,
                                     std::vector<double>(xg.count(), 0.0));

  // Stage N-1: exact terminal maximization.
  for (int j = 0; j <= L; ++j) {
    for (int i = 0; i < xg.count(); ++i) {
      const double x = xg.at(i);
      double best = std::numeric_limits<double>::infinity();
      for (int iu = 0; iu < ug.count(); ++iu) {
        const double u = ug.at(iu);
        const double cand =
            stage_cost(x, u) + terminal_worst(A * x + B * u, budget_of(j));
        best = std::min(best, cand);
      }
      U[j][i] = best;
    }
  }

  // Interior stages (only for N = 3): gridded adversary then gridded control.
  for (int k = N - 2; k >= 1; --k) {
    std::vector<std::vector<double>> H(L + 1,
                                       std::vector<double>(xg.count(), 0.0));
    for (int j = 0; j <= L; ++j) {
      const double b = budget_of(j);
      for (int i = 0; i < xg.count(); ++i) {
        const double a = xg.at(i);
        double worst = -std::numeric_limits<double>::infinity();
        for (int iw = 0; iw < wg.count(); ++iw) {
          const double w = wg.at(iw);
          if (w * w > b + 1e-12) continue;
          const int jn = level_of(b - w * w);
          worst = std::max(worst, xg.interp(U[jn], a + G * w));
        }
        H[j][i] = worst;
      }
    }
    std::vector<std::vector<double>> Unew(
        L + 1, std::vector<double>(xg.count(), 0.0));
    for (int j = 0; j <= L; ++j) {
      for (int i = 0; i < xg.count(); ++i) {
        const double x = xg.at(i);
        double best = std::numeric_limits<double>::infinity();
        for (int iu = 0; iu < ug.count(); ++iu) {
          const double u = ug.at(iu);
          best = std::min(best,
                          stage_cost(x, u) + xg.interp(H[j], A * x + B * u));
        }
        Unew[j][i] = best;
      }
    }
    U.swap(Unew);
  }

  // Stage 0 evaluated only at x0 with the full budget.
  double best = std::numeric_limits<double>::infinity();
  for (int iu = 0; iu < ug.count(); ++iu) {
    const double u = ug.at(iu);
    const double a = A * x0 + B * u;
    double worst = -std::numeric_limits<double>::infinity();
    for (int iw = 0; iw < wg.count(); ++iw) {
      const double w = wg.at(iw);
      if (w * w > alpha + 1e-12) continue;
      const int jn = level_of(alpha - w * w);
      worst = std::max(worst, xg.interp(U[jn], a + G * w));
    }
    best = std::min(best, stage_cost(x0, u) + worst);
  }
  return best / alpha;
}

}  // namespace sidar
