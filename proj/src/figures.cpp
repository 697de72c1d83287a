#include "sidar/figures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sidar/riccati.hpp"
#include "sidar/steady_state.hpp"

namespace sidar {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  return out;
}

}  // namespace

void write_regions_csv(const std::string& path, const ProblemInstance& inst,
                       const std::vector<int>& N_list) {
  if (inst.system.n() != 1) {
    throw std::invalid_argument("regions CSV requires a scalar system");
  }
  auto out = open_csv(path);
  out << "N,x_lo,x_hi\n";
  for (int N : N_list) {
    const Ellipsoid e = region_linear(inst, N);
    const double E = e.shape(0, 0);
    std::string hi;
    if (E <= 1e-300) {
      hi = "inf";
    } else {
      hi = format_double(std::sqrt(e.radius_sq / E));
    }
    const std::string lo = hi == "inf" ? "-inf" : "-" + hi;
    out << N << "," << lo << "," << hi << "\n";
  }
}

void write_recursion_csv(const std::string& path, const ProblemInstance& inst,
                         const std::vector<int>& N_list) {
  const SteadyStateSolution steady = solve_steady_lmi(inst);
  const double pi_bar_ref = steady.Pi_bar.norm();
  auto out = open_csv(path);
  out << "N,k,frobenius_pi_k,pi_bar_ref\n";
  for (int N : N_list) {
    const FiniteHorizonSolution fin = solve_finite(inst, N);
    for (int k = 0; k <= N; ++k) {
      out << N << "," << k << "," << format_double(fin.trajectory.pis[k].norm())
          << "," << format_double(pi_bar_ref) << "\n";
    }
  }
}

void write_lambda_sweep_csv(const std::string& path,
                            const ProblemInstance& inst,
                            const std::vector<int>& N_list) {
  const SteadyStateSolution steady = solve_steady_lmi(inst);
  auto out = open_csv(path);
  out << "N,lambda_star,lambda_bar_ref\n";
  for (int N : N_list) {
    const FiniteHorizonSolution fin = solve_finite(inst, N);
    out << N << "," << format_double(fin.lambda_star) << ","
        << format_double(steady.lambda_bar) << "\n";
  }
}

void write_regions2d_csv(const std::string& path, const ProblemInstance& inst,
                         const std::vector<int>& N_list, int angles) {
  if (inst.system.n() != 2) {
    throw std::invalid_argument("regions2d CSV requires a 2-state system");
  }
  auto out = open_csv(path);
  out << "N,theta,x1,x2\n";
  for (int N : N_list) {
    const Ellipsoid e = region_linear(inst, N);
    for (int i = 0; i < angles; ++i) {
      const double theta = 2.0 * M_PI * i / angles;
      Eigen::Vector2d d(std::cos(theta), std::sin(theta));
      const double quad = d.dot(e.shape * d);
      std::string x1, x2;
      if (quad <= 1e-300) {
        x1 = "inf";
        x2 = "inf";
      } else {
        const double r = std::sqrt(e.radius_sq / quad);
        x1 = format_double(r * d(0));
        x2 = format_double(r * d(1));
      }
      out << N << "," << format_double(theta) << "," << x1 << "," << x2
          << "\n";
    }
  }
}

void write_bench_csv(const std::string& path, const BenchResult& result) {
  auto out = open_csv(path);
  out << "n,sample,seconds\n";
  for (const auto& row : result.rows) {
    out << row.n << "," << row.sample << "," << format_double(row.seconds)
        << "\n";
  }
}

void write_sim_csv(const std::string& path, const SimTrace& trace) {
  auto out = open_csv(path);
  out << "k,x_norm,u_norm,w_norm,budget,lambda_k\n";
  for (int k = 0; k < trace.horizon; ++k) {
    out << k << "," << format_double(trace.x[k].norm()) << ","
        << format_double(trace.u[k].norm()) << ","
        << format_double(trace.w[k].norm()) << ","
        << format_double(trace.budget[k]) << ","
        << format_double(trace.lambda[k]) << "\n";
  }
}

}  // namespace sidar
