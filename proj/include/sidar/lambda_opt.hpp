#pragma once

#include "sidar/model.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

enum class Region { Linear, Nonlinear };

struct FiniteHorizonSolution {
  double lambda_star = 0.0;
  double lambda_lo = 0.0;
  double value = 0.0;
  double worst_energy = 0.0;
  Region region = Region::Linear;
  RiccatiTrajectory trajectory;
};

// (1/2) (x0/sqrt(alpha))' Pi_0(lambda) (x0/sqrt(alpha)) + lambda/2
double objective(double lambda, const ProblemInstance& inst, int N);

// 1/2 - (1/2) ||Jtilde(lambda) x0||^2 / alpha; nondecreasing in lambda.
double derivative(double lambda, const ProblemInstance& inst, int N);

FiniteHorizonSolution solve_finite(const ProblemInstance& inst, int N);

struct GridSpec {
  double range = 6.0;
  double step = 0.01;
  int budget_levels = 200;
};

// Brute-force minimax value for scalar systems over a discretized
// state/budget grid; independent ground truth for solve_finite on N <= 3.
double dp_oracle(const ProblemInstance& inst, int N, const GridSpec& grid = {});

}  // namespace sidar
