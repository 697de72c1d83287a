#pragma once

#include <string>
#include <vector>

#include "sidar/analysis.hpp"

namespace sidar {

// CSV emitters for the figure families. All files are written with a fixed
// "%.12g" format so identical inputs produce byte-identical output.

// Columns: N,x_lo,x_hi (scalar systems; "inf" for an unbounded region).
void write_regions_csv(const std::string& path, const ProblemInstance& inst,
                       const std::vector<int>& N_list);

// Columns: N,k,frobenius_pi_k,pi_bar_ref
void write_recursion_csv(const std::string& path, const ProblemInstance& inst,
                         const std::vector<int>& N_list);

// Columns: N,lambda_star,lambda_bar_ref
void write_lambda_sweep_csv(const std::string& path,
                            const ProblemInstance& inst,
                            const std::vector<int>& N_list);

// Columns: N,theta,x1,x2 (2-state systems; 100 angles per ellipse).
void write_regions2d_csv(const std::string& path, const ProblemInstance& inst,
                         const std::vector<int>& N_list, int angles = 100);

// Columns: n,sample,seconds
void write_bench_csv(const std::string& path, const BenchResult& result);

// Columns: k,x_norm,u_norm,w_norm,budget,lambda_k
void write_sim_csv(const std::string& path, const SimTrace& trace);

std::string format_double(double v);

}  // namespace sidar
