#include "sidar/sdp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace sidar {

int SdpProblem::add_block(int dim, const Eigen::MatrixXd& constant) {
  if (constant.rows() != dim || constant.cols() != dim) {
    throw std::invalid_argument("block constant has wrong dimensions");
  }
  Block b;
  b.dim = dim;
  b.constant = 0.5 * (constant + constant.transpose());
  blocks.push_back(std::move(b));
  return static_cast<int>(blocks.size()) - 1;
}

int SdpProblem::add_pool_vector(int block, const Eigen::VectorXd& w) {
  Block& b = blocks.at(block);
  if (w.size() != b.dim) {
    throw std::invalid_argument("pool vector has wrong dimension");
  }
  b.pool.push_back(w);
  return static_cast<int>(b.pool.size()) - 1;
}

void SdpProblem::add_pair(int block, int var, int u, int v, double scale) {
  Block& b = blocks.at(block);
  if (var < 0 || var >= num_scalars) throw std::invalid_argument("bad variable");
  if (u < 0 || u >= static_cast<int>(b.pool.size()) || v < 0 ||
      v >= static_cast<int>(b.pool.size())) {
    throw std::invalid_argument("bad pool index");
  }
  b.pairs.push_back(Pair{var, u, v, scale});
}

void SdpProblem::add_coeff_dense(int block, int var, const Eigen::MatrixXd& A) {
  Eigen::MatrixXd As = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(As);
  const double cutoff = 1e-14 * es.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < As.rows(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (std::abs(ev) <= cutoff) continue;
    const int idx = add_pool_vector(block, es.eigenvectors().col(i));
    add_pair(block, var, idx, idx, 0.5 * ev);
  }
}

Eigen::MatrixXd SdpProblem::block_value(int block,
                                        const Eigen::VectorXd& x) const {
  const Block& b = blocks.at(block);
  const int K = static_cast<int>(b.pool.size());
  Eigen::MatrixXd W(b.dim, K);
  for (int i = 0; i < K; ++i) W.col(i) = b.pool[i];
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(K, K);
  for (const auto& p : b.pairs) {
    C(p.u, p.v) += x(p.var) * p.scale;
    C(p.v, p.u) += x(p.var) * p.scale;
  }
  Eigen::MatrixXd S = b.constant + W * C * W.transpose();
  return 0.5 * (S + S.transpose());
}

namespace {

struct BlockWork {
  Eigen::MatrixXd W;       // dim x K pool matrix
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd G0;      // W' S^{-1} W
  double logdet = 0.0;
};

Eigen::MatrixXd pool_matrix(const SdpProblem::Block& b) {
  Eigen::MatrixXd W(b.dim, static_cast<int>(b.pool.size()));
  for (int i = 0; i < static_cast<int>(b.pool.size()); ++i) W.col(i) = b.pool[i];
  return W;
}

Eigen::MatrixXd eval_block(const SdpProblem::Block& b, const Eigen::MatrixXd& W,
                           const Eigen::VectorXd& x) {
  const int K = static_cast<int>(b.pool.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(K, K);
  for (const auto& p : b.pairs) {
    C(p.u, p.v) += x(p.var) * p.scale;
    C(p.v, p.u) += x(p.var) * p.scale;
  }
  Eigen::MatrixXd S = b.constant + W * C * W.transpose();
  return 0.5 * (S + S.transpose());
}

// Factors every block at x; returns false if any block leaves the cone.
bool eval_all(const SdpProblem& prob, const Eigen::VectorXd& x,
              std::vector<BlockWork>& works) {
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    BlockWork& w = works[j];
    const Eigen::MatrixXd S = eval_block(prob.blocks[j], w.W, x);
    w.llt.compute(S);
    if (w.llt.info() != Eigen::Success) return false;
    double ld = 0.0;
    const auto& L = w.llt.matrixLLT();
    for (int i = 0; i < S.rows(); ++i) {
      if (!(L(i, i) > 0.0)) return false;
      ld += std::log(L(i, i));
    }
    w.logdet = 2.0 * ld;
  }
  return true;
}

double barrier_value(const std::vector<BlockWork>& works) {
  double phi = 0.0;
  for (const auto& w : works) phi -= w.logdet;
  return phi;
}

void compute_grams(const SdpProblem& prob, std::vector<BlockWork>& works) {
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    BlockWork& w = works[j];
    const Eigen::MatrixXd SiW = w.llt.solve(w.W);
    w.G0 = w.W.transpose() * SiW;
  }
}

Eigen::VectorXd barrier_gradient(const SdpProblem& prob,
                                 const std::vector<BlockWork>& works) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(prob.num_scalars);
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    const auto& G0 = works[j].G0;
    for (const auto& p : prob.blocks[j].pairs) {
      g(p.var) -= 2.0 * p.scale * G0(p.u, p.v);
    }
  }
  return g;
}

Eigen::MatrixXd barrier_hessian_dense(const SdpProblem& prob,
                                      const std::vector<BlockWork>& works) {
  const int n = prob.num_scalars;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    const auto& G0 = works[j].G0;
    const auto& pairs = prob.blocks[j].pairs;
    for (const auto& r : pairs) {
      for (const auto& s : pairs) {
        H(r.var, s.var) += 2.0 * r.scale * s.scale *
                           (G0(r.v, s.u) * G0(s.v, r.u) +
                            G0(r.v, s.v) * G0(s.u, r.u));
      }
    }
  }
  return H;
}

Eigen::VectorXd barrier_hessian_apply(const SdpProblem& prob,
                                      const std::vector<BlockWork>& works,
                                      const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(prob.num_scalars);
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    const auto& b = prob.blocks[j];
    const auto& G0 = works[j].G0;
    const int K = static_cast<int>(b.pool.size());
    // Y = G0 C G0 with C sparse in the pair list; the coefficient matrix is
    // accumulated column-wise (G0 is symmetric, so every access below is a
    // contiguous column) and the remaining product is a single GEMM. Only
    // the Y entries sitting at pair positions are read afterwards.
    Eigen::MatrixXd Zc = Eigen::MatrixXd::Zero(K, K);  // G0 * C
    for (const auto& p : b.pairs) {
      const double c = v(p.var) * p.scale;
      if (p.u == p.v) {
        Zc.col(p.u) += 2.0 * c * G0.col(p.u);
      } else {
        Zc.col(p.v) += c * G0.col(p.u);
        Zc.col(p.u) += c * G0.col(p.v);
      }
    }
    Eigen::MatrixXd Y(K, K);
    Y.noalias() = Zc * G0;
    for (const auto& p : b.pairs) {
      out(p.var) += 2.0 * p.scale * Y(p.u, p.v);
    }
  }
  return out;
}

// CG on the barrier Hessian, preconditioned by a (possibly stale) dense
// factorization of the Hessian at a nearby iterate. Returns the iteration
// count so the caller can decide when the preconditioner needs a rebuild.
Eigen::VectorXd pcg_solve(const SdpProblem& prob,
                          const std::vector<BlockWork>& works,
                          const Eigen::VectorXd& rhs,
                          const Eigen::LLT<Eigen::MatrixXd>& precond,
                          int max_iter, double rtol, int* iters_used) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = precond.solve(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double rhs_norm = rhs.norm();
  int it = 0;
  for (; it < max_iter; ++it) {
    if (r.norm() <= rtol * rhs_norm) break;
    const Eigen::VectorXd Hp = barrier_hessian_apply(prob, works, p);
    const double pHp = p.dot(Hp);
    if (!(pHp > 0.0)) break;
    const double alpha = rz / pHp;
    x += alpha * p;
    r -= alpha * Hp;
    z = precond.solve(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (iters_used != nullptr) *iters_used = it;
  return x;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& prob,
                      const std::optional<Eigen::VectorXd>& init,
                      const SdpOptions& opts) {
  const int p = prob.num_scalars;
  if (prob.objective.size() != p) {
    throw std::invalid_argument("objective size does not match num_scalars");
  }
  double m_total = 0.0;
  for (const auto& b : prob.blocks) m_total += b.dim;

  Eigen::VectorXd x;
  if (init.has_value()) {
    x = *init;
    if (x.size() != p) throw std::invalid_argument("init has wrong size");
  } else {
    // Phase I: minimize s with S_j(x) + s I >= 0 and s >= -1.
    SdpProblem aug;
    aug.num_scalars = p + 1;
    aug.objective = Eigen::VectorXd::Zero(p + 1);
    aug.objective(p) = 1.0;
    for (const auto& b : prob.blocks) {
      const int j = aug.add_block(b.dim, b.constant);
      for (const auto& w : b.pool) aug.add_pool_vector(j, w);
      for (const auto& pr : b.pairs) aug.add_pair(j, pr.var, pr.u, pr.v, pr.scale);
      for (int t = 0; t < b.dim; ++t) {
        const int idx = aug.add_pool_vector(j, Eigen::VectorXd::Unit(b.dim, t));
        aug.add_pair(j, p, idx, idx, 0.5);
      }
    }
    const int floor_block = aug.add_block(1, Eigen::MatrixXd::Ones(1, 1));
    const int one = aug.add_pool_vector(floor_block, Eigen::VectorXd::Ones(1));
    aug.add_pair(floor_block, p, one, one, 0.5);
    // Box on the original variables: without it the phase-I analytic center
    // can drift to infinity whenever the target feasible set is unbounded.
    // Any strictly feasible point inside the box serves equally well.
    if (p > 0) {
      const double box = 1e6;
      const int box_block = aug.add_block(
          2 * p, box * Eigen::MatrixXd::Identity(2 * p, 2 * p));
      for (int i = 0; i < p; ++i) {
        const int lo = aug.add_pool_vector(box_block,
                                           Eigen::VectorXd::Unit(2 * p, i));
        const int hi = aug.add_pool_vector(
            box_block, Eigen::VectorXd::Unit(2 * p, p + i));
        aug.add_pair(box_block, i, lo, lo, 0.5);
        aug.add_pair(box_block, i, hi, hi, -0.5);
      }
    }

    Eigen::VectorXd x_aug = Eigen::VectorXd::Zero(p + 1);
    double worst = 0.0;
    for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          prob.block_value(static_cast<int>(j), Eigen::VectorXd::Zero(p)),
          Eigen::EigenvaluesOnly);
      worst = std::max(worst, -es.eigenvalues().minCoeff());
    }
    x_aug(p) = worst + 1.0;
    SdpOptions phase1_opts = opts;
    phase1_opts.gap_tol = 1e-10;
    const SdpSolution ph = solve_sdp(aug, x_aug, phase1_opts);
    if (ph.x(p) >= 0.0) {
      SdpSolution sol;
      sol.x = ph.x.head(p);
      sol.status = SdpStatus::Infeasible;
      sol.iterations = ph.iterations;
      return sol;
    }
    x = ph.x.head(p);
  }

  std::vector<BlockWork> works(prob.blocks.size());
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    works[j].W = pool_matrix(prob.blocks[j]);
  }
  if (!eval_all(prob, x, works)) {
    throw std::invalid_argument("solve_sdp: initial point is not strictly feasible");
  }

  SdpSolution sol;
  sol.status = SdpStatus::MaxIter;
  const bool trace = std::getenv("SIDAR_SDP_TRACE") != nullptr;
  double t = opts.t0;
  int newton_total = 0;
  std::vector<BlockWork> trial(works.size());
  for (std::size_t j = 0; j < works.size(); ++j) trial[j].W = works[j].W;

  double t_certified = opts.t0;
  int uncentered_streak = 0;
  Eigen::LLT<Eigen::MatrixXd> hess_fact;
  bool refactor = true;
  int n_refactor = 0;
  long pcg_total = 0;
  double tm_assembly = 0.0, tm_fact = 0.0, tm_pcg = 0.0, tm_gram = 0.0,
         tm_ls = 0.0;
  const auto now = [] { return std::chrono::steady_clock::now(); };
  const auto secs = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };
  for (;;) {
    // Center at the current path parameter.
    const int stage_start = newton_total;
    double last_decrement = 0.0;
    double last_step = 0.0;
    bool centered = false;
    int crawl = 0;
    const double stage_obj_start = prob.objective.dot(x);
    while (newton_total < opts.max_newton &&
           newton_total - stage_start < opts.max_stage_newton) {
      {
        const auto t0c = now();
        compute_grams(prob, works);
        tm_gram += secs(t0c, now());
      }
      const Eigen::VectorXd grad =
          t * prob.objective + barrier_gradient(prob, works);

      // Regularization must stay negligible against the smallest genuine
      // curvature or the direction degrades to scaled gradient descent, so
      // start at zero and escalate only when the factorization misbehaves.
      Eigen::VectorXd d;
      double gdotd = 1.0;
      if (p <= opts.dense_threshold) {
        const Eigen::MatrixXd H = barrier_hessian_dense(prob, works);
        const double dmax = std::max(1.0, H.diagonal().maxCoeff());
        for (double rel = 0.0; rel <= 1e-6;
             rel = (rel == 0.0 ? 1e-14 : rel * 100.0)) {
          Eigen::MatrixXd Hr = H;
          Hr.diagonal().array() += rel * dmax;
          d = Eigen::LDLT<Eigen::MatrixXd>(Hr).solve(-grad);
          gdotd = grad.dot(d);
          if (gdotd < 0.0 && d.allFinite()) break;
        }
      } else {
        // Large problems: CG on the exact Hessian, preconditioned by a
        // dense factorization refreshed only when it has gone stale. The
        // Hessian does not depend on t, so the factorization survives path
        // parameter updates for free.
        for (int pass = 0; pass < 2; ++pass) {
          if (refactor) {
            const auto t0a = now();
            Eigen::MatrixXd H = barrier_hessian_dense(prob, works);
            tm_assembly += secs(t0a, now());
            H.diagonal().array() += 1e-14 * H.diagonal().maxCoeff();
            const auto t0f = now();
            hess_fact.compute(H);
            tm_fact += secs(t0f, now());
            ++n_refactor;
            refactor = false;
          }
          int used = 0;
          const auto t0p = now();
          // Inexact Newton: a modest relative residual already gives a
          // direction Newton can use, and the tail of the path is noise
          // limited anyway, so a tight tolerance only burns iterations.
          d = pcg_solve(prob, works, -grad, hess_fact, 60, 3e-3, &used);
          tm_pcg += secs(t0p, now());
          pcg_total += used;
          if (used >= 60) refactor = true;
          gdotd = grad.dot(d);
          if (gdotd < 0.0 && d.allFinite()) break;
          refactor = true;  // direction unusable: force a fresh factorization
        }
      }
      if (!(gdotd < 0.0)) {
        centered = true;  // gradient at the numerical floor
        break;
      }

      const double decrement_sq = -gdotd;
      if (decrement_sq <= opts.centering_tol) {
        centered = true;
        break;
      }

      const auto t0l = now();
      const double phi0 = barrier_value(works);
      double step = 1.0;
      bool accepted = false;
      while (step > 1e-14) {
        const Eigen::VectorXd cand = x + step * d;
        if (eval_all(prob, cand, trial)) {
          const double delta_f = t * step * prob.objective.dot(d) +
                                 barrier_value(trial) - phi0;
          if (delta_f <= opts.armijo * step * gdotd) {
            x = cand;
            std::swap(works, trial);
            accepted = true;
            break;
          }
        }
        step *= opts.backtrack;
      }
      tm_ls += secs(t0l, now());
      ++newton_total;
      last_decrement = decrement_sq;
      last_step = accepted ? step : 0.0;
      if (!accepted) break;
      // Damped steps that leave the stage objective frozen mean the stage is
      // crawling at the arithmetic floor; stop burning iterations on it.
      const bool frozen =
          std::abs(prob.objective.dot(x) - stage_obj_start) <=
          1e-6 * std::max(1.0, std::abs(stage_obj_start));
      crawl = (step <= 0.5 && frozen) ? crawl + 1 : 0;
      if (crawl >= 3) break;
    }

    if (trace) {
      std::fprintf(stderr,
                   "[sdp] t=%.3e steps=%d obj=%.6f decr2=%.3e step=%.3e\n", t,
                   newton_total - stage_start, prob.objective.dot(x),
                   last_decrement, last_step);
    }
    const double stage_obj_delta =
        std::abs(prob.objective.dot(x) - stage_obj_start);
    if (centered) {
      t_certified = t;
      uncentered_streak = 0;
    } else if (stage_obj_delta <=
               1e-6 * std::max(1.0, std::abs(stage_obj_start))) {
      ++uncentered_streak;
    } else {
      uncentered_streak = 0;  // real progress, just not centered yet
    }
    const double obj = prob.objective.dot(x);
    const double gap = m_total / t;
    if (gap <= opts.gap_tol * std::max(1.0, std::abs(obj))) {
      sol.status = SdpStatus::Optimal;
      break;
    }
    if (uncentered_streak >= 2) {
      // Two stages in a row could not be centered: the path cannot be
      // followed further in this arithmetic. Report the last certified gap.
      sol.status = SdpStatus::Optimal;
      break;
    }
    if (newton_total >= opts.max_newton) {
      sol.status = SdpStatus::MaxIter;
      break;
    }
    t *= opts.mu;
  }

  if (trace) {
    std::fprintf(stderr,
                 "[sdp] refactors=%d pcg_iters=%ld assembly=%.2fs fact=%.2fs "
                 "pcg=%.2fs gram=%.2fs ls=%.2fs\n",
                 n_refactor, pcg_total, tm_assembly, tm_fact, tm_pcg, tm_gram,
                 tm_ls);
  }
  sol.x = x;
  sol.objective_value = prob.objective.dot(x);
  sol.duality_gap = m_total / std::max(t_certified, opts.t0);
  sol.iterations = newton_total;
  double emin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        prob.block_value(static_cast<int>(j), x), Eigen::EigenvaluesOnly);
    emin = std::min(emin, es.eigenvalues().minCoeff());
  }
  sol.primal_residual = emin;
  return sol;
}

SdpDiagnostics check_solution(const SdpProblem& prob, const SdpSolution& sol) {
  SdpDiagnostics diag;
  diag.objective_value = prob.objective.dot(sol.x);
  diag.primal_residual = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < prob.blocks.size(); ++j) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        prob.block_value(static_cast<int>(j), sol.x), Eigen::EigenvaluesOnly);
    const double e = es.eigenvalues().minCoeff();
    diag.block_eigmins.push_back(e);
    diag.primal_residual = std::min(diag.primal_residual, e);
  }
  return diag;
}

}  // namespace sidar
