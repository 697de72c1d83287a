#include "sidar/model.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sidar {

namespace {

void check_finite(const Eigen::MatrixXd& M, const std::string& label) {
  if (!M.allFinite()) {
    throw std::invalid_argument("non-finite entries in matrix " + label);
  }
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M, const std::string& label,
                           std::vector<std::string>* warnings) {
  const double scale = std::max(1.0, M.norm());
  const double asym = (M - M.transpose()).norm();
  if (asym > 1e-12 * scale && warnings != nullptr) {
    warnings->push_back("matrix " + label + " asymmetric (" +
                        std::to_string(asym) + "); averaged with transpose");
  }
  return 0.5 * (M + M.transpose());
}

double eigmin_sym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

int numerical_rank(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cutoff =
      1e-10 * sv(0) * static_cast<double>(std::max(M.rows(), M.cols()));
  int r = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  return r;
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) {
    throw std::invalid_argument("missing matrix key \"" + key + "\"");
  }
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) {
    throw std::invalid_argument("matrix \"" + key + "\" must be a nonempty array of rows");
  }
  const std::size_t ncols = rows.at(0).size();
  Eigen::MatrixXd M(rows.size(), ncols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows.at(i);
    if (!row.is_array() || row.size() != ncols) {
      throw std::invalid_argument("ragged rows in matrix \"" + key + "\"");
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      M(static_cast<int>(i), static_cast<int>(c)) = row.at(c).get<double>();
    }
  }
  return M;
}

nlohmann::json dump_matrix(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

LinearSystem make_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& G, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P_f,
                         const std::string& name,
                         std::vector<std::string>* warnings) {
  const auto n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("A must be square");
  if (B.rows() != n || G.rows() != n) {
    throw std::invalid_argument("B and G must have as many rows as A");
  }
  if (Q.rows() != n || Q.cols() != n || P_f.rows() != n || P_f.cols() != n) {
    throw std::invalid_argument("Q and P_f must be n x n");
  }
  if (R.rows() != B.cols() || R.cols() != B.cols()) {
    throw std::invalid_argument("R must be m x m");
  }
  check_finite(A, "A");
  check_finite(B, "B");
  check_finite(G, "G");
  check_finite(Q, "Q");
  check_finite(R, "R");
  check_finite(P_f, "P_f");

  LinearSystem sys;
  sys.A = A;
  sys.B = B;
  sys.G = G;
  sys.Q = symmetrize(Q, "Q", warnings);
  sys.R = symmetrize(R, "R", warnings);
  sys.P_f = symmetrize(P_f, "P_f", warnings);
  sys.name = name;

  const double qmin = eigmin_sym(sys.Q);
  const double qmax = sys.Q.size() > 0 ? sys.Q.cwiseAbs().maxCoeff() : 0.0;
  if (qmin < -1e-10 * std::max(1.0, qmax)) {
    throw std::invalid_argument("Q is not positive semidefinite");
  }
  const double pfmin = eigmin_sym(sys.P_f);
  const double pfmax = sys.P_f.size() > 0 ? sys.P_f.cwiseAbs().maxCoeff() : 0.0;
  if (pfmin < -1e-10 * std::max(1.0, pfmax)) {
    throw std::invalid_argument("P_f is not positive semidefinite");
  }
  if (eigmin_sym(sys.R) <= 0.0) {
    throw std::invalid_argument("R must be positive definite");
  }
  return sys;
}

ProblemInstance make_instance(const LinearSystem& sys, const Eigen::VectorXd& x0,
                              double alpha) {
  if (x0.size() != sys.n()) {
    throw std::invalid_argument("x0 dimension does not match the system");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive and finite");
  }
  return ProblemInstance{sys, x0, alpha};
}

ValidationReport validate(const LinearSystem& sys) {
  ValidationReport rep;
  const int n = sys.n();
  const Eigen::MatrixXd Qh = psd_sqrt(sys.Q);

  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A);
  rep.stabilizable = true;
  rep.detectable = true;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> mu = es.eigenvalues()(i);
    if (std::abs(mu) < 1.0 - 1e-12) continue;
    Eigen::MatrixXcd pbh(n, n + sys.m());
    pbh.leftCols(n) = sys.A.cast<std::complex<double>>() -
                      mu * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(sys.m()) = sys.B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cutoff = 1e-10 * sv(0) * static_cast<double>(n + sys.m());
    if (sv(n - 1) <= cutoff) {
      rep.stabilizable = false;
      rep.messages.push_back("uncontrollable unstable mode at |mu|=" +
                             std::to_string(std::abs(mu)));
    }
    Eigen::MatrixXcd pbh_det(2 * n, n);
    pbh_det.topRows(n) = sys.A.cast<std::complex<double>>() -
                         mu * Eigen::MatrixXcd::Identity(n, n);
    pbh_det.bottomRows(n) = Qh.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd_d(pbh_det);
    const Eigen::VectorXd sv_d = svd_d.singularValues();
    const double cutoff_d = 1e-10 * sv_d(0) * static_cast<double>(2 * n);
    if (sv_d(n - 1) <= cutoff_d) {
      rep.detectable = false;
      rep.messages.push_back("unobservable unstable mode at |mu|=" +
                             std::to_string(std::abs(mu)));
    }
  }

  Eigen::MatrixXd BG(n, sys.m() + sys.q());
  BG.leftCols(sys.m()) = sys.B;
  BG.rightCols(sys.q()) = sys.G;
  rep.range_inclusion = numerical_rank(BG) == numerical_rank(sys.B);
  if (!rep.range_inclusion) {
    rep.messages.push_back("range(G) not contained in range(B)");
  }

  rep.terminal_coupling =
      (sys.G.transpose() * sys.P_f * sys.G).norm() > 1e-12;
  if (!rep.terminal_coupling) {
    rep.messages.push_back("G'P_fG vanishes (terminal coupling absent)");
  }
  rep.q_pd = eigmin_sym(sys.Q) > 0.0;
  if (!rep.q_pd) rep.messages.push_back("Q not positive definite");
  rep.pf_pd = eigmin_sym(sys.P_f) > 0.0;
  if (!rep.pf_pd) rep.messages.push_back("P_f not positive definite");
  return rep;
}

ProblemInstance load_system(const std::string& path,
                            std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("failed to parse " + path + ": " + e.what());
  }
  const Eigen::MatrixXd A = parse_matrix(j, "A");
  const Eigen::MatrixXd B = parse_matrix(j, "B");
  const Eigen::MatrixXd G = parse_matrix(j, "G");
  const Eigen::MatrixXd Q = parse_matrix(j, "Q");
  const Eigen::MatrixXd R = parse_matrix(j, "R");
  const Eigen::MatrixXd P_f = parse_matrix(j, "P_f");
  const std::string name = j.value("name", std::string{});
  LinearSystem sys = make_system(A, B, G, Q, R, P_f, name, warnings);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n());
  if (j.contains("x0")) {
    const auto& arr = j.at("x0");
    if (!arr.is_array() || static_cast<int>(arr.size()) != sys.n()) {
      throw std::invalid_argument("x0 must be an array of length n");
    }
    for (int i = 0; i < sys.n(); ++i) x0(i) = arr.at(i).get<double>();
  }
  const double alpha = j.value("alpha", 1.0);
  return make_instance(sys, x0, alpha);
}

void save_system(const ProblemInstance& inst, const std::string& path) {
  nlohmann::json j;
  j["name"] = inst.system.name;
  j["A"] = dump_matrix(inst.system.A);
  j["B"] = dump_matrix(inst.system.B);
  j["G"] = dump_matrix(inst.system.G);
  j["Q"] = dump_matrix(inst.system.Q);
  j["R"] = dump_matrix(inst.system.R);
  j["P_f"] = dump_matrix(inst.system.P_f);
  nlohmann::json x0 = nlohmann::json::array();
  for (int i = 0; i < inst.x0.size(); ++i) x0.push_back(inst.x0(i));
  j["x0"] = x0;
  j["alpha"] = inst.alpha;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file: " + path);
  out << j.dump(2) << "\n";
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double spectral_radius(const Eigen::MatrixXd& A) {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sidar
