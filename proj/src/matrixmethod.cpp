#include "hyperadia/matrixmethod.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hyperadia/adiabatic.hpp"
#include "hyperadia/errors.hpp"
#include "hyperadia/specfun.hpp"

namespace hyperadia {

namespace {

const double kRhoMin = 1.0 / std::sqrt(2.0);

void check_spec(const RitzBasisSpec& spec) {
  if (spec.n_max < spec.channel.M() + 2 * spec.channel.l) {
    std::ostringstream os;
    os << "n_max=" << spec.n_max << " does not reach channel " << spec.channel.label() << " (N="
       << spec.channel.N() << ")";
    throw DomainError(os.str());
  }
  if (spec.quadrature_nodes < 0) throw DomainError("quadrature_nodes must be >= 0");
}

// Basis values on a set of points: phi(k, i) = phi_i(z_k), with 1+z supplied
// directly so points near z = -1 keep their relative accuracy.
struct BasisTable {
  Eigen::MatrixXd phi;
  Eigen::VectorXd weights;
};

void fill_node(BasisTable& t, int k, double one_plus_z, int size, int a1, int a2, const std::vector<double>& inv_norm) {
  const double z = one_plus_z - 1.0;
  const double one_minus_z = 2.0 - one_plus_z;
  const double env = std::pow(one_plus_z, 0.5 * a1) * std::pow(one_minus_z, 0.5 * a2);
  const auto p = specfun::jacobi_polynomials(size - 1, a2, a1, z);
  for (int i = 0; i < size; ++i) t.phi(k, i) = env * p[i] * inv_norm[i];
}

BasisTable tabulate(const RitzBasisSpec& spec, double lo_one_plus_z, double width, bool parallel) {
  const int size = spec.basis_size();
  const int a1 = spec.channel.abs_l1();
  const int a2 = spec.channel.abs_l2();
  const auto rule = specfun::gauss_legendre(spec.nodes());
  const int nq = static_cast<int>(rule.nodes.size());
  std::vector<double> inv_norm(size);
  for (int i = 0; i < size; ++i) inv_norm[i] = std::exp(-0.5 * specfun::jacobi_log_norm(i, a2, a1));

  BasisTable t{Eigen::MatrixXd(nq, size), Eigen::VectorXd(nq)};
  for (int k = 0; k < nq; ++k) t.weights(k) = 0.5 * width * rule.weights[k];
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nq; ++k)
      fill_node(t, k, lo_one_plus_z + 0.5 * width * (1.0 + rule.nodes[k]), size, a1, a2, inv_norm);
  } else {
    for (int k = 0; k < nq; ++k)
      fill_node(t, k, lo_one_plus_z + 0.5 * width * (1.0 + rule.nodes[k]), size, a1, a2, inv_norm);
  }
  return t;
}

double entry(const BasisTable& t, int i, int j) {
  double s = 0.0;
  for (int k = 0; k < t.phi.rows(); ++k) s += t.weights(k) * t.phi(k, i) * t.phi(k, j);
  return s;
}

Eigen::MatrixXd assemble(const RitzBasisSpec& spec, const StepPotential& pot, double rho, bool parallel) {
  check_spec(spec);
  if (!(rho > kRhoMin) || !std::isfinite(rho)) {
    std::ostringstream os;
    os << "rho must exceed 1/sqrt(2) for a nonempty step interval; got " << rho;
    throw DomainError(os.str());
  }
  const int n = spec.basis_size();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  if (pot.v0bar == 0.0) return v;
  // Step support z in [-1, -1 + 1/rho^2], i.e. 1+z in [0, 1/rho^2].
  const BasisTable t = tabulate(spec, 0.0, 1.0 / (rho * rho), parallel);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) v(i, j) = pot.v0bar * entry(t, i, j);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) v(i, j) = pot.v0bar * entry(t, i, j);
  }
  v.triangularView<Eigen::StrictlyLower>() = v.transpose().triangularView<Eigen::StrictlyLower>();
  return v;
}

std::string dump_matrix(const Eigen::MatrixXd& h, const std::string& dir) {
  static std::atomic<int> counter{0};
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path base = dir.empty() ? fs::temp_directory_path(ec) : fs::path(dir);
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const fs::path path = base / ("hyperadia_ritz_" + std::to_string(stamp) + "_" + std::to_string(counter++) + ".txt");
  std::ofstream out(path);
  out.precision(17);
  out << h.rows() << " " << h.cols() << "\n" << h << "\n";
  return out ? path.string() : std::string("<dump failed: ") + path.string() + ">";
}

double max_abs_offdiag(const Eigen::MatrixXd& h) {
  double m = 0.0;
  for (int j = 0; j < h.cols(); ++j)
    for (int i = 0; i < h.rows(); ++i)
      if (i != j) m = std::max(m, std::fabs(h(i, j)));
  return m;
}

}  // namespace

int RitzBasisSpec::basis_size() const { return (n_max - channel.M()) / 2 + 1; }

int RitzBasisSpec::nodes() const {
  if (quadrature_nodes > 0) return quadrature_nodes;
  const int exact = basis_size() + (channel.M() + 1) / 2;  // 2 nq - 1 >= 2 (size-1) + M
  return std::max(basis_size() + 8, exact);
}

double RitzSpectrum::v_eff(int l) const {
  if (l < 0 || l >= static_cast<int>(eigenvalues.size())) throw DomainError("eigenvalue index out of range");
  const Channel ch{channel.l1, channel.l2, l};
  return eigenvalues[l] - free_lambda(ch, rho);
}

Eigen::MatrixXd potential_matrix(const RitzBasisSpec& spec, const StepPotential& pot, double rho) {
  return assemble(spec, pot, rho, true);
}

Eigen::MatrixXd potential_matrix_serial(const RitzBasisSpec& spec, const StepPotential& pot, double rho) {
  return assemble(spec, pot, rho, false);
}

Eigen::MatrixXd basis_gram_matrix(const RitzBasisSpec& spec) {
  check_spec(spec);
  const int n = spec.basis_size();
  const BasisTable t = tabulate(spec, 0.0, 2.0, false);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g(i, j) = g(j, i) = entry(t, i, j);
  return g;
}

RitzSpectrum diagonalize_symmetric(const Eigen::MatrixXd& h, const RitzOptions& opts) {
  // The solver rescales internally and would perturb an already diagonal
  // matrix (the zero-strength case) in the last bits.
  if (h.rows() > 0 && max_abs_offdiag(h) == 0.0) {
    RitzSpectrum s;
    for (int i = 0; i < h.rows(); ++i) s.eigenvalues.push_back(h(i, i));
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge; matrix dumped to " + dump_matrix(h, opts.dump_dir));
  }
  const Eigen::MatrixXd& q = es.eigenvectors();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(h.rows(), h.cols());
  const double resid = h.rows() == 0 ? 0.0 : (q.transpose() * q - id).cwiseAbs().maxCoeff();
  if (!(resid < opts.orthogonality_tol)) {
    std::ostringstream os;
    os << "eigenvectors not orthonormal (residual " << resid << "); matrix dumped to "
       << dump_matrix(h, opts.dump_dir);
    throw NumericError(os.str());
  }
  RitzSpectrum s;
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  s.orthogonality_residual = resid;
  return s;
}

RitzSpectrum ritz_eigenvalues(const RitzBasisSpec& spec, const StepPotential& pot, double rho,
                              const RitzOptions& opts) {
  Eigen::MatrixXd h = potential_matrix(spec, pot, rho);
  for (int i = 0; i < h.rows(); ++i) h(i, i) += free_lambda({spec.channel.l1, spec.channel.l2, i}, rho);
  RitzSpectrum s = diagonalize_symmetric(h, opts);
  s.channel = spec.channel;
  s.n_max = spec.n_max;
  s.rho = rho;
  return s;
}

double ritz_v_eff(const RitzBasisSpec& spec, const StepPotential& pot, double rho) {
  return ritz_eigenvalues(spec, pot, rho).v_eff(spec.channel.l);
}

std::vector<ConvergenceRow> convergence_study(const Channel& ch, const StepPotential& pot, double rho,
                                              const std::vector<int>& n_max_list) {
  for (std::size_t i = 1; i < n_max_list.size(); ++i)
    if (!(n_max_list[i] > n_max_list[i - 1])) throw DomainError("n_max list must be strictly ascending");
  const double direct = solve(ch, pot, rho).v_eff;
  std::vector<ConvergenceRow> rows(n_max_list.size());
  std::vector<std::exception_ptr> errors(n_max_list.size());
  const long n = static_cast<long>(n_max_list.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      const double v = ritz_v_eff({ch, n_max_list[i], 0}, pot, rho);
      rows[i] = {n_max_list[i], v, direct, v - direct};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace hyperadia
