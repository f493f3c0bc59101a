#pragma once

// Rayleigh-Ritz estimate of the adiabatic eigenvalues: the step potential is
// projected onto the unit-normalized harmonics
//   phi_l(z) = (1+z)^{|l1|/2} (1-z)^{|l2|/2} P_l^{(|l2|,|l1|)}(z) / sqrt(h_l)
// of fixed (l1, l2), and the centrifugal diagonal ((N'+1)^2 - 1/4)/rho^2 added.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hyperadia/channel.hpp"

namespace hyperadia {

struct RitzBasisSpec {
  Channel channel;               // only |l1|, |l2| select the block; l picks the eigenvalue
  int n_max = 100;               // largest harmonic order N' kept
  int quadrature_nodes = 0;      // 0 selects the default below

  // Number of retained radial indices l' = 0 .. (n_max - M) / 2.
  int basis_size() const;
  // Nodes actually used: the explicit count, or basis size + 8 widened so the
  // polynomial integrand of degree 2 l'_max + M is integrated exactly.
  int nodes() const;
};

struct RitzSpectrum {
  Channel channel;
  int n_max = 0;
  double rho = 0.0;
  std::vector<double> eigenvalues;      // ascending lambda estimates
  double orthogonality_residual = 0.0;  // max |Q^T Q - I|

  // eigenvalues[l] minus the free term of channel (l1, l2, l).
  double v_eff(int l) const;
};

// V0bar * int over the step support of phi_i phi_j, upper triangle mirrored.
// Rows are distributed over OpenMP threads.
Eigen::MatrixXd potential_matrix(const RitzBasisSpec& spec, const StepPotential& pot, double rho);
// Single-threaded reference for the same matrix.
Eigen::MatrixXd potential_matrix_serial(const RitzBasisSpec& spec, const StepPotential& pot, double rho);

// Gram matrix of the basis over [-1, 1] with the same normalization; identity
// up to rounding when the norms are right.
Eigen::MatrixXd basis_gram_matrix(const RitzBasisSpec& spec);

struct RitzOptions {
  double orthogonality_tol = 1e-12;
  std::string dump_dir;  // where a failing matrix is written; empty = system temp dir
};

// Dense symmetric diagonalization of centrifugal diagonal + potential matrix.
// Eigensolver failure or an orthogonality residual above tolerance raises
// NumericError naming the file the matrix was dumped to.
RitzSpectrum ritz_eigenvalues(const RitzBasisSpec& spec, const StepPotential& pot, double rho,
                              const RitzOptions& opts = {});

// Convenience: V_eff of spec.channel from the truncated matrix.
double ritz_v_eff(const RitzBasisSpec& spec, const StepPotential& pot, double rho);

// Diagonalizes an arbitrary symmetric matrix with the same checks. Exposed for
// analytic small-matrix tests.
RitzSpectrum diagonalize_symmetric(const Eigen::MatrixXd& h, const RitzOptions& opts = {});

struct ConvergenceRow {
  int n_max = 0;
  double v_ritz = 0.0;
  double v_direct = 0.0;
  double gap = 0.0;  // v_ritz - v_direct
};

// One row per n_max (ascending), against the exact solver.
std::vector<ConvergenceRow> convergence_study(const Channel& ch, const StepPotential& pot, double rho,
                                              const std::vector<int>& n_max_list);

}  // namespace hyperadia
