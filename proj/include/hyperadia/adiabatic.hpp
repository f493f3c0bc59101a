#pragma once

// Exact adiabatic eigenvalues of the step potential. For a channel (l1, l2, l)
// the angular solution is 2F1(-nu1, nu1+M+1; |l2|+1; (1-z)/2) outside the step
// and 2F1(-nu2, nu2+M+1; |l1|+1; (1+z)/2) inside it; nu1 is fixed by equating
// their logarithmic derivatives at z = -1 + 1/rho^2.
//
// The root is located in the offset eps = nu1 - l rather than in nu1 itself,
// since at large rho eps becomes far smaller than the spacing of doubles near l.

#include <optional>
#include <string>
#include <vector>

#include "hyperadia/channel.hpp"
#include "hyperadia/specfun.hpp"

namespace hyperadia {

struct SolverConfig {
  specfun::HypergeometricConfig f1{};
  int scan_points = 64;          // minimum geometric scan points below 1 - delta
  double scan_delta = 1e-10;     // upper margin, and the lower end unless rho demands smaller
  int refine_points = 512;       // denser rescan when the first scan finds no root
  double residual_rel_tol = 1e-9;  // accepted |D_R - D_L| / (|D_R| + |D_L|), i.e. |W| normalized
  int max_iterations = 200;      // root refinement budget
};

struct AdiabaticSolution {
  double rho = 0.0;
  double nu1 = 0.0;
  double nu1_offset = 0.0;  // nu1 - l, carried separately for precision
  double lambda = 0.0;      // ((2 nu1 + M + 1)^2 - 1/4) / rho^2
  double v_eff = 0.0;       // lambda minus the free centrifugal term
  double residual = 0.0;    // D_R - D_L at the root (NaN if a function vanishes there)

  // The same effective potential evaluated as the difference lambda - free
  // term, in extended precision. Agrees with v_eff up to the conditioning
  // factor lambda / v_eff.
  double v_eff_by_subtraction(const Channel& ch) const;
};

// ((N+1)^2 - 1/4) / rho^2
double free_lambda(const Channel& ch, double rho);

struct MatchingTerms {
  double right;  // d/dz ln F_R at the matching point
  double left;   // d/dz ln F_L at the matching point
  double residual() const { return right - left; }
};

// Logarithmic derivatives for nu1 = l + offset.
MatchingTerms matching_terms(const Channel& ch, const StepPotential& pot, double rho, double offset,
                             const SolverConfig& cfg = {});

double matching_residual(const Channel& ch, const StepPotential& pot, double rho, double nu1_trial,
                         const SolverConfig& cfg = {});

// (F_R' F_L - F_L' F_R) / (|F_R' F_L| + |F_L' F_R|) at the matching point, for
// nu1 = l + offset. Equal to sign(F_R F_L) (D_R - D_L) / (|D_R| + |D_L|)
// wherever both functions are nonzero, and continuous across their nodes,
// where the residual has poles. The solver brackets on this.
double matching_wronskian(const Channel& ch, const StepPotential& pot, double rho, double offset,
                          const SolverConfig& cfg = {});

AdiabaticSolution solve(const Channel& ch, const StepPotential& pot, double rho,
                        const SolverConfig& cfg = {});

struct SweepPoint {
  double rho = 0.0;
  std::optional<AdiabaticSolution> solution;
  std::string error;  // empty on success
};

struct SweepReport {
  Channel channel;
  std::vector<SweepPoint> points;

  bool ok() const;
  std::vector<double> failed_rhos() const;
  std::vector<AdiabaticSolution> solutions() const;  // successful points only
};

// Serial sweep with continuation: each root seeds the bracket of the next point.
SweepReport sweep(const Channel& ch, const StepPotential& pot, const std::vector<double>& rho_grid,
                  const SolverConfig& cfg = {});

// Independent solves distributed over OpenMP threads. Same results as sweep().
SweepReport sweep_parallel(const Channel& ch, const StepPotential& pot,
                           const std::vector<double>& rho_grid, const SolverConfig& cfg = {});

// min..max inclusive, linear or logarithmic spacing.
std::vector<double> make_grid(double min, double max, int points, bool logarithmic);

}  // namespace hyperadia
