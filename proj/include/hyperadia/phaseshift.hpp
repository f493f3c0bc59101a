#pragma once

// Single-channel low-energy phase shifts. The radial equation
//   -phi'' + (lambda(rho) - k^2) phi = 0,  lambda = ((N+1)^2 - 1/4)/rho^2 + V_eff(rho)
// is solved with the variable-phase equation measured against the free
// Riccati-Bessel pair of order N+1, so phi -> sqrt(rho)[cos d J - sin d Y].
// The off-diagonal couplings between adiabatic channels are dropped.

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <optional>
#include <vector>

#include "hyperadia/adiabatic.hpp"
#include "hyperadia/asymptotics.hpp"
#include "hyperadia/channel.hpp"

namespace hyperadia {

// V_eff(rho) of one channel, tabulated once and shared read-only by every k.
//   rho <= 1/sqrt(2)            : V0bar (the step covers the whole interval)
//   1/sqrt(2) < rho <= rho_switch: cubic spline of ln(rho^2 V_eff) in ln rho
//   rho > rho_switch            : asymptotic model
class EffectivePotentialTable {
 public:
  struct Options {
    double rho_switch = 1e3;
    int points_per_decade = 16;
    bool parallel = true;  // false uses the continuation sweep as the serial reference
    SolverConfig solver{};
    std::optional<AsymptoticModel> tail_model;  // default: Best or InversePower by class
  };

  static EffectivePotentialTable build(const Channel& ch, const StepPotential& pot, const Options& opts);
  static EffectivePotentialTable build(const Channel& ch, const StepPotential& pot) { return build(ch, pot, Options{}); }

  double operator()(double rho) const;

  const Channel& channel() const { return channel_; }
  const StepPotential& potential() const { return potential_; }
  double rho_switch() const { return rho_switch_; }
  const std::optional<AsymptoticModel>& tail_model() const { return tail_; }
  const std::vector<double>& rho_nodes() const { return rho_; }
  const std::vector<double>& v_nodes() const { return v_; }

 private:
  Channel channel_;
  StepPotential potential_;
  double rho_switch_ = 0.0;
  double log_rho0_ = 0.0;
  double h_ = 0.0;
  std::vector<double> rho_, v_;
  std::vector<double> y_;  // ln(rho^2 V) at the nodes
  std::optional<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;  // empty when V0bar = 0
  std::optional<AsymptoticModel> tail_;
};

struct RadialProblem {
  Channel channel;
  StepPotential potential;
  double k = 0.0;
  double rho_min = 0.0;  // 0 selects 1/sqrt(2)
  double rho_max = 0.0;  // 0 selects k_rho_max / k
  std::optional<AsymptoticModel> tail_model;
};

struct PhaseShiftConfig {
  double k_rho_max = 20.0;
  double rho_switch = 1e3;
  int points_per_decade = 16;
  double rel_tol = 1e-11;
  double consistency_tol = 1e-4;  // rad, between rho_max and 1.1 rho_max
  int max_retries = 3;            // rho_max shifts before giving up
  SolverConfig solver{};
};

struct PhaseShiftResult {
  double k = 0.0;
  double delta = 0.0;           // (-pi/2, pi/2], tail-corrected, at rho_max
  double delta_check = 0.0;     // the same extracted at 1.1 rho_max
  double tail_correction = 0.0; // contribution beyond rho_max included in delta
  double rho_max = 0.0;         // radius finally used
  int retries = 0;
  long steps = 0;               // accepted integrator steps
};

PhaseShiftResult channel_phase_shift(const RadialProblem& problem, const PhaseShiftConfig& cfg = {});

// Reuses a table built for the same channel and potential.
PhaseShiftResult channel_phase_shift(const RadialProblem& problem, const EffectivePotentialTable& table,
                                     const PhaseShiftConfig& cfg = {});

// One table, then one phase per k. The parallel version distributes k over
// OpenMP threads. The serial version also builds its table with the
// continuation sweep, so the two agree to solver precision; for a shared table
// the k loop gives identical results either way.
std::vector<PhaseShiftResult> phase_shift_sweep(const Channel& ch, const StepPotential& pot,
                                                const std::vector<double>& ks, const PhaseShiftConfig& cfg = {});
std::vector<PhaseShiftResult> phase_shift_sweep_serial(const Channel& ch, const StepPotential& pot,
                                                       const std::vector<double>& ks,
                                                       const PhaseShiftConfig& cfg = {});
std::vector<PhaseShiftResult> phase_shift_sweep(const EffectivePotentialTable& table, const std::vector<double>& ks,
                                                const PhaseShiftConfig& cfg, bool parallel);

// Hard disc of radius sigma in partial wave L: tan d = J_L(k sigma) / Y_L(k sigma).
// 0 < k_sigma <= 10.
double hard_disc_phase_shift(int L, double k_sigma);

struct MottMasseyReport {
  int s = 0;                  // tail exponent of V ~ rho^-s
  int min_N = 0;
  bool tail_dominant = false; // N+1 > (s-2)/2 at the minimum N
  int exponent = 0;           // predicted delta ~ k^exponent
};

MottMasseyReport mott_massey_criterion(const Channel& ch);

// 1/delta = slope ln k + intercept by least squares. For delta ~ c / ln k the
// law constant is c = 1/slope.
struct InverseLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double constant() const { return 1.0 / slope; }
};
InverseLogFit fit_inverse_log(const std::vector<double>& ks, const std::vector<double>& deltas);

// ln|delta| = exponent ln k + intercept by least squares.
struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;
};
PowerLawFit fit_power_law(const std::vector<double>& ks, const std::vector<double>& deltas);

}  // namespace hyperadia
