#pragma once

// Large-rho models of the effective potential. Channels with l1 == 0 decay as
// an inverse logarithm,
//   rho^2 V_KL    = 1 / (A + B ln rho)
//   rho^2 V_wider = 1 / (A* + B* ln rho)
//   rho^2 V_best  = 1 / (A + B ln rho) + 1 / (4 (N+1)^2 (A + B ln rho)^2)
// and channels with l1 != 0 decay as an inverse power, V = q / rho^(2|l1| + 2).

#include <optional>
#include <string>
#include <vector>

#include "hyperadia/adiabatic.hpp"
#include "hyperadia/channel.hpp"

namespace hyperadia {

enum class ModelKind { KL, Wider, Best, InversePower };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct AsymptoticModel {
  ModelKind kind = ModelKind::Best;
  double A = 0.0;
  double B = 0.0;
  double A_star = 0.0;
  double B_star = 0.0;
  double q = 0.0;  // inverse-power amplitude; zero for the log class
  Channel channel;
  StepPotential potential;

  // Same coefficients, different model formula. Switching between the log
  // class and the inverse-power class raises WrongClassError.
  AsymptoticModel as(ModelKind k) const;
};

// A~ = sqrt(8) I0(x) / (sqrt(V0) I1(x)) - H_l - H_{l+|l2|} + ln 2 with x = sqrt(V0/2).
// The nu1 offset then behaves as 1 / (A~ + 2 ln rho).
double coefficient_A_tilde(const Channel& ch, const StepPotential& pot);

// A written directly with 2 I0(x) / (x I1(x)); equals A~ / (4(N+1)).
double coefficient_A(const Channel& ch, const StepPotential& pot);

// Log-class coefficients (l1 == 0). A is taken from the A~ route.
AsymptoticModel coefficients_log(const Channel& ch, const StepPotential& pot, ModelKind kind = ModelKind::Best);

// 1/q = 2^(|l1|-2) / ((N+1) C(N-l, |l1|) C(|l1|+l, |l1|))
//       * (1/|l1| + 2 I_|l1|(x) / (x I_{|l1|+1}(x)))
AsymptoticModel coefficient_q(const Channel& ch, const StepPotential& pot);

// The same q with the Bessel ratio prefactor written 2 sqrt(2) / sqrt(V0).
double coefficient_q_alternate(const Channel& ch, const StepPotential& pot);

// Model V_eff(rho). Requires rho > 1 and, for the log class, a positive
// logarithmic denominator.
double model_v_eff(const AsymptoticModel& model, double rho);

// Predicted nu1 - l: 1 / (A~ + 2 ln rho) for the log class,
// q rho^(-2|l1|) / (4 (N+1)) for the inverse-power class.
double model_offset(const AsymptoticModel& model, double rho);

struct ComparisonRow {
  double rho = 0.0;
  double v_exact = 0.0;
  // log class
  double v_kl = 0.0, v_wider = 0.0, v_best = 0.0;
  double err_kl = 0.0, err_wider = 0.0, err_best = 0.0;
  // inverse-power class
  double v_power = 0.0, err_power = 0.0;
  std::string error;  // non-empty if the exact solve failed at this rho
};

struct ModelComparison {
  Channel channel;
  bool log_class = true;
  AsymptoticModel model;  // Best for the log class, InversePower otherwise
  std::vector<ComparisonRow> rows;
};

// Exact sweep against the models. Relative errors are |model - exact| / exact.
ModelComparison compare_models(const Channel& ch, const StepPotential& pot, const std::vector<double>& rho_grid,
                               const SolverConfig& cfg = {});

}  // namespace hyperadia
