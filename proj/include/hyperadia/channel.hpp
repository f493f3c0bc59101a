#pragma once

#include <cstdlib>
#include <string>

namespace hyperadia {

// Conserved quantum numbers of one adiabatic channel. l1 and l2 may carry a
// sign; every derived quantity uses their absolute values.
struct Channel {
  int l1 = 0;  // pair angular momentum
  int l2 = 0;  // spectator angular momentum
  int l = 0;   // radial node index, >= 0

  int abs_l1() const { return std::abs(l1); }
  int abs_l2() const { return std::abs(l2); }
  int M() const { return abs_l1() + abs_l2(); }
  int N() const { return 2 * l + M(); }
  // In-plane angular momentum of the three-body state.
  int lambda_inplane() const { return l1 + l2; }

  std::string label() const {
    return "(" + std::to_string(l1) + "," + std::to_string(l2) + "," + std::to_string(l) + ")";
  }
  bool operator==(const Channel&) const = default;
};

// Dimensionless step height V0bar = (2m/hbar^2) V0 sigma^2.
struct StepPotential {
  double v0bar = 0.0;

  // Lambda* = (h^2 / (m V0 sigma^2))^{1/2} with h = 2 pi hbar gives
  // V0bar = 8 pi^2 / Lambda*^2.
  static StepPotential from_lambda_star(double lambda_star);
  static StepPotential from_v0bar(double v0bar);
};

}  // namespace hyperadia
