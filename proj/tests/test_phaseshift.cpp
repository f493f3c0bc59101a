#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "hyperadia/errors.hpp"
#include "hyperadia/phaseshift.hpp"
#include "hyperadia/specfun.hpp"

namespace {

using namespace hyperadia;
using std::numbers::pi;

const StepPotential kPot = StepPotential::from_lambda_star(10.0);

std::vector<double> log_ks(double lo, double hi, int n) {
  std::vector<double> ks;
  for (int i = 0; i < n; ++i) ks.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return ks;
}

std::vector<double> deltas_of(const std::vector<PhaseShiftResult>& rs) {
  std::vector<double> d;
  for (const auto& r : rs) d.push_back(r.delta);
  return d;
}

TEST(PhaseShift, FreeStrengthGivesZero) {
  for (const Channel ch : {Channel{0, 0, 0}, Channel{1, 0, 0}, Channel{0, 2, 1}})
    for (double k : {1e-5, 1e-3, 1e-1}) {
      const auto r = channel_phase_shift({ch, StepPotential::from_v0bar(0.0), k});
      EXPECT_LT(std::fabs(r.delta), 1e-8) << ch.label() << " k=" << k;
    }
}

const Channel kTested[] = {{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}, {2, 0, 0}, {0, 1, 1}};

TEST(PhaseShift, RepulsiveIsNegativeAndShrinksTowardZeroK) {
  const auto ks = log_ks(1e-6, 1e-3, 7);
  for (const Channel ch : kTested) {
    const auto rs = phase_shift_sweep(ch, kPot, ks);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      EXPECT_LT(rs[i].delta, 0.0) << ch.label() << " k=" << ks[i];
      if (i > 0) EXPECT_LT(std::fabs(rs[i - 1].delta), std::fabs(rs[i].delta)) << ch.label() << " k=" << ks[i];
    }
  }
}

TEST(PhaseShift, TailHandoffIndependence) {
  PhaseShiftConfig moved;
  moved.rho_switch = 2e3;
  for (const Channel ch : {Channel{0, 0, 0}, Channel{1, 0, 0}, Channel{0, 1, 1}, Channel{2, 0, 0}})
    for (double k : {1e-3, 1e-4, 1e-6}) {
      const RadialProblem p{ch, kPot, k};
      const double a = channel_phase_shift(p).delta;
      const double b = channel_phase_shift(p, moved).delta;
      EXPECT_LT(std::fabs(a - b), 0.01 * std::fabs(a)) << ch.label() << " k=" << k;
    }
}

TEST(PhaseShift, TwoRadiusConsistency) {
  for (double k : {1e-2, 1e-4, 1e-6}) {
    const auto r = channel_phase_shift({{0, 0, 0}, kPot, k});
    EXPECT_LT(std::fabs(r.delta - r.delta_check), 1e-4);
    EXPECT_EQ(r.retries, 0);
    EXPECT_DOUBLE_EQ(r.rho_max, 20.0 / k);
  }
}

// Weak coupling: the phase approaches the first Born term
//   delta_B = -(pi/2) int U(rho) J_nu(k rho)^2 rho d rho.
TEST(PhaseShift, WeakCouplingMatchesBorn) {
  using boost::math::quadrature::gauss_kronrod;
  const auto weak = StepPotential::from_v0bar(1e-3);
  for (const Channel ch : {Channel{1, 0, 0}, Channel{2, 1, 0}}) {
    const double k = 0.05;
    const auto table = EffectivePotentialTable::build(ch, weak);
    const int nu = ch.N() + 1;
    auto f = [&](double r) {
      const double j = specfun::bessel_jy(nu, k * r).J;
      return table(r) * j * j * r;
    };
    const double ra = 1.0 / std::sqrt(2.0);
    double integral = gauss_kronrod<double, 61>::integrate(f, 1e-12, ra, 15, 1e-13);
    for (double a = ra, b = 2.0; a < 400.0; a = b, b *= 2.0)
      integral += gauss_kronrod<double, 61>::integrate(f, a, std::min(b, 400.0), 15, 1e-13);
    const double born = -0.5 * pi * integral;
    const double delta = channel_phase_shift({ch, weak, k}, table).delta;
    EXPECT_NEAR(delta, born, 2e-3 * std::fabs(born)) << ch.label();
  }
}

TEST(PhaseShift, InverseLogFitRecoversLawConstant) {
  const auto ks = log_ks(1e-6, 1e-2, 17);
  const Channel ch{0, 0, 0};
  const double B = 1.0 / (2.0 * (ch.N() + 1));
  const auto fit = fit_inverse_log(ks, deltas_of(phase_shift_sweep(ch, kPot, ks)));
  EXPECT_NEAR(fit.constant(), pi / (4.0 * B), 0.01 * pi / (4.0 * B));
}

// For higher log-class channels the first Born term gives delta ln k -> pi / (4 B (N+1)),
// which is pi/2 for every N.
TEST(PhaseShift, InverseLogConstantIsOrderIndependent) {
  const auto ks = log_ks(1e-6, 1e-2, 17);
  for (const Channel ch : {Channel{0, 1, 0}, Channel{0, 0, 1}, Channel{0, 2, 1}}) {
    const auto fit = fit_inverse_log(ks, deltas_of(phase_shift_sweep(ch, kPot, ks)));
    EXPECT_NEAR(fit.constant(), 0.5 * pi, 0.01 * 0.5 * pi) << ch.label();
  }
}

TEST(PhaseShift, PowerLawSlopes) {
  const auto ks = log_ks(1e-4, 1e-2, 9);
  for (const Channel ch : {Channel{1, 0, 0}, Channel{-1, 1, 0}, Channel{2, 0, 0}, Channel{3, 0, 1}}) {
    const auto fit = fit_power_law(ks, deltas_of(phase_shift_sweep(ch, kPot, ks)));
    const double expected = mott_massey_criterion(ch).exponent;
    EXPECT_NEAR(fit.exponent, expected, 0.05 * expected) << ch.label();
  }
}

TEST(PhaseShift, ParallelSweepMatchesSerial) {
  const auto ks = log_ks(1e-5, 1e-2, 6);
  for (const Channel ch : {Channel{0, 0, 0}, Channel{1, 1, 0}}) {
    const auto table = EffectivePotentialTable::build(ch, kPot);
    const auto a = phase_shift_sweep(table, ks, {}, true);
    const auto b = phase_shift_sweep(table, ks, {}, false);
    // Fully serial path: the table itself comes from the continuation sweep.
    const auto c = phase_shift_sweep_serial(ch, kPot, ks);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].delta, b[i].delta) << ch.label() << " k=" << ks[i];
      EXPECT_NEAR(c[i].delta, a[i].delta, 1e-10 * std::fabs(a[i].delta)) << ch.label() << " k=" << ks[i];
    }
  }
}

TEST(PhaseShift, TableNodesAndRegions) {
  const Channel ch{0, 1, 1};
  const auto t = EffectivePotentialTable::build(ch, kPot);
  EXPECT_EQ(t(0.5), kPot.v0bar);
  EXPECT_EQ(t(1.0 / std::sqrt(2.0)), kPot.v0bar);
  const auto& rho = t.rho_nodes();
  EXPECT_GE(static_cast<double>(rho.size() - 1), 16.0 * std::log10(1e3 * std::sqrt(2.0)));
  EXPECT_EQ(rho.back(), 1e3);
  for (std::size_t j = 1; j < rho.size(); j += 7)
    EXPECT_NEAR(t(rho[j]), solve(ch, kPot, rho[j]).v_eff, 1e-12 * t(rho[j])) << "rho=" << rho[j];
  EXPECT_EQ(t(5e3), model_v_eff(*t.tail_model(), 5e3));
  EXPECT_EQ(t.tail_model()->kind, ModelKind::Best);

  EffectivePotentialTable::Options serial;
  serial.parallel = false;
  const auto s = EffectivePotentialTable::build(ch, kPot, serial);
  for (std::size_t j = 0; j < rho.size(); ++j) EXPECT_NEAR(s.v_nodes()[j], t.v_nodes()[j], 1e-13 * t.v_nodes()[j]);
}

TEST(PhaseShift, Errors) {
  EXPECT_THROW(channel_phase_shift({{0, 0, 0}, kPot, 0.0}), DomainError);
  EXPECT_THROW(channel_phase_shift({{0, 0, 0}, kPot, 1e-3, 0.5}), DomainError);
  EXPECT_THROW(channel_phase_shift({{0, 0, 0}, kPot, 1e-3, 0.0, 1e5}), DomainError);
  EXPECT_THROW(channel_phase_shift({{0, 0, 0}, kPot, 1e-3, 0.0, 0.0, coefficient_q({1, 0, 0}, kPot)}),
               WrongClassError);
  EffectivePotentialTable::Options bad;
  bad.tail_model = coefficients_log({0, 0, 0}, kPot);
  EXPECT_THROW(EffectivePotentialTable::build({1, 0, 0}, kPot, bad), WrongClassError);
  const auto t = EffectivePotentialTable::build({0, 0, 0}, kPot);
  EXPECT_THROW(channel_phase_shift({{0, 1, 0}, kPot, 1e-3}, t), DomainError);

  // An unreachable consistency tolerance exhausts the retries.
  PhaseShiftConfig strict;
  strict.consistency_tol = 0.0;
  EXPECT_THROW(channel_phase_shift({{0, 0, 0}, kPot, 1e-3}, t, strict), NumericError);
}

TEST(HardDisc, SWaveInverseLog) {
  const double d = hard_disc_phase_shift(0, 1e-6);
  EXPECT_LT(d, 0.0);
  EXPECT_NEAR(d * std::log(1e-6), 0.5 * pi, 0.1 * 0.5 * pi);
}

TEST(HardDisc, PowerLawForHigherWaves) {
  const auto ks = log_ks(1e-4, 1e-2, 5);
  for (int L : {1, 2}) {
    std::vector<double> d;
    for (double k : ks) d.push_back(hard_disc_phase_shift(L, k));
    EXPECT_NEAR(fit_power_law(ks, d).exponent, 2.0 * L, 0.05 * 2.0 * L) << "L=" << L;
  }
}

TEST(HardDisc, ContinuousAndVanishingAtZero) {
  for (int L = 0; L <= 3; ++L) {
    // Continuous modulo pi: a zero of Y_L moves the principal value across +-pi/2.
    double prev = hard_disc_phase_shift(L, 1e-2);
    for (double x = 1.1e-2; x <= 10.0; x += 1e-3) {
      const double d = hard_disc_phase_shift(L, x);
      const double jump = std::remainder(d - prev, pi);
      EXPECT_LT(std::fabs(jump), 0.01) << "L=" << L << " x=" << x;
      prev = d;
    }
    double mag = INFINITY;
    for (double x = 1e-2; x > 1e-13; x *= 1e-2) {
      const double d = std::fabs(hard_disc_phase_shift(L, x));
      EXPECT_LT(d, mag) << "L=" << L << " x=" << x;
      mag = d;
    }
    EXPECT_LT(mag, L == 0 ? 0.06 : 1e-20) << "L=" << L;
  }
  EXPECT_THROW(hard_disc_phase_shift(0, 0.0), DomainError);
  EXPECT_THROW(hard_disc_phase_shift(0, 10.5), DomainError);
  EXPECT_THROW(hard_disc_phase_shift(-1, 1.0), DomainError);
}

TEST(MottMassey, TailExponents) {
  const int s[] = {4, 6, 8};
  for (int a = 1; a <= 3; ++a) {
    const auto r = mott_massey_criterion({a, 0, 0});
    EXPECT_EQ(r.s, s[a - 1]);
    EXPECT_EQ(r.exponent, 2 * a);
    EXPECT_EQ(r.min_N, a);
    EXPECT_TRUE(r.tail_dominant);
    EXPECT_EQ(mott_massey_criterion({-a, 3, 2}).s, r.s);
  }
  EXPECT_THROW(mott_massey_criterion({0, 2, 0}), WrongClassError);
}

TEST(Fits, ExactOnSyntheticData) {
  const std::vector<double> ks = {1e-6, 1e-4, 1e-2};
  std::vector<double> inv, pw;
  for (double k : ks) {
    inv.push_back(1.0 / (0.25 * std::log(k) - 3.0));
    pw.push_back(-7.0 * k * k * k);
  }
  const auto a = fit_inverse_log(ks, inv);
  EXPECT_NEAR(a.slope, 0.25, 1e-12);
  EXPECT_NEAR(a.intercept, -3.0, 1e-12);
  EXPECT_NEAR(a.constant(), 4.0, 1e-11);
  const auto b = fit_power_law(ks, pw);
  EXPECT_NEAR(b.exponent, 3.0, 1e-12);
  EXPECT_NEAR(b.intercept, std::log(7.0), 1e-11);
  EXPECT_THROW(fit_power_law({1e-3}, {1.0}), DomainError);
  EXPECT_THROW(fit_power_law({1e-3, 1e-3}, {1.0, 2.0}), DomainError);
  EXPECT_THROW(fit_inverse_log({1e-3, 1e-2}, {0.0, 1.0}), DomainError);
}

}  // namespace
