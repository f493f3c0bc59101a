#include "hyperadia/phaseshift.hpp"

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>

#include "hyperadia/errors.hpp"
#include "hyperadia/specfun.hpp"

namespace hyperadia {

namespace {

const double kRhoEdge = 1.0 / std::sqrt(2.0);
constexpr double kPi = std::numbers::pi;
// bessel_jy covers k rho <= 25; the check radius is 1.1 rho_max.
constexpr double kMaxKRho = 25.0;
constexpr double kRetryFactor = 1.03;

bool is_log_class(const Channel& ch) { return ch.abs_l1() == 0; }

AsymptoticModel default_tail(const Channel& ch, const StepPotential& pot) {
  return is_log_class(ch) ? coefficients_log(ch, pot, ModelKind::Best) : coefficient_q(ch, pot);
}

void check_tail_class(const Channel& ch, const AsymptoticModel& m) {
  const bool model_log = m.kind != ModelKind::InversePower;
  if (model_log != is_log_class(ch)) {
    throw WrongClassError("tail model " + to_string(m.kind) + " does not match the class of channel " + ch.label());
  }
}

double wrap_half_open(double d) {
  d -= kPi * std::round(d / kPi);
  if (d <= -0.5 * kPi) d += kPi;
  return d;
}

// Free pair s = sqrt(pi x / 2) J_nu(x), c = -sqrt(pi x / 2) Y_nu(x), x = k rho,
// with derivatives in rho.
struct FreePair {
  double s, c, ds, dc;
};

FreePair free_pair(int nu, double k, double rho) {
  const double x = k * rho;
  const auto a = specfun::bessel_jy(nu, x);
  const auto b = specfun::bessel_jy(nu - 1, x);
  const double dJ = b.J - nu / x * a.J;
  const double dY = b.Y - nu / x * a.Y;
  const double f = std::sqrt(0.5 * kPi * x);
  const double df = 0.5 * f / x;  // d f / d x
  return {f * a.J, -f * a.Y, k * (df * a.J + f * dJ), -k * (df * a.Y + f * dY)};
}

// Logarithmic derivative at rho of the regular solution of the constant
// potential v inside rho.
double interior_log_derivative(int nu, double k, double v, double rho) {
  const double kappa2 = v - k * k;
  if (kappa2 > 0.0) {
    const double kappa = std::sqrt(kappa2);
    const double x = kappa * rho;
    const double i0 = specfun::bessel_i(nu, x);
    const double i1 = specfun::bessel_i(nu + 1, x);
    return 0.5 / rho + kappa * (i1 / i0 + nu / x);
  }
  if (kappa2 < 0.0) {
    const double kappa = std::sqrt(-kappa2);
    const double x = kappa * rho;
    const auto a = specfun::bessel_jy(nu, x);
    const auto b = specfun::bessel_jy(nu - 1, x);
    return 0.5 / rho + kappa * (b.J / a.J - nu / x);
  }
  return (nu + 0.5) / rho;
}

// Integral of the table from a to infinity. The spline part is integrated in
// ln rho, the model part directly.
double potential_integral(const EffectivePotentialTable& table, double a) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  const double rs = table.rho_switch();
  if (a < rs) {
    auto f = [&](double u) {
      const double r = std::exp(u);
      return table(r) * r;
    };
    total += gauss_kronrod<double, 61>::integrate(f, std::log(a), std::log(rs), 15, 1e-12);
  }
  if (table.tail_model()) {
    auto g = [&](double r) { return table(r); };
    total += gauss_kronrod<double, 61>::integrate(g, std::max(a, rs), std::numeric_limits<double>::infinity(), 15,
                                                  1e-12);
  }
  return total;
}

// First-order contribution of the potential beyond rho_a, with the free pair
// written as amplitude m and phase phi: s = m cos phi, c = -m sin phi.
double tail_correction(const EffectivePotentialTable& table, int nu, double k, double rho_a, double delta) {
  const double mean = potential_integral(table, rho_a);
  const FreePair p = free_pair(nu, k, rho_a);
  const double psi = std::atan2(-p.c, p.s) + delta;
  return -mean / (2.0 * k) + table(rho_a) * std::sin(2.0 * psi) / (4.0 * k * k);
}

struct Integration {
  double delta_max, delta_check;
  long steps;
};

Integration integrate_phase(const EffectivePotentialTable& table, int nu, double k, double rho_min, double rho_max,
                            double rel_tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;

  const FreePair p0 = free_pair(nu, k, rho_min);
  const double g = interior_log_derivative(nu, k, table(rho_min), rho_min);
  const double delta0 = std::atan(-(p0.ds - g * p0.s) / (p0.dc - g * p0.c));
  if (!std::isfinite(delta0)) throw NumericError("initial phase is not finite");

  bool bad = false;
  auto rhs = [&](const State& d, State& dd, double x) {
    const double r = std::exp(x);
    const auto a = specfun::bessel_jy(nu, k * r);
    const double f = std::sqrt(0.5 * kPi * k * r);
    const double u = f * (a.J * std::cos(d[0]) - a.Y * std::sin(d[0]));
    dd[0] = -(r / k) * table(r) * u * u;
    if (!std::isfinite(dd[0])) bad = true;
  };

  const double abs_tol = std::max(std::fabs(delta0), 1e-290) * 1e-12;
  auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
  State d{delta0};
  const double x0 = std::log(rho_min);
  const double x1 = std::log(rho_max);
  const double x2 = std::log(1.1 * rho_max);
  long steps = 0;
  try {
    steps += static_cast<long>(odeint::integrate_adaptive(stepper, rhs, d, x0, x1, 1e-3));
    const double at_max = d[0];
    steps += static_cast<long>(odeint::integrate_adaptive(stepper, rhs, d, x1, x2, 1e-3));
    if (bad || !std::isfinite(d[0])) throw NumericError("phase equation produced a non-finite slope");
    return {at_max, d[0], steps};
  } catch (const odeint::step_adjustment_error& e) {
    throw NumericError(std::string("phase integrator step failure: ") + e.what());
  }
}

}  // namespace

EffectivePotentialTable EffectivePotentialTable::build(const Channel& ch, const StepPotential& pot,
                                                       const Options& opts) {
  if (!(opts.rho_switch > 1.0) || !std::isfinite(opts.rho_switch))
    throw DomainError("rho_switch must exceed 1 (asymptotic model domain)");
  if (opts.points_per_decade < 1) throw DomainError("points_per_decade must be positive");
  if (!(pot.v0bar >= 0.0)) throw DomainError("V0bar must be nonnegative");

  EffectivePotentialTable t;
  t.channel_ = ch;
  t.potential_ = pot;
  t.rho_switch_ = opts.rho_switch;
  t.log_rho0_ = std::log(kRhoEdge);
  const double span = std::log(opts.rho_switch) - t.log_rho0_;
  const int n = std::max(3, static_cast<int>(std::ceil(opts.points_per_decade * span / std::log(10.0))));
  t.h_ = span / n;

  t.rho_.resize(n + 1);
  t.rho_[0] = kRhoEdge;
  for (int j = 1; j < n; ++j) t.rho_[j] = std::exp(t.log_rho0_ + j * t.h_);
  t.rho_[n] = opts.rho_switch;
  t.v_.assign(n + 1, 0.0);
  t.v_[0] = pot.v0bar;
  if (pot.v0bar == 0.0) return t;

  if (opts.tail_model) {
    check_tail_class(ch, *opts.tail_model);
    t.tail_ = opts.tail_model;
  } else {
    t.tail_ = default_tail(ch, pot);
  }

  const std::vector<double> grid(t.rho_.begin() + 1, t.rho_.end());
  const SweepReport rep = opts.parallel ? sweep_parallel(ch, pot, grid, opts.solver) : sweep(ch, pot, grid, opts.solver);
  if (!rep.ok()) {
    std::ostringstream os;
    os << "effective potential table for " << ch.label() << " failed at rho =";
    for (double r : rep.failed_rhos()) os << " " << r;
    throw NumericError(os.str());
  }
  for (int j = 1; j <= n; ++j) t.v_[j] = rep.points[j - 1].solution->v_eff;

  t.y_.resize(n + 1);
  for (int j = 0; j <= n; ++j) t.y_[j] = std::log(t.rho_[j] * t.rho_[j] * t.v_[j]);
  t.spline_.emplace(t.y_.begin(), t.y_.end(), t.log_rho0_, t.h_);
  return t;
}

double EffectivePotentialTable::operator()(double rho) const {
  if (rho <= kRhoEdge) return potential_.v0bar;
  if (!spline_) return 0.0;
  if (rho <= rho_switch_) {
    const double hi = log_rho0_ + h_ * static_cast<double>(y_.size() - 1);
    const double u = std::clamp(std::log(rho), log_rho0_, hi);
    return std::exp((*spline_)(u)) / (rho * rho);
  }
  return model_v_eff(*tail_, rho);
}

PhaseShiftResult channel_phase_shift(const RadialProblem& problem, const PhaseShiftConfig& cfg) {
  EffectivePotentialTable::Options opts;
  opts.rho_switch = cfg.rho_switch;
  opts.points_per_decade = cfg.points_per_decade;
  opts.solver = cfg.solver;
  opts.tail_model = problem.tail_model;
  return channel_phase_shift(problem, EffectivePotentialTable::build(problem.channel, problem.potential, opts), cfg);
}

PhaseShiftResult channel_phase_shift(const RadialProblem& problem, const EffectivePotentialTable& table,
                                     const PhaseShiftConfig& cfg) {
  const double k = problem.k;
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("k must be positive and finite");
  if (!(problem.channel == table.channel()) || problem.potential.v0bar != table.potential().v0bar)
    throw DomainError("potential table was built for a different channel or strength");
  if (problem.tail_model) check_tail_class(problem.channel, *problem.tail_model);

  const double rho_min = problem.rho_min == 0.0 ? kRhoEdge : problem.rho_min;
  if (!(rho_min >= kRhoEdge)) throw DomainError("rho_min must be at least 1/sqrt(2)");
  double rho_max = problem.rho_max == 0.0 ? cfg.k_rho_max / k : problem.rho_max;
  if (!(rho_max > rho_min)) throw DomainError("rho_max must exceed rho_min");

  const int nu = problem.channel.N() + 1;
  PhaseShiftResult res;
  res.k = k;
  for (int attempt = 0;; ++attempt) {
    if (1.1 * k * rho_max > kMaxKRho) {
      std::ostringstream os;
      os << "1.1 k rho_max = " << 1.1 * k * rho_max << " exceeds the Bessel range " << kMaxKRho;
      throw DomainError(os.str());
    }
    const Integration run = integrate_phase(table, nu, k, rho_min, rho_max, cfg.rel_tol);
    const double t1 = tail_correction(table, nu, k, rho_max, run.delta_max);
    const double t2 = tail_correction(table, nu, k, 1.1 * rho_max, run.delta_check);
    const double d1 = run.delta_max + t1;
    const double d2 = run.delta_check + t2;
    res.delta = wrap_half_open(d1);
    res.delta_check = wrap_half_open(d2);
    res.tail_correction = t1;
    res.rho_max = rho_max;
    res.retries = attempt;
    res.steps += run.steps;
    if (std::fabs(d1 - d2) < cfg.consistency_tol) return res;
    if (attempt >= cfg.max_retries) {
      std::ostringstream os;
      os << "phase at rho_max and 1.1 rho_max differ by " << std::fabs(d1 - d2) << " rad after " << attempt
         << " retries (k=" << k << ", channel " << problem.channel.label() << ")";
      throw NumericError(os.str());
    }
    rho_max *= kRetryFactor;
  }
}

std::vector<PhaseShiftResult> phase_shift_sweep(const EffectivePotentialTable& table, const std::vector<double>& ks,
                                                const PhaseShiftConfig& cfg, bool parallel) {
  std::vector<PhaseShiftResult> out(ks.size());
  std::vector<std::exception_ptr> errors(ks.size());
  const long n = static_cast<long>(ks.size());
  auto one = [&](long i) {
    try {
      RadialProblem p;
      p.channel = table.channel();
      p.potential = table.potential();
      p.k = ks[i];
      out[i] = channel_phase_shift(p, table, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace {
EffectivePotentialTable table_for(const Channel& ch, const StepPotential& pot, const PhaseShiftConfig& cfg,
                                  bool parallel) {
  EffectivePotentialTable::Options opts;
  opts.rho_switch = cfg.rho_switch;
  opts.points_per_decade = cfg.points_per_decade;
  opts.solver = cfg.solver;
  opts.parallel = parallel;
  return EffectivePotentialTable::build(ch, pot, opts);
}
}  // namespace

std::vector<PhaseShiftResult> phase_shift_sweep(const Channel& ch, const StepPotential& pot,
                                                const std::vector<double>& ks, const PhaseShiftConfig& cfg) {
  return phase_shift_sweep(table_for(ch, pot, cfg, true), ks, cfg, true);
}

std::vector<PhaseShiftResult> phase_shift_sweep_serial(const Channel& ch, const StepPotential& pot,
                                                       const std::vector<double>& ks, const PhaseShiftConfig& cfg) {
  return phase_shift_sweep(table_for(ch, pot, cfg, false), ks, cfg, false);
}

double hard_disc_phase_shift(int L, double k_sigma) {
  if (L < 0) throw DomainError("L must be nonnegative");
  if (!(k_sigma > 0.0 && k_sigma <= 10.0)) throw DomainError("hard disc needs 0 < k sigma <= 10");
  const auto b = specfun::bessel_jy(L, k_sigma);
  if (b.Y == 0.0) return 0.5 * kPi;
  return std::atan(b.J / b.Y);
}

MottMasseyReport mott_massey_criterion(const Channel& ch) {
  if (is_log_class(ch)) throw WrongClassError("l1 == 0 decays logarithmically; no power-law tail exponent");
  MottMasseyReport r;
  const int a = ch.abs_l1();
  r.s = 2 * a + 2;
  r.min_N = a;
  r.tail_dominant = 2 * (r.min_N + 1) > r.s - 2;
  r.exponent = r.s - 2;
  return r;
}

namespace {
std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit needs at least two distinct k");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

void check_fit_input(const std::vector<double>& ks, const std::vector<double>& deltas) {
  if (ks.size() != deltas.size() || ks.size() < 2) throw DomainError("fit needs matching k and delta lists of length >= 2");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0)) throw DomainError("fit needs positive k");
    if (!(deltas[i] != 0.0) || !std::isfinite(deltas[i])) throw DomainError("fit needs finite nonzero phases");
  }
}
}  // namespace

InverseLogFit fit_inverse_log(const std::vector<double>& ks, const std::vector<double>& deltas) {
  check_fit_input(ks, deltas);
  std::vector<double> x(ks.size()), y(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    x[i] = std::log(ks[i]);
    y[i] = 1.0 / deltas[i];
  }
  const auto [s, c] = least_squares(x, y);
  return {s, c};
}

PowerLawFit fit_power_law(const std::vector<double>& ks, const std::vector<double>& deltas) {
  check_fit_input(ks, deltas);
  std::vector<double> x(ks.size()), y(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    x[i] = std::log(ks[i]);
    y[i] = std::log(std::fabs(deltas[i]));
  }
  const auto [s, c] = least_squares(x, y);
  return {s, c};
}

}  // namespace hyperadia
