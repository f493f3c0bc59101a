#include "hyperadia/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "hyperadia/errors.hpp"
#include "hyperadia/specfun.hpp"

namespace hyperadia {

namespace {

void require_strength(const StepPotential& pot) {
  if (!(pot.v0bar > 0.0) || !std::isfinite(pot.v0bar))
    throw DomainError("asymptotic coefficients need v0bar > 0 (I1 vanishes at zero strength)");
}

void require_log_class(const Channel& ch) {
  if (ch.l1 != 0) throw WrongClassError("channel " + ch.label() + " has l1 != 0: inverse-power class");
}

void require_power_class(const Channel& ch) {
  if (ch.l1 == 0) throw WrongClassError("channel " + ch.label() + " has l1 == 0: inverse-log class");
}

double harmonic_terms(const Channel& ch) { return specfun::harmonic(ch.l) + specfun::harmonic(ch.l + ch.abs_l2()); }

// 1/q without the Bessel term's prefactor choice: pref * (1/|l1| + ratio)
double inverse_q(const Channel& ch, double bessel_ratio) {
  const int a = ch.abs_l1();
  const int N = ch.N();
  const double pref =
      std::ldexp(1.0, a - 2) / ((N + 1.0) * specfun::binomial(N - ch.l, a) * specfun::binomial(a + ch.l, a));
  return pref * (1.0 / a + bessel_ratio);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::KL: return "kl";
    case ModelKind::Wider: return "wider";
    case ModelKind::Best: return "best";
    case ModelKind::InversePower: return "inverse-power";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : {ModelKind::KL, ModelKind::Wider, ModelKind::Best, ModelKind::InversePower})
    if (to_string(k) == name) return k;
  throw DomainError("unknown model kind '" + name + "'");
}

AsymptoticModel AsymptoticModel::as(ModelKind k) const {
  const bool log_now = kind != ModelKind::InversePower;
  const bool log_next = k != ModelKind::InversePower;
  if (log_now != log_next) throw WrongClassError("cannot switch between log and inverse-power models");
  AsymptoticModel m = *this;
  m.kind = k;
  return m;
}

double coefficient_A_tilde(const Channel& ch, const StepPotential& pot) {
  require_log_class(ch);
  require_strength(pot);
  const double x = std::sqrt(pot.v0bar / 2.0);
  return std::sqrt(8.0) * specfun::bessel_i(0, x) / (std::sqrt(pot.v0bar) * specfun::bessel_i(1, x)) -
         harmonic_terms(ch) + std::log(2.0);
}

double coefficient_A(const Channel& ch, const StepPotential& pot) {
  require_log_class(ch);
  require_strength(pot);
  const double x = std::sqrt(pot.v0bar / 2.0);
  const double bracket =
      2.0 * specfun::bessel_i(0, x) / (x * specfun::bessel_i(1, x)) - harmonic_terms(ch) + std::log(2.0);
  return bracket / (4.0 * (ch.N() + 1.0));
}

AsymptoticModel coefficients_log(const Channel& ch, const StepPotential& pot, ModelKind kind) {
  require_log_class(ch);
  if (kind == ModelKind::InversePower) throw WrongClassError("inverse-power model requested for an l1 == 0 channel");
  AsymptoticModel m;
  m.kind = kind;
  m.channel = ch;
  m.potential = pot;
  const double n1 = ch.N() + 1.0;
  m.A = coefficient_A_tilde(ch, pot) / (4.0 * n1);
  m.B = 1.0 / (2.0 * n1);
  m.A_star = m.A - 1.0 / (4.0 * n1 * n1);
  m.B_star = m.B;
  return m;
}

AsymptoticModel coefficient_q(const Channel& ch, const StepPotential& pot) {
  require_power_class(ch);
  require_strength(pot);
  const int a = ch.abs_l1();
  const double x = std::sqrt(pot.v0bar / 2.0);
  const double ratio = 2.0 * specfun::bessel_i(a, x) / (x * specfun::bessel_i(a + 1, x));
  AsymptoticModel m;
  m.kind = ModelKind::InversePower;
  m.channel = ch;
  m.potential = pot;
  m.q = 1.0 / inverse_q(ch, ratio);
  return m;
}

double coefficient_q_alternate(const Channel& ch, const StepPotential& pot) {
  require_power_class(ch);
  require_strength(pot);
  const int a = ch.abs_l1();
  const double x = std::sqrt(pot.v0bar / 2.0);
  const double ratio =
      2.0 * std::sqrt(2.0) * specfun::bessel_i(a, x) / (std::sqrt(pot.v0bar) * specfun::bessel_i(a + 1, x));
  return 1.0 / inverse_q(ch, ratio);
}

double model_v_eff(const AsymptoticModel& m, double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    std::ostringstream os;
    os << "asymptotic models need rho > 1; got " << rho;
    throw DomainError(os.str());
  }
  const double r2 = rho * rho;
  if (m.kind == ModelKind::InversePower) return m.q / std::pow(rho, 2.0 * m.channel.abs_l1() + 2.0);

  const double L = std::log(rho);
  const double d = (m.kind == ModelKind::Wider ? m.A_star + m.B_star * L : m.A + m.B * L);
  if (!(d > 0.0)) {
    std::ostringstream os;
    os << "rho=" << rho << " lies at or below the pole of the " << to_string(m.kind) << " model";
    throw DomainError(os.str());
  }
  double v = 1.0 / d;
  if (m.kind == ModelKind::Best) {
    const double n1 = m.channel.N() + 1.0;
    v += 1.0 / (4.0 * n1 * n1 * d * d);
  }
  return v / r2;
}

double model_offset(const AsymptoticModel& m, double rho) {
  if (!(rho > 1.0)) throw DomainError("asymptotic models need rho > 1");
  const double n1 = m.channel.N() + 1.0;
  if (m.kind == ModelKind::InversePower)
    return m.q * std::pow(rho, -2.0 * m.channel.abs_l1()) / (4.0 * n1);
  const double d = 4.0 * n1 * m.A + 2.0 * std::log(rho);  // A~ + 2 ln rho
  if (!(d > 0.0)) throw DomainError("rho below the pole of the offset model");
  return 1.0 / d;
}

ModelComparison compare_models(const Channel& ch, const StepPotential& pot, const std::vector<double>& rho_grid,
                               const SolverConfig& cfg) {
  ModelComparison out;
  out.channel = ch;
  out.log_class = ch.l1 == 0;
  out.model = out.log_class ? coefficients_log(ch, pot, ModelKind::Best) : coefficient_q(ch, pot);
  for (double rho : rho_grid)
    if (!(rho > 1.0)) throw DomainError("compare_models needs every rho > 1");

  const auto rep = sweep_parallel(ch, pot, rho_grid, cfg);
  auto rel = [](double model, double exact) { return std::fabs(model - exact) / std::fabs(exact); };
  for (const auto& p : rep.points) {
    ComparisonRow row;
    row.rho = p.rho;
    if (!p.solution) {
      row.error = p.error;
      out.rows.push_back(row);
      continue;
    }
    row.v_exact = p.solution->v_eff;
    if (out.log_class) {
      row.v_kl = model_v_eff(out.model.as(ModelKind::KL), p.rho);
      row.v_wider = model_v_eff(out.model.as(ModelKind::Wider), p.rho);
      row.v_best = model_v_eff(out.model, p.rho);
      row.err_kl = rel(row.v_kl, row.v_exact);
      row.err_wider = rel(row.v_wider, row.v_exact);
      row.err_best = rel(row.v_best, row.v_exact);
    } else {
      row.v_power = model_v_eff(out.model, p.rho);
      row.err_power = rel(row.v_power, row.v_exact);
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace hyperadia
