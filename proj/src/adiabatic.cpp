#include "hyperadia/adiabatic.hpp"

#include <omp.h>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "hyperadia/errors.hpp"

namespace hyperadia {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kRhoMin = 1.0 / std::sqrt(2.0);

void check_rho(double rho) {
  if (!(rho > kRhoMin) || !std::isfinite(rho)) {
    std::ostringstream os;
    os << "rho must exceed 1/sqrt(2); got " << rho;
    throw DomainError(os.str());
  }
}

void check_potential(const StepPotential& pot) {
  if (!(pot.v0bar >= 0.0) || !std::isfinite(pot.v0bar)) throw DomainError("v0bar must be finite and >= 0");
}

AdiabaticSolution make_solution(const Channel& ch, double rho, double offset, double residual) {
  AdiabaticSolution s;
  s.rho = rho;
  s.nu1_offset = offset;
  s.nu1 = ch.l + offset;
  const long double k = 2.0L * ch.l + ch.M() + 1.0L + 2.0L * offset;  // 2 nu1 + M + 1
  const long double r2 = static_cast<long double>(rho) * rho;
  s.lambda = static_cast<double>((k * k - 0.25L) / r2);
  // lambda - ((N+1)^2 - 1/4)/rho^2 = 4 eps (eps + N + 1) / rho^2
  s.v_eff = static_cast<double>(4.0L * offset * (offset + ch.N() + 1.0L) / r2);
  s.residual = residual;
  return s;
}

// Root search on the normalized Wronskian of the two sides. It vanishes
// exactly where the log-derivative residual does, but it is continuous in the
// offset: the residual's poles (a node of either function at the matching
// point) are not sign changes of W, so every sign change is a root.
class ResidualFunction {
 public:
  ResidualFunction(const Channel& ch, const StepPotential& pot, double rho, const SolverConfig& cfg)
      : ch_(ch), pot_(pot), rho_(rho), cfg_(cfg) {}

  double operator()(double offset) const { return matching_wronskian(ch_, pot_, rho_, offset, cfg_); }

  double safe(double offset) const {
    try {
      const double v = (*this)(offset);
      return std::isfinite(v) ? v : kNaN;
    } catch (const Error&) {
      return kNaN;
    }
  }

  // Refines a sign change. The endpoint with the smaller |W| is returned if
  // it meets the relative tolerance, or if the bracket has shrunk to a few
  // ulps (W is continuous, so that is a root to machine precision).
  std::optional<std::pair<double, double>> refine(double lo, double hi, double f_lo, double f_hi) const {
    auto tol = [](double a, double b) {
      return std::fabs(a - b) <= std::max(4.0 * std::numeric_limits<double>::epsilon() * std::min(std::fabs(a), std::fabs(b)),
                                          std::numeric_limits<double>::denorm_min());
    };
    boost::uintmax_t iters = cfg_.max_iterations;
    std::pair<double, double> br;
    try {
      auto f = [this](double e) {
        const double v = (*this)(e);
        if (!std::isfinite(v)) throw NumericError("non-finite matching function");
        return v;
      };
      br = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    const double w1 = safe(br.first), w2 = safe(br.second);
    const bool first = !(std::fabs(w2) < std::fabs(w1));
    const double best = first ? br.first : br.second;
    const double wb = first ? w1 : w2;
    if (!std::isfinite(wb)) return std::nullopt;
    const bool collapsed = tol(br.first, br.second);
    if (std::fabs(wb) <= cfg_.residual_rel_tol || collapsed) return std::make_pair(best, wb);
    return std::nullopt;
  }

  // Scans offsets in ascending order and returns the first refined root.
  std::optional<std::pair<double, double>> scan(const std::vector<double>& grid,
                                                std::vector<std::pair<double, double>>& trace) const {
    double prev_e = kNaN, prev_v = kNaN;
    for (double e : grid) {
      const double v = safe(e);
      trace.emplace_back(ch_.l + e, v);
      if (std::isfinite(v)) {
        if (v == 0.0) return std::make_pair(e, 0.0);
        if (std::isfinite(prev_v) && (prev_v < 0.0) != (v < 0.0)) {
          if (auto root = refine(prev_e, e, prev_v, v)) return root;
        }
        prev_e = e;
        prev_v = v;
      }
    }
    return std::nullopt;
  }

  // Root search near a previous offset, widening by factors of 4 alternately
  // below and above. Used by the continuation sweep; failure falls back to
  // the full scan.
  std::optional<std::pair<double, double>> around(double guess) const {
    if (!(guess > 0.0) || !(guess < 1.0)) return std::nullopt;
    const double f0 = safe(guess);
    if (!std::isfinite(f0)) return std::nullopt;
    if (f0 == 0.0) return std::make_pair(guess, 0.0);
    double lo = guess, hi = guess, flo = f0, fhi = f0;
    for (int k = 0; k < 12; ++k) {
      const double nlo = lo / 4.0;
      const double fnlo = safe(nlo);
      if (!std::isfinite(fnlo)) return std::nullopt;
      if ((fnlo < 0.0) != (flo < 0.0)) return refine(nlo, lo, fnlo, flo);
      lo = nlo;
      flo = fnlo;
      const double nhi = std::min(4.0 * hi, 0.5 * (hi + 1.0));
      const double fnhi = safe(nhi);
      if (!std::isfinite(fnhi)) return std::nullopt;
      if ((fnhi < 0.0) != (fhi < 0.0)) return refine(hi, nhi, fhi, fnhi);
      hi = nhi;
      fhi = fnhi;
    }
    return std::nullopt;
  }

 private:
  Channel ch_;
  StepPotential pot_;
  double rho_;
  SolverConfig cfg_;
};

// {0} followed by a geometric grid up to 1 - delta. The lower end follows the
// expected size of the offset, eps ~ (2 rho^2)^{-|l1|}, because at large rho
// the root and the first pole of D_R both sit many decades below any fixed
// delta. At least eight points per decade keep them in separate cells.
std::vector<double> scan_grid(const Channel& ch, double rho, int points, double delta) {
  const double scale = std::pow(2.0 * rho * rho, -static_cast<double>(ch.abs_l1()));
  const double lo = std::max(std::min(delta, 1e-4 * scale), 1e-300);
  const double hi = 1.0 - delta;
  const int n = std::max(points, static_cast<int>(std::ceil(8.0 * std::log10(hi / lo))) + 1);
  std::vector<double> g;
  g.reserve(n + 1);
  g.push_back(0.0);
  for (int k = 0; k < n; ++k) g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  return g;
}

AdiabaticSolution solve_impl(const Channel& ch, const StepPotential& pot, double rho, const SolverConfig& cfg,
                             std::optional<double> guess) {
  check_rho(rho);
  check_potential(pot);
  if (pot.v0bar == 0.0) return make_solution(ch, rho, 0.0, 0.0);

  ResidualFunction f(ch, pot, rho, cfg);
  auto finish = [&](double offset) {
    double residual = kNaN;
    try {
      residual = matching_terms(ch, pot, rho, offset, cfg).residual();
    } catch (const Error&) {
      // a node exactly at the matching point; the Wronskian root stands
    }
    return make_solution(ch, rho, offset, residual);
  };
  if (guess) {
    if (auto r = f.around(*guess)) return finish(r->first);
  }
  std::vector<std::pair<double, double>> trace;
  if (auto r = f.scan(scan_grid(ch, rho, cfg.scan_points, cfg.scan_delta), trace)) return finish(r->first);
  // Denser rescan: catches a pair of roots sharing one coarse cell.
  std::vector<std::pair<double, double>> dense_trace;
  if (auto r = f.scan(scan_grid(ch, rho, cfg.refine_points, cfg.scan_delta), dense_trace)) return finish(r->first);
  std::ostringstream os;
  os << "no eigenvalue bracket for channel " << ch.label() << " at rho=" << rho;
  throw BracketError(os.str(), std::move(trace));
}

}  // namespace

StepPotential StepPotential::from_lambda_star(double lambda_star) {
  if (!(lambda_star > 0.0) || !std::isfinite(lambda_star)) throw DomainError("Lambda* must be positive");
  return {8.0 * specfun::kPi * specfun::kPi / (lambda_star * lambda_star)};
}

StepPotential StepPotential::from_v0bar(double v0bar) {
  check_potential({v0bar});
  return {v0bar};
}

double free_lambda(const Channel& ch, double rho) {
  const double n1 = ch.N() + 1.0;
  return (n1 * n1 - 0.25) / (rho * rho);
}

double AdiabaticSolution::v_eff_by_subtraction(const Channel& ch) const {
  const long double r2 = static_cast<long double>(rho) * rho;
  const long double k = 2.0L * ch.l + ch.M() + 1.0L + 2.0L * nu1_offset;
  const long double lam = (k * k - 0.25L) / r2;
  const long double n1 = ch.N() + 1.0L;
  return static_cast<double>(lam - (n1 * n1 - 0.25L) / r2);
}

MatchingTerms matching_terms(const Channel& ch, const StepPotential& pot, double rho, double offset,
                             const SolverConfig& cfg) {
  check_rho(rho);
  const int M = ch.M();
  const auto right = specfun::SymmetricDegree::from_parts(ch.l, offset, M);
  const double t2 = right.t - rho * rho * pot.v0bar / 4.0;
  const double w = 0.5 / (rho * rho);

  const auto left = specfun::SymmetricDegree::from_t(t2, M);
  MatchingTerms out{};
  try {
    out.right = -0.5 * specfun::f1_log_derivative_y(right, M, ch.abs_l2() + 1,
                                                    specfun::SeriesArgument::from_complement(w), cfg.f1);
    out.left = 0.5 * specfun::f1_log_derivative_y(left, M, ch.abs_l1() + 1, specfun::SeriesArgument::from_x(w),
                                                  cfg.f1);
  } catch (const ZeroCrossingError& e) {
    std::ostringstream os;
    os << e.what() << " [channel " << ch.label() << ", rho=" << rho << ", nu1=l+" << offset << "]";
    throw ZeroCrossingError(os.str());
  } catch (const DivergenceError& e) {
    std::ostringstream os;
    os << e.what() << " [channel " << ch.label() << ", rho=" << rho << ", nu1=l+" << offset << "]";
    throw DivergenceError(os.str());
  }
  return out;
}

double matching_wronskian(const Channel& ch, const StepPotential& pot, double rho, double offset,
                          const SolverConfig& cfg) {
  check_rho(rho);
  const int M = ch.M();
  const auto right = specfun::SymmetricDegree::from_parts(ch.l, offset, M);
  const auto left = specfun::SymmetricDegree::from_t(right.t - rho * rho * pot.v0bar / 4.0, M);
  const double w = 0.5 / (rho * rho);
  const auto r = specfun::f1_value_and_slope_y(right, M, ch.abs_l2() + 1, specfun::SeriesArgument::from_complement(w),
                                               cfg.f1);
  const auto l = specfun::f1_value_and_slope_y(left, M, ch.abs_l1() + 1, specfun::SeriesArgument::from_x(w), cfg.f1);
  // d/dz = -1/2 d/dy on the right, +1/2 d/dy on the left
  const double a = -0.5 * r.slope * l.value;
  const double b = 0.5 * l.slope * r.value;
  const double scale = std::fabs(a) + std::fabs(b);
  if (!std::isfinite(scale)) {
    std::ostringstream os;
    os << "non-finite matching function [channel " << ch.label() << ", rho=" << rho << ", nu1=l+" << offset << "]";
    throw NumericError(os.str());
  }
  return scale == 0.0 ? 0.0 : (a - b) / scale;
}

double matching_residual(const Channel& ch, const StepPotential& pot, double rho, double nu1_trial,
                         const SolverConfig& cfg) {
  return matching_terms(ch, pot, rho, nu1_trial - ch.l, cfg).residual();
}

AdiabaticSolution solve(const Channel& ch, const StepPotential& pot, double rho, const SolverConfig& cfg) {
  return solve_impl(ch, pot, rho, cfg, std::nullopt);
}

bool SweepReport::ok() const {
  for (const auto& p : points)
    if (!p.solution) return false;
  return true;
}

std::vector<double> SweepReport::failed_rhos() const {
  std::vector<double> out;
  for (const auto& p : points)
    if (!p.solution) out.push_back(p.rho);
  return out;
}

std::vector<AdiabaticSolution> SweepReport::solutions() const {
  std::vector<AdiabaticSolution> out;
  for (const auto& p : points)
    if (p.solution) out.push_back(*p.solution);
  return out;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_rho(grid[i]);
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("rho grid must be strictly increasing");
  }
}

}  // namespace

SweepReport sweep(const Channel& ch, const StepPotential& pot, const std::vector<double>& rho_grid,
                  const SolverConfig& cfg) {
  check_grid(rho_grid);
  SweepReport rep{ch, {}};
  double guess = kNaN;  // previous offset, NaN when there is none
  for (double rho : rho_grid) {
    SweepPoint p{rho, std::nullopt, {}};
    try {
      p.solution = solve_impl(ch, pot, rho, cfg, std::isnan(guess) ? std::nullopt : std::optional<double>(guess));
      guess = p.solution->nu1_offset;
    } catch (const Error& e) {
      p.error = e.what();
      guess = kNaN;
    }
    rep.points.push_back(std::move(p));
  }
  return rep;
}

SweepReport sweep_parallel(const Channel& ch, const StepPotential& pot, const std::vector<double>& rho_grid,
                           const SolverConfig& cfg) {
  check_grid(rho_grid);
  SweepReport rep{ch, std::vector<SweepPoint>(rho_grid.size())};
  const long n = static_cast<long>(rho_grid.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    SweepPoint& p = rep.points[i];
    p.rho = rho_grid[i];
    try {
      p.solution = solve_impl(ch, pot, p.rho, cfg, std::nullopt);
    } catch (const Error& e) {
      p.error = e.what();
    }
  }
  return rep;
}

std::vector<double> make_grid(double min, double max, int points, bool logarithmic) {
  if (points < 1) throw DomainError("grid needs at least one point");
  if (points == 1) return {min};
  if (!(max > min)) throw DomainError("grid max must exceed min");
  if (logarithmic && !(min > 0.0)) throw DomainError("log grid needs a positive minimum");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    g[i] = logarithmic ? min * std::pow(max / min, f) : min + (max - min) * f;
  }
  g.back() = max;
  return g;
}

}  // namespace hyperadia
