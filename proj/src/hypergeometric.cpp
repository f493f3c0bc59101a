#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hyperadia/errors.hpp"
#include "hyperadia/specfun.hpp"

namespace hyperadia::specfun {

namespace {

std::string describe(double t, int M, int c, double x) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << t << ", M=" << M << ", c=" << c << ", x=" << x << ")";
  return os.str();
}

// (-1)^k for any integer k
double parity(long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// Direct series of 2F1(-nu, nu+M+1; c; x) written with t only.
double series_impl(double t, int M, int c, double x, const HypergeometricConfig& cfg) {
  long double sum = 1.0L;
  long double term = 1.0L;
  int quiet = 0;
  const long double xl = x;
  for (int n = 0; n < cfg.max_terms; ++n) {
    const long double nn = n;
    term *= (nn * nn + nn * (M + 1) - t) / ((c + nn) * (nn + 1.0L)) * xl;
    sum += term;
    if (std::fabs(term) < cfg.eps_abs * (1.0L + std::fabs(sum))) {
      if (++quiet >= 3) return static_cast<double>(sum);
    } else {
      quiet = 0;
    }
  }
  throw DivergenceError("f1_series: no convergence within " + std::to_string(cfg.max_terms) +
                        " terms for " + describe(t, M, c, x));
}

// Building blocks for one upper parameter of the connection expansion. The
// parameter is ia + fa + s, with ia an integer, fa the exactly carried
// fractional part and s a nonnegative integer shift. Trigonometric values and
// the values ia + fa + k are all formed from fa so that a parameter close to an
// integer keeps its digits.
struct UpperParam {
  long ia;        // integer part
  double fa;      // fractional part
  int s;          // shift
  int m;          // unshifted m, so the regularized Gamma is 1/Gamma(a - m)
  double sin0;    // sin(pi a)
  double cos0;    // cos(pi a)
  double r_am;    // 1/Gamma(a - m) == 1/Gamma(a + s - (m + s))
  double g_refl;  // Gamma(1 - a + m), used only where a - m <= 1/2

  UpperParam(long int_part, double frac_part, int shift, int m_unshifted)
      : ia(int_part), fa(frac_part), s(shift), m(m_unshifted) {
    sin0 = parity(ia) * sinpi(fa);
    cos0 = parity(ia) * cospi(fa);
    const double am = static_cast<double>(ia - m) + fa;
    if (am > 0.5) {
      r_am = 1.0 / std::tgamma(am);
      g_refl = std::numeric_limits<double>::quiet_NaN();
    } else {
      g_refl = std::tgamma(static_cast<double>(1 - ia + m) - fa);
      r_am = parity(m) * sin0 * g_refl / kPi;
    }
  }

  // a + s + k
  double value(int k) const { return static_cast<double>(ia + s + k) + fa; }

  // 1/Gamma(a + s)
  double rgamma_shifted() const {
    const double v = value(0);
    if (v >= 0.5) return 1.0 / std::tgamma(v);
    return parity(s) * sin0 * std::tgamma(static_cast<double>(1 - ia - s) - fa) / kPi;
  }

  // 1/Gamma(a - m) * psi(a + s + n), finite even where psi has a pole.
  double regularized_psi(int n) const {
    const double y = value(n);
    if (y > 0.5) return r_am == 0.0 ? 0.0 : r_am * digamma(y);
    // psi(y) = psi(1-y) - pi cot(pi y); the cot pole cancels against the zero
    // of 1/Gamma(a - m) because a - m and y differ by an integer.
    const double reg = parity(m) * g_refl * cos0;
    const double one_minus_y = static_cast<double>(1 - ia - s - n) - fa;
    return (r_am == 0.0 ? 0.0 : r_am * digamma(one_minus_y)) - reg;
  }
};

struct SplitParam {
  long i;
  double f;
  static SplitParam of(double v) {
    const double r = std::round(v);
    return {static_cast<long>(r), v - r};
  }
};

// 2F1(a+s, b+s; a+b-m+s; 1-w)
double near_unit_impl(SplitParam pa, SplitParam pb, int m, int s, double w, const HypergeometricConfig& cfg) {
  const int ms = m + s;
  const double c = static_cast<double>(pa.i + pb.i - m + s) + (pa.f + pb.f);
  if (!(c > 0.0)) throw DomainError("f1_near_unit: lower parameter must be positive");
  if (!(w > 0.0) || !(w < 1.0)) throw DomainError("f1_near_unit: one_minus_x outside (0,1)");

  const UpperParam A(pa.i, pa.f, s, m);
  const UpperParam B(pb.i, pb.f, s, m);
  const double gamma_c = std::tgamma(c);

  // Finite part: Gamma(ms) Gamma(c) / (Gamma(a) Gamma(b)) w^{-ms} sum_{n<ms} ...
  long double finite = 0.0L;
  if (ms > 0) {
    long double term = 1.0L;
    long double acc = 0.0L;
    for (int n = 0; n < ms; ++n) {
      acc += term;
      term *= static_cast<long double>(A.value(n - ms)) * B.value(n - ms) / ((n + 1.0L) * (1.0L - ms + n)) * w;
    }
    const long double pref = std::tgamma(static_cast<double>(ms)) * gamma_c * A.rgamma_shifted() *
                             B.rgamma_shifted() * std::pow(static_cast<long double>(w), -ms);
    finite = pref * acc;
  }

  // Logarithmic part:
  // -(-1)^ms Gamma(c) sum_n (a)_n (b)_n / (n! (n+ms)!) w^n
  //   * [ (ln w - psi(n+1) - psi(n+ms+1)) rA rB + rB QA_n + rA QB_n ]
  // with rA = 1/Gamma(a-ms), QA_n = rA psi(a+n) in regularized form.
  const double rA = A.r_am;
  const double rB = B.r_am;
  const double lnw = std::log(w);
  double psi_n1 = -kEulerGamma;                  // psi(n+1)
  double psi_nm1 = -kEulerGamma + harmonic(ms);  // psi(n+ms+1)
  long double poch = 1.0L / std::tgamma(ms + 1.0);  // (a)_n (b)_n w^n / (n! (n+ms)!)
  long double sum = 0.0L;
  int quiet = 0;
  for (int n = 0;; ++n) {
    if (n >= cfg.max_terms) {
      throw DivergenceError("f1_near_unit: no convergence for a=" + std::to_string(A.value(0)) +
                            " b=" + std::to_string(B.value(0)) + " m=" + std::to_string(ms) +
                            " w=" + std::to_string(w));
    }
    const double bracket = (lnw - psi_n1 - psi_nm1) * rA * rB + rB * A.regularized_psi(n) +
                           rA * B.regularized_psi(n);
    const long double term = poch * bracket;
    sum += term;
    if (std::fabs(term) < cfg.eps_abs * (std::fabs(sum) + std::fabs(finite) + 1e-300L) || poch == 0.0L) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    poch *= static_cast<long double>(A.value(n)) * B.value(n) / ((n + 1.0L) * (n + ms + 1.0L)) * w;
    psi_n1 += 1.0 / (n + 1);
    psi_nm1 += 1.0 / (n + ms + 1);
  }
  const long double log_part = -parity(ms) * gamma_c * sum;
  return static_cast<double>(finite + log_part);
}

double symmetric_impl(const SymmetricDegree& d, int M, int c, SeriesArgument arg, int s,
                      const HypergeometricConfig& cfg) {
  const int Ms = M + 2 * s;
  const int cs = c + s;
  const double ts = d.t - s * (M + 1.0) - static_cast<double>(s) * s;
  const int m = M + 1 - c;
  if (arg.x > cfg.x_switch && d.real() && m >= 0) {
    // a = -nu, b = nu + M + 1
    return near_unit_impl({-d.base, -d.frac}, {d.base + M + 1, d.frac}, m, s, arg.complement, cfg);
  }
  return series_impl(ts, Ms, cs, arg.x, cfg);
}

void check_degree(int M, int c) {
  if (M < 0) throw DomainError("hypergeometric: M must be nonnegative");
  if (c < 1) throw DomainError("hypergeometric: c must be a positive integer");
}

}  // namespace

double nu_from_t(double t, int M) {
  const double h = 0.5 * (M + 1);
  const double disc = h * h + t;
  if (disc < 0.0) throw DomainError("nu_from_t: complex degree for t=" + std::to_string(t));
  return t / (h + std::sqrt(disc));
}

SymmetricDegree SymmetricDegree::from_t(double t, int M) {
  const double h = 0.5 * (M + 1);
  if (h * h + t >= 0.0) {
    SymmetricDegree d = from_nu(nu_from_t(t, M), M);
    d.t = t;
    return d;
  }
  return {t, 0, std::numeric_limits<double>::quiet_NaN()};
}

SymmetricDegree SymmetricDegree::from_nu(double nu, int M) {
  const double r = std::round(nu);
  return {nu * (nu + M + 1), static_cast<int>(r), nu - r};
}

SymmetricDegree SymmetricDegree::from_parts(int base, double frac, int M) {
  const long double nu = static_cast<long double>(base) + frac;
  return {static_cast<double>(nu * (nu + M + 1)), base, frac};
}

double f1_series(const SymmetricF1Params& p, const HypergeometricConfig& cfg) {
  check_degree(p.M, p.c);
  if (!std::isfinite(p.t)) throw DomainError("f1_series: non-finite t");
  if (!(p.x >= 0.0) || !(p.x < 1.0)) throw DomainError("f1_series: x outside [0,1)");
  return series_impl(p.t, p.M, p.c, p.x, cfg);
}

double f1_near_unit(const ConnectionExpansionParams& p, const HypergeometricConfig& cfg) {
  if (p.m < 0) throw DomainError("f1_near_unit: m must be nonnegative");
  if (!(p.one_minus_x <= 1.0 - cfg.x_switch)) {
    throw DomainError("f1_near_unit: one_minus_x beyond the connection window");
  }
  return near_unit_impl(SplitParam::of(p.a), SplitParam::of(p.b), p.m, 0, p.one_minus_x, cfg);
}

double f1_symmetric(double t, int M, int c, SeriesArgument arg, const HypergeometricConfig& cfg) {
  check_degree(M, c);
  return symmetric_impl(SymmetricDegree::from_t(t, M), M, c, arg, 0, cfg);
}

double f1_symmetric(const SymmetricDegree& d, int M, int c, SeriesArgument arg, int shift,
                    const HypergeometricConfig& cfg) {
  check_degree(M, c);
  if (shift < 0) throw DomainError("f1_symmetric: negative shift");
  if (!(arg.x >= 0.0) || !(arg.complement > 0.0)) throw DomainError("f1_symmetric: x outside [0,1)");
  return symmetric_impl(d, M, c, arg, shift, cfg);
}

double f1_log_derivative_y(const SymmetricDegree& d, int M, int c, SeriesArgument arg,
                           const HypergeometricConfig& cfg) {
  const double f = f1_symmetric(d, M, c, arg, 0, cfg);
  if (f == 0.0) {
    throw ZeroCrossingError("f1_log_derivative: function vanishes at " + describe(d.t, M, c, arg.x));
  }
  if (!std::isfinite(f)) throw NumericError("f1_log_derivative: non-finite value at " + describe(d.t, M, c, arg.x));
  if (d.t == 0.0) return 0.0;
  const double fs = f1_symmetric(d, M, c, arg, 1, cfg);
  // d/dy 2F1(a,b;c;y) = (ab/c) 2F1(a+1,b+1;c+1;y), ab = -t
  return -(d.t / c) * fs / f;
}

ValueAndSlope f1_value_and_slope_y(const SymmetricDegree& d, int M, int c, SeriesArgument arg,
                                   const HypergeometricConfig& cfg) {
  const double f = f1_symmetric(d, M, c, arg, 0, cfg);
  if (d.t == 0.0) return {f, 0.0};
  return {f, -(d.t / c) * f1_symmetric(d, M, c, arg, 1, cfg)};
}

double f1_log_derivative_y(double t, int M, int c, SeriesArgument arg,
                           const HypergeometricConfig& cfg) {
  return f1_log_derivative_y(SymmetricDegree::from_t(t, M), M, c, arg, cfg);
}

LogDerivativePair f1_log_derivative(double t_left, double t_right, int M, int c_left, int c_right,
                                    double z_match, const HypergeometricConfig& cfg) {
  if (!(z_match > -1.0) || !(z_match < 1.0)) throw DomainError("f1_log_derivative: z outside (-1,1)");
  const SeriesArgument u{0.5 * (1.0 + z_match), 0.5 * (1.0 - z_match)};
  const SeriesArgument y{u.complement, u.x};
  LogDerivativePair out;
  out.left = 0.5 * f1_log_derivative_y(t_left, M, c_left, u, cfg);
  out.right = -0.5 * f1_log_derivative_y(t_right, M, c_right, y, cfg);
  return out;
}

LogDerivativePair f1_log_derivative(double t, int M, int c_left, int c_right, double z_match,
                                    const HypergeometricConfig& cfg) {
  return f1_log_derivative(t, t, M, c_left, c_right, z_match, cfg);
}

}  // namespace hyperadia::specfun
