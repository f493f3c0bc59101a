#include "hyperadia/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hyperadia/errors.hpp"

namespace hyperadia::specfun {

namespace {

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr long double kEulerGammaL = 0.577215664901532860606512090082402431L;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double sinpi(double x) {
  const double n = std::round(x);
  const double r = x - n;  // exact, |r| <= 1/2
  const double s = std::sin(kPi * r);
  return std::fabs(std::fmod(n, 2.0)) == 1.0 ? -s : s;
}

double cospi(double x) {
  const double n = std::round(x);
  const double r = x - n;
  const double c = std::cos(kPi * r);
  return std::fabs(std::fmod(n, 2.0)) == 1.0 ? -c : c;
}

double rgamma(double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.5) return 1.0 / std::tgamma(x);
  if (x == std::floor(x)) return 0.0;
  // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi.
  return sinpi(x) * std::tgamma(1.0 - x) / kPi;
}

double digamma(double x) {
  if (!std::isfinite(x)) throw DomainError("digamma: non-finite argument " + fmt(x));
  if (x <= 0.0 && x == std::floor(x)) {
    throw DomainError("digamma: pole at nonpositive integer " + fmt(x));
  }
  if (x < 0.5) {
    // psi(1-x) - psi(x) = pi cot(pi x)
    return digamma(1.0 - x) - kPi * cospi(x) / sinpi(x);
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // Bernoulli tail B_{2k}/(2k x^{2k}), k = 1..7; the next term is below 1e-16 at x = 10.
  const double tail =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 / x - tail;
}

double harmonic(int n) {
  if (n < 0) throw DomainError("harmonic: negative index");
  double s = 0.0;
  for (int p = 1; p <= n; ++p) s += 1.0 / p;
  return s;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double bessel_i(int order, double x) {
  if (order < 0) throw DomainError("bessel_i: negative order");
  if (!(x >= 0.0) || x > 50.0) throw DomainError("bessel_i: argument outside [0, 50]: " + fmt(x));
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  const double h = 0.5 * x;
  const double q = h * h;
  double term = 1.0;
  for (int i = 1; i <= order; ++i) term *= h / i;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (k + order));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

BesselJY bessel_jy(int order, double x) {
  if (order < 0) throw DomainError("bessel_jy: negative order");
  if (!(x > 0.0) || x > 25.0) throw DomainError("bessel_jy: argument outside (0, 25]: " + fmt(x));
  const int n = order;
  const long double h = 0.5L * static_cast<long double>(x);
  const long double q = h * h;

  // Leading power (x/2)^n / n!
  long double lead = 1.0L;
  for (int i = 1; i <= n; ++i) lead *= h / i;

  long double term = lead;  // (-1)^k (x/2)^{2k+n} / (k!(k+n)!)
  long double j_sum = term;
  long double hk = 0.0L, hnk = 0.0L;
  for (int i = 1; i <= n; ++i) hnk += 1.0L / i;
  long double psi_sum = term * (hk + hnk);  // sum of (H_k + H_{n+k}) * term
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + n));
    hk += 1.0L / k;
    hnk += 1.0L / (k + n);
    j_sum += term;
    psi_sum += term * (hk + hnk);
    if (std::fabs(term) * (1.0L + hk + hnk) < 1e-22L * std::fabs(j_sum) && k > static_cast<int>(h))
      break;
  }

  // Finite part: sum_{k<n} (n-k-1)!/k! (x/2)^{2k-n}
  long double finite = 0.0L;
  if (n > 0) {
    long double f = 1.0L;  // (n-1)! (x/2)^{-n}
    for (int i = 1; i < n; ++i) f *= i;
    for (int i = 0; i < n; ++i) f /= h;
    finite = f;
    for (int k = 1; k < n; ++k) {
      f *= q / (static_cast<long double>(k) * (n - k));
      finite += f;
    }
  }
  // psi(k+1) + psi(n+k+1) = H_k + H_{n+k} - 2 gamma
  const long double log_part = std::log(h) + kEulerGammaL;
  const long double y = (2.0L / kPiL) * log_part * j_sum - finite / kPiL - psi_sum / kPiL;
  return {static_cast<double>(j_sum), static_cast<double>(y)};
}

double jacobi_polynomial(int n, double alpha, double beta, double z) {
  if (n < 0) throw DomainError("jacobi_polynomial: negative degree");
  if (n == 0) return 1.0;
  const auto all = jacobi_polynomials(n, alpha, beta, z);
  return all.back();
}

std::vector<double> jacobi_polynomials(int n_max, double alpha, double beta, double z) {
  if (n_max < 0) throw DomainError("jacobi_polynomials: negative degree");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw DomainError("jacobi_polynomials: alpha, beta must exceed -1");
  std::vector<double> p(n_max + 1);
  p[0] = 1.0;
  if (n_max == 0) return p;
  const double ab = alpha + beta;
  p[1] = (alpha + 1.0) + 0.5 * (ab + 2.0) * (z - 1.0);
  for (int n = 2; n <= n_max; ++n) {
    const double s = 2.0 * n + ab;
    const double a1 = 2.0 * n * (n + ab) * (s - 2.0);
    const double a2 = (s - 1.0) * (alpha * alpha - beta * beta);
    const double a3 = (s - 2.0) * (s - 1.0) * s;
    const double a4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * s;
    p[n] = ((a2 + a3 * z) * p[n - 1] - a4 * p[n - 2]) / a1;
  }
  return p;
}

double jacobi_log_norm(int n, double alpha, double beta) {
  const double ab = alpha + beta;
  return (ab + 1.0) * std::log(2.0) - std::log(2.0 * n + ab + 1.0) + std::lgamma(n + alpha + 1.0) +
         std::lgamma(n + beta + 1.0) - std::lgamma(n + ab + 1.0) - std::lgamma(n + 1.0);
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 4e-16) {
        // one more evaluation of the derivative at the converged node
        double q0 = 1.0, q1 = x;
        for (int k = 2; k <= n; ++k) {
          const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        dp = n * (x * q1 - q0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace hyperadia::specfun
