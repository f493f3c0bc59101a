#pragma once

// Special functions restricted to the parameter regimes of the step-potential
// problem: the symmetric Gauss function 2F1(-nu, nu+M+1; c; x) parameterized by
// the real product t = nu(nu+M+1), its logarithmic connection expansion about
// x = 1, integer-order Bessel functions at small argument, digamma, harmonic
// numbers and Jacobi polynomials.
//
// Every function is pure and thread-safe.

#include <utility>
#include <vector>

namespace hyperadia::specfun {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

struct HypergeometricConfig {
  double x_switch = 0.75;     // direct series up to here, connection expansion above
  double eps_abs = 1e-17;     // term cutoff, relative to 1 + |partial sum|
  int max_terms = 10000;
};

// A series argument together with its complement 1 - x. Near x = 1 the
// complement is the small quantity that carries the information, so it is
// stored rather than recomputed from x.
struct SeriesArgument {
  double x;
  double complement;
  static SeriesArgument from_x(double x) { return {x, 1.0 - x}; }
  static SeriesArgument from_complement(double w) { return {1.0 - w, w}; }
};

// 2F1(-nu, nu+M+1; c; x) with t = nu(nu+M+1).
struct SymmetricF1Params {
  double t;
  int M;
  int c;
  double x;
};

// 2F1(a, b; a+b-m; 1-w) with w = one_minus_x.
struct ConnectionExpansionParams {
  double a;
  double b;
  int m;
  double one_minus_x;
};

// Degree of 2F1(-nu, nu+M+1; c; x). The real product t is always available.
// When nu is real it is also kept split as base + frac with an integer base,
// because the connection expansion needs sin(pi nu) and the Pochhammer factor
// (-nu + base) to full relative accuracy when nu sits close to an integer, and
// recovering them from t or from a rounded nu would lose exactly those digits.
struct SymmetricDegree {
  double t;
  int base = 0;
  double frac = 0.0;  // NaN when nu is complex (t < -(M+1)^2/4)
  static SymmetricDegree from_t(double t, int M);
  static SymmetricDegree from_nu(double nu, int M);
  // nu = base + frac with frac carried exactly.
  static SymmetricDegree from_parts(int base, double frac, int M);
  bool real() const { return frac == frac; }
  double nu() const { return base + frac; }
};

// Direct power series about x = 0. Accepts any 0 <= x < 1; convergence slows
// as x -> 1, where the term budget may run out.
double f1_series(const SymmetricF1Params& p, const HypergeometricConfig& cfg = {});

// Logarithmic connection expansion about x = 1 (c - a - b = -m, m >= 0). The
// Gamma-function poles of a or b at nonpositive integers are removed
// analytically, so integer a (terminating series) is handled as well.
double f1_near_unit(const ConnectionExpansionParams& p, const HypergeometricConfig& cfg = {});

// Dispatches between the two representations. The connection path needs a real
// nu, i.e. t >= -(M+1)^2/4, and c <= M+1; otherwise the direct series is used
// for every x.
double f1_symmetric(double t, int M, int c, SeriesArgument arg,
                    const HypergeometricConfig& cfg = {});

// 2F1(-nu+s, nu+M+1+s; c+s; x) for an integer shift s >= 0 (s = 1 is the
// function appearing in the derivative).
double f1_symmetric(const SymmetricDegree& d, int M, int c, SeriesArgument arg, int shift = 0,
                    const HypergeometricConfig& cfg = {});

// d/dy ln 2F1(-nu, nu+M+1; c; y) at y = arg.x.
double f1_log_derivative_y(double t, int M, int c, SeriesArgument arg,
                           const HypergeometricConfig& cfg = {});
double f1_log_derivative_y(const SymmetricDegree& d, int M, int c, SeriesArgument arg,
                           const HypergeometricConfig& cfg = {});

// F = 2F1(-nu, nu+M+1; c; y) and dF/dy at y = arg.x, without dividing, so a
// zero of F is not an error.
struct ValueAndSlope {
  double value;
  double slope;
};
ValueAndSlope f1_value_and_slope_y(const SymmetricDegree& d, int M, int c, SeriesArgument arg,
                                   const HypergeometricConfig& cfg = {});

struct LogDerivativePair {
  double left;   // d/dz ln 2F1(-nu, nu+M+1; c_left;  (1+z)/2)
  double right;  // d/dz ln 2F1(-nu, nu+M+1; c_right; (1-z)/2)
};

// Both logarithmic derivatives at z_match for a common t.
LogDerivativePair f1_log_derivative(double t, int M, int c_left, int c_right, double z_match,
                                    const HypergeometricConfig& cfg = {});

// Same, with separate products on the two sides (the matching problem uses
// t_left = t_right - rho^2 V0 / 4).
LogDerivativePair f1_log_derivative(double t_left, double t_right, int M, int c_left,
                                    int c_right, double z_match,
                                    const HypergeometricConfig& cfg = {});

// nu >= -(M+1)/2 with nu(nu+M+1) = t, computed without cancellation.
// Requires t >= -(M+1)^2/4.
double nu_from_t(double t, int M);

// Modified Bessel function I_n(x), ascending series, 0 <= x <= 50.
double bessel_i(int order, double x);

struct BesselJY {
  double J;
  double Y;
};

// J_n(x) and Y_n(x) from the ascending series (logarithmic series for Y),
// summed in extended precision. 0 < x <= 25.
BesselJY bessel_jy(int order, double x);

double digamma(double x);
double harmonic(int n);

double sinpi(double x);
double cospi(double x);
// 1/Gamma(x), entire: zero at nonpositive integers.
double rgamma(double x);

double binomial(int n, int k);

// P_n^{(alpha,beta)}(z) by the three-term recurrence.
double jacobi_polynomial(int n, double alpha, double beta, double z);
// P_0 .. P_{n_max} at one z.
std::vector<double> jacobi_polynomials(int n_max, double alpha, double beta, double z);
// log of the flat-measure norm h_n = int_{-1}^{1} (1-z)^alpha (1+z)^beta P_n^2 dz.
double jacobi_log_norm(int n, double alpha, double beta);

// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

}  // namespace hyperadia::specfun
