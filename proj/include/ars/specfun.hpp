#pragma once

#include <stdexcept>

/// Real-argument special functions used by the distribution code.
namespace ars::specfun {

/// Raised when a series or continued fraction fails to converge within the
/// term cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Series are truncated once a term drops below this fraction of the
/// partial sum.
inline constexpr double kSeriesTolerance = 1e-16;
inline constexpr int kMaxTerms = 10000;

/// Gamma function; throws std::domain_error at the poles 0, -1, -2, ...
double gamma(double y);

/// Upper incomplete gamma function, integral of x^(s-1) e^(-x) over [z, inf).
/// Any real s is accepted (negative s through the shift recurrence for
/// small z); z must be positive.
double upper_gamma(double s, double z);

/// Lower incomplete gamma function, gamma(s) - upper_gamma(s, z). For s < 0
/// this is the analytic continuation of the integral over [0, z].
double lower_gamma(double s, double z);

double erf(double x);

/// Gauss hypergeometric function 2F1(a, b; c; z) for z < 1. Arguments below
/// -1/2 are mapped into [1/3, 1) with the Pfaff transformation.
double gauss_2f1(double a, double b, double c, double z);

/// Legendre function of the first kind P_nu(x), nu >= 0, x in (-1, 1].
double legendre_p(double nu, double x);

}  // namespace ars::specfun
