#include "ars/specfun.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>

namespace ars::specfun {
namespace {

bool is_nonpositive_integer(double y) { return y <= 0.0 && y == std::floor(y); }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": argument not finite");
}

// gamma(s, z) for s > 0 by the power series z^s e^-z sum z^n / (s)_(n+1).
double lower_series(double s, double z) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= z / (s + n);
    sum += term;
    if (std::abs(term) < kSeriesTolerance * std::abs(sum)) {
      return sum * std::exp(-z + s * std::log(z));
    }
  }
  throw ConvergenceError("lower incomplete gamma series did not converge");
}

// Legendre continued fraction for Gamma(s, z), modified Lentz evaluation.
// Valid for every real s when z > 0; fast once z is away from 0.
double upper_continued_fraction(double s, double z) {
  constexpr double tiny = 1e-300;
  double b = z + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 4.0 * DBL_EPSILON) {
      return std::exp(-z + s * std::log(z)) * h;
    }
  }
  throw ConvergenceError("upper incomplete gamma continued fraction did not converge");
}

// E1(z) = Gamma(0, z) for small z.
double exponential_integral_e1(double z) {
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < kMaxTerms; ++n) {
    term *= -z / n;
    const double contribution = term / n;
    sum += contribution;
    if (std::abs(contribution) < kSeriesTolerance * std::abs(sum)) {
      return -std::numbers::egamma - std::log(z) - sum;
    }
  }
  throw ConvergenceError("E1 series did not converge");
}

constexpr double kFractionCutoff = 1.5;

double hypergeometric_series(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  int small_terms = 0;
  for (int n = 0; n < kMaxTerms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    if (term == 0.0) return sum;
    sum += term;
    // Two consecutive small terms, so an accidental near-zero factor does
    // not end the sum early.
    if (std::abs(term) < kSeriesTolerance * std::abs(sum)) {
      if (++small_terms == 2) return sum;
    } else {
      small_terms = 0;
    }
  }
  throw ConvergenceError("2F1 series did not converge within the term cap");
}

}  // namespace

double gamma(double y) {
  require_finite(y, "gamma");
  if (is_nonpositive_integer(y)) throw std::domain_error("gamma: pole at non-positive integer");
  return std::tgamma(y);
}

double upper_gamma(double s, double z) {
  require_finite(s, "upper_gamma");
  require_finite(z, "upper_gamma");
  if (!(z > 0.0)) throw std::domain_error("upper_gamma: z must be positive");

  if (z >= std::max(kFractionCutoff, s + 1.0)) return upper_continued_fraction(s, z);
  if (s > 0.0) return gamma(s) - lower_series(s, z);

  // s <= 0 and small z: shift s up into (0, 1] (or to 0 for integer s) and
  // walk back down with Gamma(s, z) = (Gamma(s+1, z) - z^s e^-z) / s.
  const int steps = is_nonpositive_integer(s) ? static_cast<int>(-s)
                                              : static_cast<int>(std::ceil(-s));
  const double base = s + steps;
  double value = base == 0.0 ? exponential_integral_e1(z) : upper_gamma(base, z);
  for (int j = steps - 1; j >= 0; --j) {
    const double sigma = s + j;
    value = (value - std::exp(-z + sigma * std::log(z))) / sigma;
  }
  return value;
}

double lower_gamma(double s, double z) {
  require_finite(s, "lower_gamma");
  require_finite(z, "lower_gamma");
  if (is_nonpositive_integer(s)) throw std::domain_error("lower_gamma: s is a pole of gamma");
  if (!(z > 0.0)) throw std::domain_error("lower_gamma: z must be positive");
  if (s > 0.0 && z < std::max(kFractionCutoff, s + 1.0)) return lower_series(s, z);
  return gamma(s) - upper_gamma(s, z);
}

double erf(double x) { return std::erf(x); }

double gauss_2f1(double a, double b, double c, double z) {
  require_finite(z, "gauss_2f1");
  if (is_nonpositive_integer(c)) throw std::domain_error("gauss_2f1: c is a non-positive integer");
  if (!(z < 1.0)) throw std::domain_error("gauss_2f1: requires z < 1");
  if (z == 0.0) return 1.0;
  if (z < -0.5) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^-a 2F1(a, c-b; c; z/(z-1)).
    return std::pow(1.0 - z, -a) * hypergeometric_series(a, c - b, c, z / (z - 1.0));
  }
  return hypergeometric_series(a, b, c, z);
}

double legendre_p(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::domain_error("legendre_p: nu must be >= 0");
  if (!(x > -1.0 && x <= 1.0)) throw std::domain_error("legendre_p: x must lie in (-1, 1]");
  return gauss_2f1(-nu, nu + 1.0, 1.0, 0.5 * (1.0 - x));
}

}  // namespace ars::specfun
