#include "ars/dm_core.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ars/specfun.hpp"

namespace ars::dm {
namespace {

constexpr int kMaxMomentOrder = 60;

// 1 - sum_{n>=1} coeff(n) w^n / n!, accumulated in extended precision since
// the terms grow to about e^|w| before decaying.
template <class Scalar, class Coeff>
Scalar entire_series(Scalar w, Coeff&& coeff) {
  using Real = decltype(std::abs(w));
  const Real magnitude = std::abs(w);
  if (magnitude > static_cast<Real>(kSeriesRange)) {
    throw SeriesRangeError("series argument beyond the usable range; use the tabulated density");
  }
  Scalar sum = 1;
  Scalar power = 1;
  for (int n = 1; n < specfun::kMaxTerms; ++n) {
    power *= w / static_cast<Real>(n);
    const Scalar term = static_cast<Real>(coeff(n)) * power;
    sum -= term;
    if (n > magnitude && (std::abs(term) <= static_cast<Real>(specfun::kSeriesTolerance) * std::abs(sum) ||
                          std::abs(term) < static_cast<Real>(1e-32))) {
      return sum;
    }
  }
  throw specfun::ConvergenceError("entire series did not converge");
}

// E[Y^order] for the law whose characteristic function is
// (1 - sum c_n (is)^n / n!)^-1, optionally times e^{is}.
template <class Coeff>
double raw_moment(Coeff&& coeff, int order, bool shifted) {
  if (order < 1 || order > kMaxMomentOrder) {
    throw std::invalid_argument("moment order must lie in [1, 60]");
  }
  // Ordinary power-series coefficients of the inverse, in w = is.
  std::vector<long double> inverse(order + 1, 0.0L);
  std::vector<long double> factorial(order + 1, 1.0L);
  for (int k = 1; k <= order; ++k) factorial[k] = factorial[k - 1] * k;
  inverse[0] = 1.0L;
  for (int k = 1; k <= order; ++k) {
    long double acc = 0.0L;
    for (int n = 1; n <= k; ++n) acc += static_cast<long double>(coeff(n)) / factorial[n] * inverse[k - n];
    inverse[k] = acc;
  }
  long double coefficient = inverse[order];
  if (shifted) {
    coefficient = 0.0L;
    for (int j = 0; j <= order; ++j) coefficient += inverse[j] / factorial[order - j];
  }
  return static_cast<double>(factorial[order] * coefficient);
}

auto dm_coefficient(double alpha) {
  return [alpha](int n) { return static_cast<long double>(alpha) / (n - static_cast<long double>(alpha)); };
}

auto dmp_coefficient(const GeomParams& params) {
  const long double alpha = params.alpha.value();
  const long double ratio = (1.0L - params.p) / params.p;
  return [alpha, ratio](int n) { return (ratio * n + alpha) / (n - alpha); };
}

using Complex = std::complex<long double>;

// Gamma(s, zeta) for complex zeta off the negative real axis, by the same
// continued fraction as the real case.
Complex upper_gamma_complex(long double s, Complex zeta) {
  constexpr long double tiny = 1e-4000L;
  Complex b = zeta + 1.0L - s;
  Complex c = 1.0L / tiny;
  Complex d = 1.0L / b;
  Complex h = d;
  for (int i = 1; i < specfun::kMaxTerms; ++i) {
    const long double an = -i * (i - s);
    b += 2.0L;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const Complex delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0L) < 1e-18L) return std::exp(-zeta + s * std::log(zeta)) * h;
  }
  throw specfun::ConvergenceError("complex incomplete gamma continued fraction did not converge");
}

// Newton step toward a zero of the series denominator. Small |w| uses the
// entire series with D' = alpha (D - e^w) / w; larger |w| the equivalent
// equation Gamma(-alpha, -w) = Gamma(-alpha), whose derivative is
// (-w)^(-alpha-1) e^w.
Complex newton_step(long double alpha, long double gamma_neg, Complex w) {
  constexpr long double kSeriesRadius = 8.0L;
  if (std::abs(w) < kSeriesRadius) {
    const Complex value = entire_series(w, [alpha](int n) { return alpha / (n - alpha); });
    return value / (alpha * (value - std::exp(w)) / w);
  }
  const Complex value = upper_gamma_complex(-alpha, -w) - gamma_neg;
  return value / (std::exp(w - (alpha + 1.0L) * std::log(-w)));
}

}  // namespace

void require_dm_range(Alpha alpha) {
  if (!(alpha.value() < 1.0)) {
    throw std::domain_error("the Darling-Mandelbrot law requires 0 < alpha < 1");
  }
}

double series_denominator(Alpha alpha, double w) {
  return static_cast<double>(entire_series(static_cast<long double>(w), dm_coefficient(alpha)));
}

std::complex<double> series_denominator(Alpha alpha, std::complex<double> w) {
  const auto value = entire_series(std::complex<long double>(w), dm_coefficient(alpha));
  return {static_cast<double>(value.real()), static_cast<double>(value.imag())};
}

std::complex<double> cf_dm(Alpha alpha, double s, bool shifted) {
  require_dm_range(alpha);
  const std::complex<double> is(0.0, s);
  std::complex<double> phi = 1.0 / series_denominator(alpha, is);
  if (shifted) phi *= std::exp(is);
  return phi;
}

double laplace_dm(Alpha alpha, double z) {
  require_dm_range(alpha);
  if (!(z > 0.0)) throw std::domain_error("laplace_dm: z must be positive");
  const double a = alpha.value();
  return std::pow(z, -a) / (-a * specfun::lower_gamma(-a, z));
}

double moments_dm(Alpha alpha, int order, bool shifted) {
  require_dm_range(alpha);
  return raw_moment(dm_coefficient(alpha), order, shifted);
}

double mean_dm(Alpha alpha, bool shifted) { return moments_dm(alpha, 1, shifted); }

double variance_dm(Alpha alpha) {
  const double m1 = moments_dm(alpha, 1, false);
  return moments_dm(alpha, 2, false) - m1 * m1;
}

double moments_dmp(const GeomParams& params, int order) {
  require_dm_range(params.alpha);
  return raw_moment(dmp_coefficient(params), order, true);
}

double mean_dmp(const GeomParams& params) { return moments_dmp(params, 1); }

double variance_dmp(const GeomParams& params) {
  const double m1 = moments_dmp(params, 1);
  return moments_dmp(params, 2) - m1 * m1;
}

TailConstant find_a0(Alpha alpha) {
  require_dm_range(alpha);
  const auto value = [&](double z) { return series_denominator(alpha, z); };
  const auto slope = [&](double z) {
    // d/dz of the series: -sum alpha/(n-alpha) z^(n-1)/(n-1)!
    long double sum = 0.0L;
    long double power = 1.0L;
    for (int n = 1; n < specfun::kMaxTerms; ++n) {
      if (n > 1) power *= z / (n - 1.0L);
      const long double term = alpha.value() / (n - static_cast<long double>(alpha.value())) * power;
      sum += term;
      if (n > z && term <= 1e-17L * sum) break;
    }
    return -static_cast<double>(sum);
  };

  // D(0) = 1 and D decreases strictly on z > 0.
  double lo = 0.0;
  double hi = 1.0;
  while (value(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kSeriesRange) throw std::logic_error("find_a0: failed to bracket the tail rate");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) > 0.0 ? lo : hi) = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int iter = 0; iter < 50; ++iter) {
    const double step = value(z) / slope(z);
    const double next = z - step;
    if (!(next > lo && next < hi)) break;
    z = next;
    if (std::abs(step) <= 1e-15 * z) break;
  }
  return {z, z / alpha.value() * std::exp(-z)};
}

std::vector<std::complex<double>> complex_zeros(Alpha alpha, int count) {
  require_dm_range(alpha);
  if (count < 0) throw std::invalid_argument("complex_zeros: negative count");
  const long double a = alpha.value();
  const long double gamma_neg = specfun::gamma(-alpha.value());
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<std::complex<double>> zeros;
  zeros.reserve(count);
  for (int k = 1; k <= count; ++k) {
    // Asymptotically e^w (-w)^(-alpha-1) = Gamma(-alpha).
    Complex w(std::log(-gamma_neg), (2 * k + 1) * pi);
    for (int i = 0; i < 20; ++i) {
      w = std::log(-gamma_neg) + (a + 1.0L) * std::log(-w) + Complex(0.0L, (2 * k + 1) * pi);
    }
    for (int i = 0; i < 60; ++i) {
      const Complex step = newton_step(a, gamma_neg, w);
      w -= step;
      if (std::abs(step) < 1e-16L * std::abs(w)) break;
    }
    if (!(w.imag() > 0.0L) || (!zeros.empty() && !(w.imag() > zeros.back().imag() + 1.0L))) {
      throw std::runtime_error("complex_zeros: Newton iteration left its branch");
    }
    zeros.emplace_back(static_cast<double>(w.real()), static_cast<double>(w.imag()));
  }
  return zeros;
}

PoleExpansion::PoleExpansion(Alpha alpha, int pairs)
    : alpha_(alpha.value()), a0_(find_a0(alpha).a0), zeros_(complex_zeros(alpha, pairs)) {}

double PoleExpansion::operator()(double x) const {
  double sum = a0_ / alpha_ * std::exp(-a0_ * (1.0 + x));
  for (const auto& w : zeros_) {
    const double term = 2.0 * (w / alpha_ * std::exp(-w * (1.0 + x))).real();
    sum += term;
    if (std::abs(w) * std::exp(-w.real() * (1.0 + x)) < 1e-17 * std::abs(sum) * alpha_) break;
  }
  return sum;
}

double PoleExpansion::truncation(double x) const {
  if (zeros_.empty()) return 1.0;
  const auto& w = zeros_.back();
  return 2.0 * std::abs(w) / alpha_ * std::exp(-w.real() * (1.0 + x)) / std::abs((*this)(x));
}

std::complex<double> cf_dmp(const GeomParams& params, double s) {
  const std::complex<double> phi = cf_dm(params.alpha, s, false);
  const std::complex<double> shift = std::exp(std::complex<double>(0.0, s));
  return params.p * phi / (1.0 - (1.0 - params.p) * shift * phi);
}

std::complex<double> cf_dmp_series(const GeomParams& params, double s) {
  require_dm_range(params.alpha);
  const auto value = entire_series(std::complex<long double>(0.0L, s), dmp_coefficient(params));
  return 1.0 / std::complex<double>(static_cast<double>(value.real()), static_cast<double>(value.imag()));
}

double legendre_nu(double theta_max) {
  if (!(theta_max > 0.0 && theta_max < std::numbers::pi)) {
    throw std::domain_error("legendre_nu: theta_max must lie in (0, pi)");
  }
  const double x = std::cos(theta_max);
  const auto p = [x](double nu) { return specfun::legendre_p(nu, x); };

  constexpr double kScanStep = 0.01;
  constexpr double kScanCap = 40.0;
  double lo = 0.0;
  double p_lo = 1.0;
  for (int i = 1; lo < kScanCap; ++i) {
    const double hi = i * kScanStep;
    const double p_hi = p(hi);
    if (p_hi == 0.0) return hi;
    if ((p_lo > 0.0) != (p_hi > 0.0)) {
      double a = lo;
      double b = hi;
      while (b - a > 1e-13) {
        const double mid = 0.5 * (a + b);
        const double p_mid = p(mid);
        if (p_mid == 0.0) return mid;
        ((p_mid > 0.0) == (p_lo > 0.0) ? a : b) = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    p_lo = p_hi;
  }
  throw std::runtime_error("legendre_nu: no root of P_nu(cos theta_max) below the scan cap");
}

double wedge_alpha(double theta) {
  if (!(theta > 0.0)) throw std::domain_error("wedge_alpha: theta must be positive");
  if (theta > 2.0 * std::numbers::pi) {
    throw std::domain_error("wedge_alpha: wedges wider than 2 pi are not supported");
  }
  return std::numbers::pi / (2.0 * theta);
}

}  // namespace ars::dm
