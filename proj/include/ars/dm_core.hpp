#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

/// Analytic facts about the Darling-Mandelbrot law D(alpha) and its geometric
/// convolution D(alpha, p).
///
/// Conventions: phi_alpha is the characteristic function of the unshifted
/// law (the limit of Y_t / t for the threshold sum process). The complexity
/// of an anticipated rejection algorithm includes the final successful run,
/// so it follows the shifted law with characteristic function
/// e^{is} phi_alpha(s). D(alpha, p) always denotes the shifted geometric
/// convolution; `cf_dmp` returns the factor phi_{alpha,p} without e^{is}.
namespace ars::dm {

/// Tail exponent. Positive by construction; operations on D(alpha) further
/// require alpha < 1 (see require_dm_range).
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::domain_error("alpha must be a positive finite number");
    }
  }
  double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }

 private:
  double value_;
};

/// Throws std::domain_error unless 0 < alpha < 1.
void require_dm_range(Alpha alpha);

struct GeomParams {
  GeomParams(Alpha a, double success) : alpha(a), p(success) {
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("p must lie in (0, 1]");
  }
  Alpha alpha;
  double p;
};

/// Exponential tail g(x) ~ amplitude * e^{-a0 x}, amplitude = (a0/alpha) e^{-a0}.
struct TailConstant {
  double a0;
  double amplitude;
};

/// Raised when the entire series is evaluated outside its usable range.
class SeriesRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |s| above which the characteristic-function series loses too many digits
/// to cancellation; callers should integrate the tabulated density instead.
inline constexpr double kSeriesRange = 30.0;

/// 1 - sum_{n>=1} alpha/(n-alpha) w^n/n!, the reciprocal of phi_alpha at
/// is = w. Its unique positive zero is a0.
double series_denominator(Alpha alpha, double w);
std::complex<double> series_denominator(Alpha alpha, std::complex<double> w);

/// phi_alpha(s), times e^{is} when `shifted`.
std::complex<double> cf_dm(Alpha alpha, double s, bool shifted);

/// Laplace transform G(z) = z^-alpha / (-alpha lower_gamma(-alpha, z)) of the
/// unshifted density, through the incomplete gamma functions.
double laplace_dm(Alpha alpha, double z);

/// Raw moment E[Y^order] of D(alpha), from the power-series inverse of the
/// series denominator.
double moments_dm(Alpha alpha, int order, bool shifted);
double mean_dm(Alpha alpha, bool shifted);
double variance_dm(Alpha alpha);

/// Raw moment of the (shifted) geometric convolution D(alpha, p).
double moments_dmp(const GeomParams& params, int order);
double mean_dmp(const GeomParams& params);
double variance_dmp(const GeomParams& params);

/// Positive zero of series_denominator, i.e. the tail rate a0.
TailConstant find_a0(Alpha alpha);

/// Zeros of series_denominator in the upper half plane, ordered by
/// imaginary part. With a0 and the conjugates they are all the poles of the
/// Laplace transform 1 / D(-z).
std::vector<std::complex<double>> complex_zeros(Alpha alpha, int count);

/// Residue expansion g(x) = sum_w (w/alpha) e^{-w(1+x)} over every zero w of
/// the series denominator. The real zero gives the leading tail; the complex
/// pairs decay like k^(1-(1+alpha)(1+x)) in their index k, so the sum
/// converges absolutely for x > 1 and quickly from x = 3 on.
class PoleExpansion {
 public:
  explicit PoleExpansion(Alpha alpha, int pairs = 400);
  double operator()(double x) const;
  /// Size of the last pair included at x, relative to the sum.
  double truncation(double x) const;
  double a0() const noexcept { return a0_; }
  std::size_t pairs() const noexcept { return zeros_.size(); }

 private:
  double alpha_;
  double a0_;
  std::vector<std::complex<double>> zeros_;
};

/// phi_{alpha,p}(s) by geometric resummation p phi / (1 - (1-p) e^{is} phi).
std::complex<double> cf_dmp(const GeomParams& params, double s);
/// Same quantity from its own entire series.
std::complex<double> cf_dmp_series(const GeomParams& params, double s);

/// Smallest positive nu with P_nu(cos theta_max) = 0. The survival exponent
/// of a walk in the cone of half-angle theta_max is nu / 2.
double legendre_nu(double theta_max);

/// Survival exponent pi / (2 theta) of a planar walk confined to a wedge of
/// opening theta, 0 < theta <= 2 pi.
double wedge_alpha(double theta);

}  // namespace ars::dm
