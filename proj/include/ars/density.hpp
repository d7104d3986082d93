#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ars/dm_core.hpp"
#include "ars/rng.hpp"

namespace ars::dm {

/// Tabulated Darling-Mandelbrot density g on the grid x_i = i h, 0 < x_i <= x_max.
///
/// The head g(x) = C0 x^(alpha-1) is exact on (0, 1]; past x_max the density
/// is continued by an exponential tail A e^{-a0 x} whose amplitude A closes
/// the total mass to one. Immutable once built; safe to share across threads.
class DensityGrid {
 public:
  double alpha() const noexcept { return alpha_; }
  double step() const noexcept { return step_; }
  int x_max() const noexcept { return x_max_; }
  /// Nodes per unit length, 1/h.
  std::size_t per_unit() const noexcept { return per_unit_; }
  /// Index of the last node; node i sits at x = i h, i = 1..last_index().
  std::size_t last_index() const noexcept { return values_.size() - 1; }
  double x(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }
  /// g at node i (index 0 holds +inf, the head singularity).
  double g(std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  /// C0 = sin(alpha pi) / pi.
  double head_constant() const noexcept { return head_constant_; }
  const TailConstant& tail() const noexcept { return tail_; }
  /// Amplitude A of the tail A e^{-a0 x} used beyond x_max (the leading pole term).
  double tail_amplitude() const noexcept { return tail_amplitude_; }

  /// Mass of (0, x_i]: exact head plus trapezoid sums.
  double cumulative(std::size_t i) const noexcept { return cumulative_[i]; }
  /// Head integral + grid quadrature, without any tail.
  double grid_mass() const noexcept { return cumulative_.back(); }
  /// Tail mass beyond x_max implied by the leading asymptotic form
  /// (a0/alpha) e^{-a0 (1+x)}.
  double leading_tail_mass() const noexcept;
  /// Integer up to which the values come from the integrated equation;
  /// beyond it they come from the residue expansion.
  int ode_limit() const noexcept { return ode_limit_; }
  /// Normalising constant of cdf: grid mass plus leading tail mass.
  double mass_scale() const noexcept { return mass_scale_; }

  /// g at any x > 0: exact head, linear interpolation on the grid, tail
  /// beyond x_max.
  double density(double x) const;

 private:
  friend DensityGrid build_density(Alpha alpha, double h, int x_max);
  friend double cdf(const DensityGrid& grid, double x);
/// Maps raw mass of (0, x] to probability: identity on the exact head,
/// rescaled beyond it so that the total is one.
double normalised_mass(const DensityGrid& grid, double mass);

  double alpha_ = 0;
  double step_ = 0;
  int x_max_ = 0;
  std::size_t per_unit_ = 0;
  double head_constant_ = 0;
  TailConstant tail_{};
  double tail_amplitude_ = 0;
  double mass_scale_ = 1;
  int ode_limit_ = 0;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

inline constexpr double kDefaultStep = 1.0 / 4096.0;
inline constexpr int kDefaultXMax = 12;

/// Integrates x g'(x) + (1-alpha) g(x) = -alpha (g*g)(x-1) interval by interval
/// in its integral form
///   x^(1-alpha) g(x) = k^(1-alpha) g(k) - alpha int_k^x y^-alpha (g*g)(y-1) dy.
/// Where the integration stops agreeing with the residue expansion (see
/// PoleExpansion) to 1e-7, the expansion supplies the remaining nodes.
/// The step h must be 1/M for an even M >= 64; x_max must be an integer >= 3.
DensityGrid build_density(Alpha alpha, double h = kDefaultStep, int x_max = kDefaultXMax);

/// (g0 * g1)(u) in closed form:
///   -C0^3 B(alpha, alpha) B(alpha+1, 2 alpha) (u-1)^(3 alpha) 2F1(1, 1+alpha; 1+3 alpha; 1-u).
double convolution_g0_g1(Alpha alpha, double u);

/// Exponent and amplitude of the singular part C_k (x-k)^(beta_k - 1) that
/// the k-th summand contributes at the integer k.
struct SeriesParams {
  int k;
  double beta_k;
  double c_k;
};
SeriesParams singularity_coefficient(Alpha alpha, int k);

/// a(x) = C0 x^(alpha-1) and b(x) = -C0 (x-1)^alpha / x, the convolution
/// factors of the summands g_k = a * b^{*k}.
double factor_a(Alpha alpha, double x);
double factor_b(Alpha alpha, double x);

/// k-th summand g_k(x), x > k. k = 0 is the power law, k = 1 the
/// hypergeometric closed form; k in [2, 4] by numerical convolution
/// g_k = g_{k-1} * b.
double density_gk(Alpha alpha, int k, double x);

struct AnnihilatorReport {
  int k;
  double max_residual;
  double at;            // x where the maximum is attained
  std::size_t points;   // grid nodes inspected
};

/// Applies E_k = D_{k-1} ... D_0, D_j = d/dx (x-j) - (j+1) alpha, by centred
/// differences and reports max |E_k g| over grid nodes in (lo, hi) that are
/// more than 16 h away from every integer. Defaults to (k-1, k).
AnnihilatorReport check_annihilator(const DensityGrid& grid, int k);
AnnihilatorReport check_annihilator(const DensityGrid& grid, int k, double lo, double hi);

double cdf(const DensityGrid& grid, double x);
/// Inverse of cdf; u in (0, 1).
double quantile(const DensityGrid& grid, double u);
/// One draw of D(alpha) by inversion, plus one when `shifted`.
double sample_dm(const DensityGrid& grid, bool shifted, Stream& rng);
/// One draw of D(alpha, p): a geometric number (at least one, success
/// probability p) of shifted D(alpha) draws, summed.
double sample_dmp(const DensityGrid& grid, double p, Stream& rng);

/// Laplace transform of the tabulated density: exact head, trapezoid on the
/// grid and the closing tail.
double grid_laplace(const DensityGrid& grid, double z);

/// Density table: `# alpha=.. h=.. xmax=.. a0=..` then `x<TAB>g` rows with 17
/// significant digits. With `partials`, two more columns carry g0 and g0+g1.
void write_density_table(std::ostream& out, const DensityGrid& grid, bool partials = false);

}  // namespace ars::dm
