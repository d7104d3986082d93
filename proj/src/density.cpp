#include "ars/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "ars/specfun.hpp"

namespace ars::dm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Product-trapezoid weights for int_0^J s^gamma phi(s) ds on unit cells:
// cell j contributes left[j] phi(j) + right[j] phi(j+1), with phi linear on
// the cell and the power s^gamma integrated exactly.
struct PowerWeights {
  std::vector<double> left;
  std::vector<double> right;
};

PowerWeights power_weights(double gamma, std::size_t cells) {
  PowerWeights w;
  w.left.resize(cells);
  w.right.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = static_cast<double>(j);
    double whole;  // int s^gamma
    double ramp;   // int s^gamma (s - j)
    if (j < 16) {
      whole = (std::pow(a + 1, gamma + 1) - std::pow(a, gamma + 1)) / (gamma + 1);
      ramp = (std::pow(a + 1, gamma + 2) - std::pow(a, gamma + 2)) / (gamma + 2) - a * whole;
    } else {
      // Closed forms cancel badly here; the integrand is smooth on the cell.
      using Gauss = boost::math::quadrature::gauss<double, 15>;
      whole = Gauss::integrate([&](double s) { return std::pow(s, gamma); }, a, a + 1);
      ramp = Gauss::integrate([&](double s) { return std::pow(s, gamma) * (s - a); }, a, a + 1);
    }
    w.left[j] = whole - ramp;
    w.right[j] = ramp;
  }
  return w;
}

// zeta(-gamma) A h^(1+gamma) + zeta(-gamma-1) A' h^(2+gamma): how far the
// trapezoid rule overshoots the integral of A (s-c)^gamma + A' (s-c)^(gamma+1)
// from a node c (generalised Euler-Maclaurin).
double kink_excess(double gamma, double value, double slope, double h) {
  double excess = boost::math::zeta(-gamma) * value * std::pow(h, 1.0 + gamma);
  if (slope != 0.0) excess += boost::math::zeta(-gamma - 1.0) * slope * std::pow(h, 2.0 + gamma);
  return excess;
}

// g1(x) = c1 (x-1)^(2 alpha) F(x); F(1) = 1 and F'(1) is this value.
double kFirstSlope(double a) { return -(1.0 + a) / (1.0 + 2.0 * a); }

// Relative agreement with the residue expansion required to keep using the
// integrated values.
constexpr double kExpansionAgreement = 1e-7;

void validate_grid_request(Alpha alpha, double h, int x_max) {
  require_dm_range(alpha);
  if (!(h > 0.0) || h > 1.0 / 64.0) throw std::invalid_argument("density step must lie in (0, 1/64]");
  const double per_unit = 1.0 / h;
  if (per_unit != std::round(per_unit) || std::fmod(per_unit, 2.0) != 0.0) {
    throw std::invalid_argument("density step must be 1/M for an even integer M");
  }
  if (x_max < 3) throw std::invalid_argument("x_max must be an integer >= 3");
}

}  // namespace

double DensityGrid::leading_tail_mass() const noexcept {
  return std::exp(-tail_.a0 * (1.0 + x_max_)) / alpha_;
}

double DensityGrid::density(double x) const {
  if (!(x > 0.0)) throw std::domain_error("density: x must be positive");
  if (x <= 1.0) return head_constant_ * std::pow(x, alpha_ - 1.0);
  if (x > x_max_) return tail_amplitude_ * std::exp(-tail_.a0 * x);
  const auto i = std::min(static_cast<std::size_t>(x / step_), last_index() - 1);
  const double t = (x - this->x(i)) / step_;
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

DensityGrid build_density(Alpha alpha, double h, int x_max) {
  validate_grid_request(alpha, h, x_max);
  const double a = alpha.value();
  const auto per_unit = static_cast<std::size_t>(std::llround(1.0 / h));
  const std::size_t last = per_unit * static_cast<std::size_t>(x_max);

  DensityGrid grid;
  grid.alpha_ = a;
  grid.step_ = h;
  grid.x_max_ = x_max;
  grid.per_unit_ = per_unit;
  grid.head_constant_ = std::sin(a * std::numbers::pi) / std::numbers::pi;
  grid.tail_ = find_a0(alpha);

  const double c0 = grid.head_constant_;
  const double c1 = singularity_coefficient(alpha, 1).c_k;
  const auto g0 = [&](std::size_t i) { return c0 * std::pow(i * h, a - 1.0); };
  auto& g = grid.values_;
  g.assign(last + 1, 0.0);
  g[0] = kInf;
  for (std::size_t i = 1; i <= per_unit; ++i) g[i] = g0(i);

  // Past x = 1 write g = g0 + r and r = g1 + q, with q = 0 on [1, 2]. Then
  //   g*g = g0*g0 + 2 g0*g1 + [2 g0*q + r*r],
  // where the first two terms are closed forms carrying the strong
  // singularities and the bracket is integrated on the grid.
  std::vector<double> r(last + 1, 0.0);
  std::vector<double> q(last + 1, 0.0);
  const double head_square =
      c0 * c0 * specfun::gamma(a) * specfun::gamma(a) / specfun::gamma(2.0 * a);
  const auto closed_conv = [&](double u) {
    return head_square * std::pow(u, 2.0 * a - 1.0) + 2.0 * convolution_g0_g1(alpha, u);
  };

  // c0 int_0^T t^(alpha-1) q(u-t) dt; the weight of the node at t = T is
  // dropped because q(2) = 0.
  const std::size_t span = x_max > 3 ? per_unit * static_cast<std::size_t>(x_max - 3) : 0;
  std::vector<double> head_weights(span + 1, 0.0);
  {
    const PowerWeights cells = power_weights(a - 1.0, span + 1);
    for (std::size_t j = 0; j <= span; ++j) head_weights[j] = cells.left[j] + (j > 0 ? cells.right[j - 1] : 0.0);
  }
  const double head_scale = c0 * std::pow(h, a);

  // The bracket at u = m h > 2.
  const auto grid_conv = [&](std::size_t m) {
    const std::size_t lo = 2 * per_unit;
    double head_part = 0.0;
    for (std::size_t j = 0; j < m - lo; ++j) head_part += head_weights[j] * q[m - j];

    // r*r on [1, u-1], both ends vanishing like c1 (s-1)^(2 alpha).
    double square = 0.0;
    std::size_t j = per_unit + 1;
    for (; j < m - j; ++j) square += 2.0 * r[j] * r[m - j];
    if (j == m - j) square += r[j] * r[j];
    square *= h;
    const std::size_t far = m - per_unit;  // node at u - 1
    const double edge = r[far];
    double edge_slope = 0.0;
    if (far >= per_unit + 2) edge_slope = kFirstSlope(a) * edge - (r[far + 1] - r[far - 1]) / (2.0 * h);
    square -= 2.0 * kink_excess(2.0 * a, c1 * edge, c1 * edge_slope, h);
    return 2.0 * head_scale * head_part + square;
  };

  // [1, 2]: the source is head_square (y-1)^(2 alpha - 1) y^-alpha; integrate
  // it with product weights in s = y - 1.
  const PowerWeights first = power_weights(2.0 * a - 1.0, per_unit);
  const double first_scale = head_square * std::pow(h, 2.0 * a);
  // w = x^(1-alpha) g(x) only decreases; stepping it locally keeps relative
  // accuracy deep in the exponential tail.
  double w = c0;
  for (std::size_t c = 0; c < per_unit; ++c) {
    const double phi_l = std::pow(1.0 + c * h, -a);
    const double phi_r = std::pow(1.0 + (c + 1) * h, -a);
    w -= a * first_scale * (first.left[c] * phi_l + first.right[c] * phi_r);
    const std::size_t i = per_unit + c + 1;
    g[i] = w * std::pow(i * h, a - 1.0);
    r[i] = g[i] - g0(i);
  }

  using Gauss = boost::math::quadrature::gauss<double, 7>;
  boost::math::quadrature::tanh_sinh<double> edge_rule;
  const auto closed_source = [&](double y) { return std::pow(y, -a) * closed_conv(y - 1.0); };
  std::vector<double> bracket(last + 1, 0.0);  // bracket[m]: grid part of (g*g)(m h)

  for (int k = 2; k < x_max; ++k) {
    const std::size_t begin = per_unit * static_cast<std::size_t>(k - 1);
    if (k >= 3) {
      for (std::size_t m = begin + 1; m <= begin + per_unit; ++m) bracket[m] = grid_conv(m);
    }
    const std::size_t start = per_unit * static_cast<std::size_t>(k);
    for (std::size_t i = start; i < start + per_unit; ++i) {
      const double y0 = i * h;
      const double y1 = (i + 1) * h;
      // g0*g1 behaves like (y-2)^(3 alpha) at y = 2.
      const double smooth = i == 2 * per_unit ? edge_rule.integrate(closed_source, y0, y1)
                                              : Gauss::integrate(closed_source, y0, y1);
      const double rough = 0.5 * h * (std::pow(y0, -a) * bracket[i - per_unit] + std::pow(y1, -a) * bracket[i + 1 - per_unit]);
      w -= a * (smooth + rough);
      g[i + 1] = w * std::pow(y1, a - 1.0);
      r[i + 1] = g[i + 1] - g0(i + 1);
      q[i + 1] = r[i + 1] - density_gk(alpha, 1, y1);
    }
  }

  // Far out the forward integration loses relative accuracy: an error in
  // the early steps excites a perturbation decaying only like x^(-1-alpha)
  // while g decays exponentially. From the last integer where the grid
  // still agrees with the residue expansion, continue with the expansion.
  const PoleExpansion poles(alpha);
  int limit = 3;
  while (limit < x_max) {
    const double exact = poles(limit + 1.0);
    const double solved = g[per_unit * static_cast<std::size_t>(limit + 1)];
    if (!(std::abs(solved - exact) <= kExpansionAgreement * exact)) break;
    ++limit;
  }
  grid.ode_limit_ = limit;
  for (std::size_t i = per_unit * static_cast<std::size_t>(limit) + 1; i <= last; ++i) {
    g[i] = poles(i * h);
    r[i] = g[i] - g0(i);
  }

  auto& cum = grid.cumulative_;
  cum.assign(last + 1, 0.0);
  for (std::size_t i = 1; i <= per_unit; ++i) cum[i] = c0 * std::pow(i * h, a) / a;
  // Mass of r by trapezoid, less the excess from the kinks at the integers.
  double mass_r = 0.0;
  double excess = kink_excess(2.0 * a, c1, c1 * kFirstSlope(a), h);
  for (std::size_t i = per_unit; i < last; ++i) {
    if (i > per_unit && i % per_unit == 0) {
      const SeriesParams s = singularity_coefficient(alpha, static_cast<int>(i / per_unit));
      excess += kink_excess(s.beta_k - 1.0, s.c_k, 0.0, h);
    }
    mass_r += 0.5 * h * (r[i] + r[i + 1]);
    cum[i + 1] = c0 * std::pow((i + 1) * h, a) / a + mass_r - excess;
  }

  // The leading pole term continues the grid smoothly past x_max. Closing the mass
  // with a fitted amplitude instead would absorb the quadrature error, which for
  // small alpha exceeds the whole tail mass.
  grid.tail_amplitude_ = grid.tail_.amplitude;
  grid.mass_scale_ = cum[last] + grid.leading_tail_mass();
  return grid;
}

double convolution_g0_g1(Alpha alpha, double u) {
  require_dm_range(alpha);
  if (!(u > 1.0)) return 0.0;
  const double a = alpha.value();
  const double c0 = std::sin(a * std::numbers::pi) / std::numbers::pi;
  const double head_square = c0 * c0 * specfun::gamma(a) * specfun::gamma(a) / specfun::gamma(2.0 * a);
  const double beta = specfun::gamma(a + 1.0) * specfun::gamma(2.0 * a) / specfun::gamma(3.0 * a + 1.0);
  return -head_square * c0 * beta * std::pow(u - 1.0, 3.0 * a) *
         specfun::gauss_2f1(1.0, a + 1.0, 3.0 * a + 1.0, 1.0 - u);
}

SeriesParams singularity_coefficient(Alpha alpha, int k) {
  require_dm_range(alpha);
  if (k < 0) throw std::invalid_argument("singularity_coefficient: k must be >= 0");
  const double a = alpha.value();
  const double beta = a + k * (1.0 + a);
  const double c = 1.0 / (specfun::gamma(1.0 - a) * std::pow(specfun::gamma(-a), k) * specfun::gamma(beta));
  return {k, beta, c};
}

double factor_a(Alpha alpha, double x) {
  if (!(x > 0.0)) return 0.0;
  return std::sin(alpha.value() * std::numbers::pi) / std::numbers::pi * std::pow(x, alpha.value() - 1.0);
}

double factor_b(Alpha alpha, double x) {
  if (!(x > 1.0)) return 0.0;
  return -std::sin(alpha.value() * std::numbers::pi) / std::numbers::pi * std::pow(x - 1.0, alpha.value()) / x;
}

double density_gk(Alpha alpha, int k, double x) {
  require_dm_range(alpha);
  if (k < 0 || k > 4) throw std::invalid_argument("density_gk: k must lie in [0, 4]");
  if (!(x > k)) throw std::domain_error("density_gk: g_k is supported on x > k");
  const double a = alpha.value();
  if (k == 0) return factor_a(alpha, x);
  if (k == 1) {
    const SeriesParams s = singularity_coefficient(alpha, 1);
    return s.c_k * std::pow(x - 1.0, 2.0 * a) * specfun::gauss_2f1(1.0, 1.0 + a, 1.0 + 2.0 * a, 1.0 - x);
  }
  // g_k = g_{k-1} * b; both factors vanish at the ends of (k-1, x-1).
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto integrand = [&](double y) {
    if (!(y > k - 1) || !(x - y > 1.0)) return 0.0;
    return density_gk(alpha, k - 1, y) * factor_b(alpha, x - y);
  };
  return integrator.integrate(integrand, static_cast<double>(k - 1), x - 1.0, 1e-11);
}

AnnihilatorReport check_annihilator(const DensityGrid& grid, int k) {
  return check_annihilator(grid, k, k - 1.0, static_cast<double>(k));
}

AnnihilatorReport check_annihilator(const DensityGrid& grid, int k, double lo, double hi) {
  constexpr std::size_t kExclusion = 16;
  if (k < 1 || k > static_cast<int>(kExclusion)) throw std::invalid_argument("check_annihilator: k must lie in [1, 16]");
  if (k > grid.x_max()) throw std::invalid_argument("check_annihilator: k exceeds x_max");
  if (!(lo < hi) || lo < 0.0 || hi > grid.x_max()) throw std::invalid_argument("check_annihilator: bad interval");

  const double h = grid.step();
  const double a = grid.alpha();
  const std::size_t last = grid.last_index();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> current(grid.values().begin(), grid.values().end());
  current[0] = nan;
  std::vector<double> next(current.size(), nan);
  for (int j = 0; j < k; ++j) {
    std::fill(next.begin(), next.end(), nan);
    for (std::size_t i = 1; i < last; ++i) {
      const double flux_r = (grid.x(i + 1) - j) * current[i + 1];
      const double flux_l = (grid.x(i - 1) - j) * current[i - 1];
      next[i] = (flux_r - flux_l) / (2.0 * h) - (j + 1) * a * current[i];
    }
    current.swap(next);
  }

  AnnihilatorReport report{k, 0.0, nan, 0};
  const std::size_t per_unit = grid.per_unit();
  for (std::size_t i = 1; i < last; ++i) {
    const double x = grid.x(i);
    if (!(x > lo && x < hi)) continue;
    const std::size_t offset = i % per_unit;
    if (offset <= kExclusion || per_unit - offset <= kExclusion) continue;
    if (!std::isfinite(current[i])) continue;
    ++report.points;
    if (std::abs(current[i]) > report.max_residual) {
      report.max_residual = std::abs(current[i]);
      report.at = x;
    }
  }
  if (report.points == 0) throw std::invalid_argument("check_annihilator: grid too coarse for the interval");
  return report;
}

namespace {

// The head mass on (0, 1] is exact; the normalising correction goes to the
// quadrature beyond it.
double outer_factor(const DensityGrid& grid) {
  const double head = grid.cumulative(grid.per_unit());
  return (1.0 - head) / (grid.mass_scale() - head);
}

}  // namespace

double normalised_mass(const DensityGrid& grid, double mass) {
  const double head = grid.cumulative(grid.per_unit());
  return mass <= head ? mass : head + (mass - head) * outer_factor(grid);
}

double cdf(const DensityGrid& grid, double x) {
  if (!(x > 0.0)) return 0.0;
  const double a = grid.alpha_;
  double mass;
  if (x <= 1.0) {
    mass = grid.head_constant_ * std::pow(x, a) / a;
  } else if (x <= grid.x_max_) {
    const double h = grid.step_;
    const auto i = std::min(static_cast<std::size_t>(x / h), grid.last_index() - 1);
    const double dx = x - grid.x(i);
    const double g0 = grid.values_[i];
    const double g1 = grid.values_[i + 1];
    mass = grid.cumulative_[i] + dx * g0 + dx * dx / (2.0 * h) * (g1 - g0);
  } else {
    const double a0 = grid.tail_.a0;
    mass = grid.cumulative_.back() +
           grid.tail_amplitude_ / a0 * (std::exp(-a0 * grid.x_max_) - std::exp(-a0 * x));
  }
  return std::clamp(normalised_mass(grid, mass), 0.0, 1.0);
}

double quantile(const DensityGrid& grid, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0, 1)");
  const double a = grid.alpha();
  const std::size_t per_unit = grid.per_unit();
  const std::size_t last = grid.last_index();
  const double head = grid.cumulative(per_unit);
  const double target = u <= head ? u : head + (u - head) / outer_factor(grid);

  if (target <= head) {
    return std::pow(a * target / grid.head_constant(), 1.0 / a);
  }
  if (target >= grid.grid_mass()) {
    const double a0 = grid.tail().a0;
    const double rest = std::exp(-a0 * grid.x_max()) - (target - grid.grid_mass()) * a0 / grid.tail_amplitude();
    if (!(rest > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(rest) / a0;
  }

  std::size_t lo = per_unit;
  std::size_t hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (grid.cumulative(mid) <= target ? lo : hi) = mid;
  }
  double left = grid.x(lo);
  double right = grid.x(lo + 1);
  while (right - left > 1e-12) {
    const double mid = 0.5 * (left + right);
    (cdf(grid, mid) <= u ? left : right) = mid;
  }
  return 0.5 * (left + right);
}

double sample_dm(const DensityGrid& grid, bool shifted, Stream& rng) {
  // Midpoint of a 2^-53 cell: strictly inside (0, 1).
  const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double y = quantile(grid, u);
  return shifted ? y + 1.0 : y;
}

double sample_dmp(const DensityGrid& grid, double p, Stream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("sample_dmp: p must lie in (0, 1]");
  double total = sample_dm(grid, true, rng);
  while (rng.uniform() >= p) total += sample_dm(grid, true, rng);
  return total;
}

double grid_laplace(const DensityGrid& grid, double z) {
  if (!(z > 0.0)) throw std::domain_error("grid_laplace: z must be positive");
  const double a = grid.alpha();
  const double h = grid.step();
  const double c0 = grid.head_constant();
  const double top = grid.x_max();
  // g0 = c0 x^(alpha-1) in closed form up to x_max, r = g - g0 on the grid.
  const double power = c0 * std::pow(z, -a) * specfun::lower_gamma(a, z * top);
  double rest = 0.0;
  const auto r = [&](std::size_t i) { return (grid.g(i) - c0 * std::pow(grid.x(i), a - 1.0)) * std::exp(-z * grid.x(i)); };
  for (std::size_t i = grid.per_unit(); i < grid.last_index(); ++i) rest += 0.5 * h * (r(i) + r(i + 1));
  const double c1 = singularity_coefficient(Alpha(a), 1).c_k;
  rest -= kink_excess(2.0 * a, c1 * std::exp(-z), c1 * (kFirstSlope(a) - z) * std::exp(-z), h);
  const double rate = grid.tail().a0 + z;
  const double tail = grid.tail_amplitude() * std::exp(-rate * top) / rate;
  // The same split as cdf: the head on (0, 1] is exact, the rest is rescaled.
  const double head = c0 * std::pow(z, -a) * specfun::lower_gamma(a, z);
  return head + (power - head + rest + tail) * outer_factor(grid);
}

void write_density_table(std::ostream& out, const DensityGrid& grid, bool partials) {
  char line[160];
  std::snprintf(line, sizeof line, "# alpha=%.17g h=%.17g xmax=%d a0=%.17g\n", grid.alpha(), grid.step(),
                grid.x_max(), grid.tail().a0);
  out << line;
  if (partials) out << "# columns: x g g0 g0+g1\n";
  const Alpha alpha(grid.alpha());
  for (std::size_t i = 1; i <= grid.last_index(); ++i) {
    const double x = grid.x(i);
    if (partials) {
      const double g0 = density_gk(alpha, 0, x);
      const double g01 = x > 1.0 ? g0 + density_gk(alpha, 1, x) : g0;
      std::snprintf(line, sizeof line, "%.17g\t%.17g\t%.17g\t%.17g\n", x, grid.g(i), g0, g01);
    } else {
      std::snprintf(line, sizeof line, "%.17g\t%.17g\n", x, grid.g(i));
    }
    out << line;
  }
}

}  // namespace ars::dm
