#include "ars/tsp.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ars/parallel.hpp"

namespace ars::tsp {
namespace {

constexpr std::uint64_t kRunawayDraws = 10'000'000'000ULL;
constexpr double kMediumRatio = 1000.0;
constexpr std::uint64_t kExactSmall = 4096;

// Pareto draw conditioned on [lo, hi): inversion of the truncated survival.
double truncated_pareto(double alpha, double lo, double hi, Stream& rng) {
  const double f_lo = std::pow(lo, -alpha);
  const double f_hi = std::isinf(hi) ? 0.0 : std::pow(hi, -alpha);
  return std::pow(f_lo - rng.uniform() * (f_lo - f_hi), -1.0 / alpha);
}

// E[X^k | 1 <= X < s] for the pareto law.
double truncated_moment(double alpha, double s, int k) {
  const double norm = alpha / (1.0 - std::pow(s, -alpha));
  if (std::abs(k - alpha) < 1e-12) return norm * std::log(s);
  return norm * (std::pow(s, k - alpha) - 1.0) / (k - alpha);
}

}  // namespace

BaseDistribution BaseDistribution::pareto(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::domain_error("pareto base: alpha must be positive");
  BaseDistribution base;
  base.kind_ = BaseKind::pareto;
  base.alpha_ = alpha;
  base.c_ = 1.0;
  if (alpha > 1.0) base.mu_ = alpha / (alpha - 1.0);
  return base;
}

BaseDistribution BaseDistribution::user_process(double alpha, double c, std::optional<double> mu, Sampler sampler,
                                                Survival survival) {
  if (!(alpha > 0.0) || !(c > 0.0)) throw std::domain_error("user base: alpha and c must be positive");
  if (!sampler || !survival) throw std::invalid_argument("user base: sampler and survival are required");
  BaseDistribution base;
  base.kind_ = BaseKind::user_process;
  base.alpha_ = alpha;
  base.c_ = c;
  base.mu_ = mu;
  base.sampler_ = std::move(sampler);
  base.survival_ = std::move(survival);
  return base;
}

double BaseDistribution::draw(Stream& rng) const {
  if (kind_ == BaseKind::pareto) return std::pow(rng.uniform_open0(), -1.0 / alpha_);
  return sampler_(rng);
}

double BaseDistribution::survival(double x) const {
  if (kind_ == BaseKind::pareto) return x <= 1.0 ? 1.0 : std::pow(x, -alpha_);
  return survival_(x);
}

TspOutcome sample_tsp(const BaseDistribution& base, double t, Stream& rng) {
  if (!(t >= 0.0)) throw std::domain_error("sample_tsp: t must be non-negative");
  TspOutcome out{0.0, 0, t};
  for (;;) {
    const double x = base.draw(rng);
    if (x >= t) return out;
    out.y += x;
    if (++out.i >= kRunawayDraws) throw std::runtime_error("sample_tsp: runaway run (survival underflow?)");
  }
}

TspOutcome sample_tsp_aggregated(const BaseDistribution& base, double t, Stream& rng) {
  if (base.kind() != BaseKind::pareto) throw std::invalid_argument("aggregated sampling needs a pareto base");
  if (!(t >= 0.0)) throw std::domain_error("sample_tsp: t must be non-negative");
  const double a = base.alpha();
  TspOutcome out{0.0, 0, t};
  if (t <= 1.0) return out;

  const double s = t * std::pow(kMediumRatio, -1.0 / a);
  if (!(s > 1.0)) return sample_tsp(base, t, rng);

  // Among draws of at least s, each is >= t with probability 1/kMediumRatio.
  std::geometric_distribution<std::uint64_t> medium_count(1.0 / kMediumRatio);
  const std::uint64_t medium = medium_count(rng);
  for (std::uint64_t k = 0; k < medium; ++k) out.y += truncated_pareto(a, s, t, rng);

  // Draws below s before the (medium+1)-th draw of at least s.
  std::negative_binomial_distribution<std::uint64_t> small_count(medium + 1, std::pow(s, -a));
  const std::uint64_t small = small_count(rng);
  if (small <= kExactSmall) {
    for (std::uint64_t k = 0; k < small; ++k) out.y += truncated_pareto(a, 1.0, s, rng);
  } else {
    const double m1 = truncated_moment(a, s, 1);
    const double var = truncated_moment(a, s, 2) - m1 * m1;
    const double n = static_cast<double>(small);
    std::normal_distribution<double> normal(n * m1, std::sqrt(n * var));
    out.y += std::max(normal(rng), n);  // each summand is at least 1
  }
  out.i = medium + small;
  return out;
}

double scaling_factor(const BaseDistribution& base, double t) {
  if (!(t > 1.0)) throw std::domain_error("scaling_factor: t must exceed 1");
  const double a = base.alpha();
  if (a < 1.0) return t;
  if (a == 1.0) return t * std::log(t);
  if (!base.mu()) throw std::invalid_argument("scaling_factor: alpha > 1 needs the mean mu");
  return std::pow(t, a) * *base.mu() / base.c();
}

std::vector<TspOutcome> simulate(const BaseDistribution& base, double t, std::size_t n_trials, std::uint64_t seed,
                                 Method method) {
  if (n_trials < 1) throw std::invalid_argument("simulate: need at least one trial");
  bool aggregate = method == Method::aggregated;
  if (method == Method::automatic) {
    aggregate = base.kind() == BaseKind::pareto && 1.0 / base.survival(t) > kAggregateAbove;
  }
  std::vector<TspOutcome> out(n_trials);
  parallel_for(n_trials, [&](std::size_t k) {
    Stream rng(seed, k);
    out[k] = aggregate ? sample_tsp_aggregated(base, t, rng) : sample_tsp(base, t, rng);
  });
  return out;
}

stats::EmpiricalSample run_trials(const BaseDistribution& base, double t, std::size_t n_trials, std::uint64_t seed,
                                  Method method) {
  const double tau = scaling_factor(base, t);
  const auto outcomes = simulate(base, t, n_trials, seed, method);
  std::vector<double> values;
  values.reserve(outcomes.size());
  for (const auto& o : outcomes) values.push_back(o.y / tau);
  return stats::EmpiricalSample(std::move(values), {"tsp", t, n_trials, seed});
}

void write_trials_csv(std::ostream& out, const std::vector<TspOutcome>& outcomes, double tau) {
  out << "trial,y,i,normalized\n";
  char line[128];
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& o = outcomes[k];
    std::snprintf(line, sizeof line, "%zu,%.17g,%llu,%.17g\n", k, o.y, static_cast<unsigned long long>(o.i),
                  o.y / tau);
    out << line;
  }
}

}  // namespace ars::tsp
