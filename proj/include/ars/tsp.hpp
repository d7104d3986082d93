#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ars/rng.hpp"
#include "ars/stats.hpp"

/// Threshold sum process: Y_t = X_0 + ... + X_{I(t)-1}, where I(t) is the
/// first index with X_{I(t)} >= t.
namespace ars::tsp {

enum class BaseKind { pareto, user_process };

/// Law of a single attempt length, with survival F(x) = P(X >= x) ~ c x^-alpha.
class BaseDistribution {
 public:
  using Sampler = std::function<double(Stream&)>;
  using Survival = std::function<double(double)>;

  /// F(x) = min(1, x^-alpha): c = 1 and, for alpha > 1, mu = alpha/(alpha-1).
  static BaseDistribution pareto(double alpha);
  static BaseDistribution user_process(double alpha, double c, std::optional<double> mu, Sampler sampler,
                                       Survival survival);

  BaseKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double c() const noexcept { return c_; }
  const std::optional<double>& mu() const noexcept { return mu_; }

  double draw(Stream& rng) const;
  double survival(double x) const;

 private:
  BaseDistribution() = default;

  BaseKind kind_ = BaseKind::pareto;
  double alpha_ = 1;
  double c_ = 1;
  std::optional<double> mu_;
  Sampler sampler_;
  Survival survival_;
};

struct TspOutcome {
  double y = 0;
  std::uint64_t i = 0;
  double t = 0;
};

/// Draws until the first X >= t. Aborts (std::runtime_error) after 1e10 draws.
TspOutcome sample_tsp(const BaseDistribution& base, double t, Stream& rng);

/// The same law for a pareto base without drawing every summand. Summands
/// in [s, t), with (t/s)^alpha = 1000, are drawn one by one; the number of
/// summands below s is negative binomial, and once it exceeds a few
/// thousand their sum is replaced by a normal with the exact truncated mean
/// and variance.
TspOutcome sample_tsp_aggregated(const BaseDistribution& base, double t, Stream& rng);

/// tau = t (alpha < 1), t ln t (alpha = 1), t^alpha mu / c (alpha > 1).
double scaling_factor(const BaseDistribution& base, double t);

enum class Method { automatic, exact, aggregated };

/// Above this many expected draws per trial the automatic method
/// aggregates (pareto bases only).
inline constexpr double kAggregateAbove = 1e4;

/// n_trials independent runs; trial k draws from Stream(seed, k).
std::vector<TspOutcome> simulate(const BaseDistribution& base, double t, std::size_t n_trials, std::uint64_t seed,
                                 Method method = Method::automatic);

/// The runs of `simulate`, normalised by scaling_factor.
stats::EmpiricalSample run_trials(const BaseDistribution& base, double t, std::size_t n_trials, std::uint64_t seed,
                                  Method method = Method::automatic);

/// CSV with header `trial,y,i,normalized`.
void write_trials_csv(std::ostream& out, const std::vector<TspOutcome>& outcomes, double tau);

}  // namespace ars::tsp
