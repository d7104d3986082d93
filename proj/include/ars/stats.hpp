#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ars::stats {

struct SampleMeta {
  std::string source;
  double size = 0;       // n or t
  std::size_t runs = 0;
  std::uint64_t seed = 0;
};

/// Sorted, non-empty sample of finite reals.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values, SampleMeta meta = {});

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const SampleMeta& meta() const noexcept { return meta_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
  SampleMeta meta_;
};

struct FitReport {
  double estimate = 0;
  double std_error = 0;
  std::string window;
};

/// sup |F_N - cdf| over the sample points.
double ks_one_sample(const EmpiricalSample& sample, const std::function<double(double)>& cdf);
double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b);

/// 1% critical values of the Kolmogorov statistic, 1.63/sqrt(N) and its
/// two-sample analogue.
double ks_critical(std::size_t n);
double ks_critical(std::size_t n, std::size_t m);

/// order 1: sample mean; order 2: unbiased variance. Standard errors by the
/// jackknife.
FitReport moment_report(const EmpiricalSample& sample, int order);

struct SurvivalCount {
  double n;
  double survivors;
  double trials;
};

/// Weighted least-squares fit of log(survivors/trials) = c - alpha log n.
/// Weights are the inverse binomial variances survivors / (1 - p). The
/// `drop_smallest` smallest n are left out of the fit. Needs at least three
/// sizes after dropping and 30 survivors at each.
FitReport survival_exponent(std::span<const SurvivalCount> counts, std::size_t drop_smallest = 1);

/// Pearson statistic of counts against equal cell probabilities.
double chi_square_uniform(std::span<const std::uint64_t> counts);
/// Upper `level` quantile of the chi-square law with `dof` degrees of freedom.
double chi_square_critical(int dof, double level);

/// Validation report row `{test, statistic, threshold, pass, meta}`.
struct ReportRow {
  std::string test;
  double statistic = 0;
  double threshold = 0;
  bool pass = false;
  nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json to_json(const ReportRow& row);

}  // namespace ars::stats
