#include "ars/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace ars::stats {
namespace {

constexpr double kMinSurvivors = 30.0;

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values, SampleMeta meta)
    : values_(std::move(values)), meta_(std::move(meta)) {
  if (values_.empty()) throw std::invalid_argument("EmpiricalSample: empty sample");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalSample: non-finite value");
  }
  std::sort(values_.begin(), values_.end());
}

double ks_one_sample(const EmpiricalSample& sample, const std::function<double(double)>& cdf) {
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    // Step past every copy of the smallest remaining value in both samples.
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_critical(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

double ks_critical(std::size_t n, std::size_t m) {
  const auto a = static_cast<double>(n);
  const auto b = static_cast<double>(m);
  return 1.63 * std::sqrt((a + b) / (a * b));
}

FitReport moment_report(const EmpiricalSample& sample, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("moment_report: order must be 1 or 2");
  const std::size_t count = sample.size();
  const auto n = static_cast<double>(count);
  double mean = 0.0;
  for (double v : sample.values()) mean += v;
  mean /= n;
  double q = 0.0;
  for (double v : sample.values()) q += (v - mean) * (v - mean);

  std::ostringstream window;
  window << "n=" << count;
  if (order == 1) {
    // The jackknife of the mean is the usual s / sqrt(n).
    const double se = count > 1 ? std::sqrt(q / (n - 1.0) / n) : 0.0;
    return {mean, se, window.str()};
  }
  if (count < 3) throw std::invalid_argument("moment_report: variance needs at least 3 values");
  const double variance = q / (n - 1.0);
  // Leave-one-out variances: Q_(i) = Q - d_i^2 n/(n-1), divided by n-2.
  std::vector<double> loo(count);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = sample[i] - mean;
    loo[i] = (q - d * d * n / (n - 1.0)) / (n - 2.0);
    loo_mean += loo[i];
  }
  loo_mean /= n;
  double spread = 0.0;
  for (double v : loo) spread += (v - loo_mean) * (v - loo_mean);
  return {variance, std::sqrt((n - 1.0) / n * spread), window.str()};
}

FitReport survival_exponent(std::span<const SurvivalCount> counts, std::size_t drop_smallest) {
  std::vector<SurvivalCount> rows(counts.begin(), counts.end());
  std::sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) { return l.n < r.n; });
  if (rows.size() < drop_smallest + 3) {
    throw std::invalid_argument("survival_exponent: need at least three sizes after dropping");
  }
  rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(drop_smallest));

  double sw = 0.0, sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys, ws;
  for (const auto& row : rows) {
    if (!(row.n > 0.0) || !(row.trials > 0.0) || row.survivors > row.trials) {
      throw std::invalid_argument("survival_exponent: counts must satisfy 0 < survivors <= trials");
    }
    if (row.survivors < kMinSurvivors) throw std::invalid_argument("survival_exponent: fewer than 30 survivors at some n");
    const double p = row.survivors / row.trials;
    const double w = row.survivors / std::max(1.0 - p, 1.0 / row.trials);
    xs.push_back(std::log(row.n));
    ys.push_back(std::log(p));
    ws.push_back(w);
    sw += w;
    sx += w * xs.back();
    sy += w * ys.back();
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
  }
  if (rows.front().n == rows.back().n || !(sxx > 0.0)) {
    throw std::invalid_argument("survival_exponent: sizes must differ");
  }
  std::ostringstream window;
  window << "n in [" << rows.front().n << ", " << rows.back().n << "], " << rows.size() << " sizes";
  return {-sxy / sxx, std::sqrt(1.0 / sxx), window.str()};
}

double chi_square_uniform(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("chi_square_uniform: no cells");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

double chi_square_critical(int dof, double level) {
  const boost::math::chi_squared_distribution<double> law(dof);
  return boost::math::quantile(boost::math::complement(law, level));
}

nlohmann::json to_json(const ReportRow& row) {
  return {{"test", row.test}, {"statistic", row.statistic}, {"threshold", row.threshold},
          {"pass", row.pass}, {"meta", row.meta}};
}

}  // namespace ars::stats
