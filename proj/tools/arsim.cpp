#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ars/density.hpp"
#include "ars/dm_core.hpp"
#include "ars/parallel.hpp"
#include "ars/samplers.hpp"
#include "ars/stats.hpp"
#include "ars/tsp.hpp"
#include "ars/validation.hpp"

namespace {

using nlohmann::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to the named file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

double dm_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1) for D(alpha)");
  return alpha;
}

// --- density ---------------------------------------------------------------

struct DensityArgs {
  double alpha = 0.5;
  double h = ars::dm::kDefaultStep;
  int x_max = ars::dm::kDefaultXMax;
  std::string out = "-";
  bool partials = false;
};

int run_density(const DensityArgs& a) {
  const auto grid = ars::dm::build_density(ars::dm::Alpha(dm_alpha(a.alpha)), a.h, a.x_max);
  Output out(a.out);
  ars::dm::write_density_table(out.stream(), grid, a.partials);
  return kPass;
}

// --- moments ---------------------------------------------------------------

struct MomentArgs {
  double alpha = 0.5;
  std::optional<double> p;
  int order = 1;
};

int run_moments(const MomentArgs& a) {
  const ars::dm::Alpha alpha(dm_alpha(a.alpha));
  if (a.order != 1 && a.order != 2) throw UsageError("--order must be 1 (mean) or 2 (variance)");
  json report = {{"alpha", a.alpha}, {"order", a.order}};
  if (a.p) {
    const ars::dm::GeomParams params(alpha, *a.p);
    report["p"] = *a.p;
    report["law"] = "D(alpha, p), shifted";
    if (a.order == 1) {
      report["form"] = "1/(p (1-alpha))";
      report["value"] = ars::dm::mean_dmp(params);
    } else {
      report["form"] = "alpha/(p (1-alpha)^2 (2-alpha)) + (1-p)/(p^2 (1-alpha)^2)";
      report["value"] = ars::dm::variance_dmp(params);
    }
  } else {
    report["law"] = "D(alpha), shifted";
    if (a.order == 1) {
      report["form"] = "1/(1-alpha)";
      report["value"] = ars::dm::mean_dm(alpha, true);
    } else {
      report["form"] = "alpha/((1-alpha)^2 (2-alpha))";
      report["value"] = ars::dm::variance_dm(alpha);
    }
  }
  print_json(report);
  return kPass;
}

// --- simulate-tsp ----------------------------------------------------------

struct TspArgs {
  double alpha = 0.5;
  double t = 1e4;
  std::size_t runs = 10000;
  std::uint64_t seed = ars::kDefaultSeed;
  std::string out = "-";
  std::string method = "auto";
};

int run_simulate_tsp(const TspArgs& a) {
  if (!(a.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (!(a.t > 1.0)) throw UsageError("--t must exceed 1");
  if (a.runs < 1) throw UsageError("--runs must be positive");
  static const std::map<std::string, ars::tsp::Method> methods = {
      {"auto", ars::tsp::Method::automatic}, {"exact", ars::tsp::Method::exact},
      {"aggregated", ars::tsp::Method::aggregated}};
  const auto base = ars::tsp::BaseDistribution::pareto(a.alpha);
  const double tau = ars::tsp::scaling_factor(base, a.t);
  const auto outcomes = ars::tsp::simulate(base, a.t, a.runs, a.seed, methods.at(a.method));
  {
    Output out(a.out);
    ars::tsp::write_trials_csv(out.stream(), outcomes, tau);
  }
  std::vector<double> values;
  for (const auto& o : outcomes) values.push_back(o.y / tau);
  const ars::stats::EmpiricalSample sample(std::move(values), {"tsp", a.t, a.runs, a.seed});

  std::string law;
  double ks;
  if (a.alpha < 1.0) {
    law = "D(alpha)";
    const auto grid = ars::dm::build_density(ars::dm::Alpha(a.alpha));
    ks = ars::stats::ks_one_sample(sample, [&](double x) { return ars::dm::cdf(grid, x); });
  } else {
    law = "Exp(1)";
    ks = ars::stats::ks_one_sample(sample, [](double x) { return x > 0.0 ? -std::expm1(-x) : 0.0; });
  }
  const double critical = ars::stats::ks_critical(a.runs);
  const std::string scaling = a.alpha < 1.0 ? "t" : a.alpha == 1.0 ? "t ln t" : "t^alpha mu / c";
  print_json(ars::stats::to_json({"KS vs " + law, ks, critical, ks <= critical,
                                  {{"alpha", a.alpha}, {"t", a.t}, {"runs", a.runs}, {"seed", a.seed},
                                   {"scaling", scaling}, {"tau", tau}}}));
  return kPass;
}

// --- sample ----------------------------------------------------------------

struct SampleArgs {
  std::string model = "motzkin";
  std::uint32_t n = 1000;
  std::size_t runs = 1000;
  std::uint64_t seed = ars::kDefaultSeed;
  std::string out = "-";
  double theta = std::numbers::pi / 2.0;
  std::string policy = "fail-on-pass";
  std::string trace;
  bool fit_exponent = false;
};

int run_sample(const SampleArgs& a) {
  namespace s = ars::samplers;
  if (a.n < 1) throw UsageError("--n must be positive");
  if (a.runs < 2) throw UsageError("--runs must be at least 2");
  if (!(a.theta > 0.0 && a.theta <= 2.0 * std::numbers::pi)) throw UsageError("--theta must lie in (0, 2 pi]");
  const std::uint32_t n = a.n;

  std::optional<s::WalkModel> walk;
  s::CostSampler sampler;
  std::function<void(std::ostream&, ars::Stream&)> trace;
  if (a.model == "motzkin") {
    walk = s::motzkin_model(1, 1, 1);
  } else if (a.model == "schroeder") {
    walk = s::schroeder_model();
  } else if (a.model == "gessel") {
    walk = s::quarter_plane_model(s::QuarterPlane::gessel);
  } else if (a.model == "kreweras3") {
    walk = s::quarter_plane_model(s::QuarterPlane::kreweras3);
  } else if (a.model == "wedge") {
    walk = s::wedge_model(a.theta);
  } else if (a.model == "pair") {
    sampler = [n](ars::Stream& rng) { return s::avoiding_pair(n, rng).cost; };
    trace = [n](std::ostream& out, ars::Stream& rng) {
      const auto run = s::avoiding_pair(n, rng);
      s::write_trace(out, run.first);
      out << '\n';
      s::write_trace(out, run.second);
    };
  } else if (a.model == "sizeproc") {
    if (a.policy != "fail-on-pass" && a.policy != "restart-margin") {
      throw UsageError("--policy must be fail-on-pass or restart-margin");
    }
    const auto policy = a.policy == "fail-on-pass" ? s::Policy::fail_on_pass : s::Policy::restart_after_margin;
    sampler = [n, policy](ars::Stream& rng) {
      const auto inc = s::unary_binary_increments();
      return s::size_process(inc, n, policy, rng).cost;
    };
  } else {
    throw UsageError("unknown --model " + a.model);
  }
  if (walk) {
    sampler = [n, &walk](ars::Stream& rng) { return s::run_walk(*walk, n, rng).cost; };
    trace = [n, &walk](std::ostream& out, ars::Stream& rng) { s::write_trace(out, s::run_walk(*walk, n, rng).trace); };
  }

  const auto records = s::cost_records(sampler, a.runs, a.seed);
  {
    Output out(a.out);
    s::write_costs_csv(out.stream(), records);
  }

  std::vector<double> normalized;
  double misses = 0.0;
  for (const auto& r : records) {
    normalized.push_back(static_cast<double>(r.total_ops) / n);
    misses += static_cast<double>(r.misses);
  }
  const ars::stats::EmpiricalSample costs(std::move(normalized), {a.model, static_cast<double>(n), a.runs, a.seed});
  const auto mean = ars::stats::moment_report(costs, 1);
  const auto var = ars::stats::moment_report(costs, 2);
  json summary = {{"model", a.model}, {"n", n}, {"runs", a.runs}, {"seed", a.seed},
                  {"mean_cost_over_n", mean.estimate}, {"mean_std_error", mean.std_error},
                  {"variance_cost_over_n", var.estimate}, {"variance_std_error", var.std_error},
                  {"mean_cost_over_n_ln_n", mean.estimate / std::log(static_cast<double>(n))}};
  if (a.model == "wedge") summary["theta"] = a.theta;
  if (a.model == "schroeder") summary["exact_hit_fraction"] = a.runs / (a.runs + misses);
  if (a.model == "sizeproc") {
    summary["policy"] = a.policy;
    summary["hit_frequency"] = (a.runs - misses) / a.runs;
  }

  if (a.fit_exponent) {
    if (a.model == "sizeproc" || a.model == "schroeder") throw UsageError("--fit-exponent needs a fixed-length walk");
    std::vector<std::uint32_t> sizes;
    for (std::uint32_t m = 64; m <= n; m *= 2) sizes.push_back(m);
    if (sizes.size() < 4) throw UsageError("--fit-exponent needs --n >= 512");
    const auto lifetimes =
        walk ? s::walk_lifetimes(*walk, n, a.runs, a.seed + 1) : s::pair_lifetimes(n, a.runs, a.seed + 1);
    const auto counts = s::survival_counts(lifetimes, sizes);
    const auto fit = ars::stats::survival_exponent(counts);
    summary["survival_exponent"] = {{"estimate", fit.estimate}, {"std_error", fit.std_error}, {"window", fit.window},
                                    {"attempts", a.runs}};
  }
  if (!a.trace.empty() && trace) {
    Output out(a.trace);
    ars::Stream rng(a.seed, a.runs);
    trace(out.stream(), rng);
  }
  print_json(summary);
  return kPass;
}

// --- validate --------------------------------------------------------------

struct ValidateArgs {
  std::string suite = "fast";
  std::uint64_t seed = ars::kDefaultSeed;
  std::string out = "-";
};

int run_validate(const ValidateArgs& a) {
  const auto suite = a.suite == "full" ? ars::validation::Suite::full : ars::validation::Suite::fast;
  const auto outcomes = ars::validation::run_suite(suite, a.seed);
  const auto report = ars::validation::to_json(outcomes);
  for (const auto& o : outcomes) {
    std::fprintf(stderr, "criterion %2d %s  %s (%.1f s)\n", o.criterion.id, o.pass() ? "PASS" : "FAIL",
                 o.criterion.title.c_str(), o.seconds);
  }
  Output out(a.out);
  out.stream() << report.dump(2) << '\n';
  return report["pass"].get<bool>() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Darling-Mandelbrot laws and anticipated rejection samplers"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with the grid step

  DensityArgs density;
  auto* cmd_density = app.add_subcommand("density", "Tabulate the density of D(alpha)");
  cmd_density->add_option("--alpha", density.alpha, "Tail exponent in (0, 1)")->required();
  cmd_density->add_option("--h", density.h, "Grid step, 1/M for even M >= 64");
  cmd_density->add_option("--xmax", density.x_max, "Integer end of the grid, >= 3");
  cmd_density->add_option("--out", density.out, "Output file, - for stdout");
  cmd_density->add_flag("--partials", density.partials, "Add g0 and g0+g1 columns");

  MomentArgs moments;
  auto* cmd_moments = app.add_subcommand("moments", "Mean or variance of D(alpha) or D(alpha, p)");
  cmd_moments->add_option("--alpha", moments.alpha, "Tail exponent in (0, 1)")->required();
  cmd_moments->add_option("--p", moments.p, "Success probability of the geometric convolution");
  cmd_moments->add_option("--order", moments.order, "1 for the mean, 2 for the variance");

  TspArgs tsp;
  auto* cmd_tsp = app.add_subcommand("simulate-tsp", "Threshold sums over a pareto base");
  cmd_tsp->add_option("--alpha", tsp.alpha, "Tail exponent of the base")->required();
  cmd_tsp->add_option("--t", tsp.t, "Threshold");
  cmd_tsp->add_option("--runs", tsp.runs, "Number of trials");
  cmd_tsp->add_option("--seed", tsp.seed, "Random seed");
  cmd_tsp->add_option("--out", tsp.out, "Trials CSV, - for stdout");
  cmd_tsp->add_option("--method", tsp.method, "auto, exact or aggregated")
      ->check(CLI::IsMember({"auto", "exact", "aggregated"}));

  SampleArgs sample;
  auto* cmd_sample = app.add_subcommand("sample", "Cost of an anticipated rejection sampler");
  cmd_sample->add_option("--model", sample.model, "motzkin, schroeder, sizeproc, gessel, kreweras3, wedge or pair")
      ->check(CLI::IsMember({"motzkin", "schroeder", "sizeproc", "gessel", "kreweras3", "wedge", "pair"}));
  cmd_sample->add_option("--n", sample.n, "Target size");
  cmd_sample->add_option("--runs", sample.runs, "Number of runs");
  cmd_sample->add_option("--seed", sample.seed, "Random seed");
  cmd_sample->add_option("--out", sample.out, "Cost CSV, - for stdout");
  cmd_sample->add_option("--theta", sample.theta, "Wedge opening in radians");
  cmd_sample->add_option("--policy", sample.policy, "fail-on-pass or restart-margin (sizeproc)");
  cmd_sample->add_option("--trace", sample.trace, "Write one successful path as x y lines");
  cmd_sample->add_flag("--fit-exponent", sample.fit_exponent, "Fit the survival exponent over n = 64, 128, ...");

  ValidateArgs validate;
  auto* cmd_validate = app.add_subcommand("validate", "Run the acceptance checks");
  cmd_validate->add_option("--suite", validate.suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  cmd_validate->add_option("--seed", validate.seed, "Random seed");
  cmd_validate->add_option("--out", validate.out, "JSON report, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*cmd_density) return run_density(density);
    if (*cmd_moments) return run_moments(moments);
    if (*cmd_tsp) return run_simulate_tsp(tsp);
    if (*cmd_sample) return run_sample(sample);
    if (*cmd_validate) return run_validate(validate);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
