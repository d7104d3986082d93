#include "ars/samplers.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ars/density.hpp"

using namespace ars;
using namespace ars::samplers;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

bool adjacent(const Point& a, const Point& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; }

std::vector<double> survival_fraction_exponents(const WalkModel& model, std::size_t attempts) {
  const auto lifetimes = walk_lifetimes(model, 4096, attempts, 31);
  const std::vector<std::uint32_t> sizes = {64, 128, 256, 512, 1024, 2048, 4096};
  const auto counts = survival_counts(lifetimes, sizes);
  const auto fit = stats::survival_exponent(counts);
  return {fit.estimate, fit.std_error};
}

}  // namespace

TEST(Motzkin, SingleStepCost) {
  // One step: up or level survive (2/3), down dies after one op. E[ops] = 1 + (1/3) E[ops] = 3/2.
  double total = 0.0;
  const int runs = 200000;
  Stream rng(1);
  for (int k = 0; k < runs; ++k) total += motzkin_prefix(1, {}, rng).cost.total_ops;
  EXPECT_NEAR(total / runs, 1.5, 0.01);
}

TEST(Motzkin, StaysAboveAxisAndReplays) {
  Stream rng(5);
  const auto model = motzkin_model(1, 1, 1);
  for (int k = 0; k < 200; ++k) {
    const auto run = motzkin_prefix(300, {}, rng);
    ASSERT_EQ(run.trace.points.size(), 301u);
    ASSERT_EQ(run.trace.steps.size(), 300u);
    EXPECT_GE(run.cost.total_ops, 300u);
    EXPECT_GE(run.cost.attempts, 1u);
    Point p = model.start;
    for (std::size_t i = 0; i < run.trace.steps.size(); ++i) {
      const auto& s = model.steps[run.trace.steps[i]];
      p.x += s.dx, p.y += s.dy;
      EXPECT_EQ(p, run.trace.points[i + 1]);
      EXPECT_GE(p.y, 0);
    }
  }
}

TEST(Motzkin, RejectsUnbalancedColors) {
  Stream rng(1);
  EXPECT_THROW(motzkin_prefix(10, {2, 1, 1}, rng), std::invalid_argument);
  EXPECT_THROW(motzkin_model(0, 1, 1), std::invalid_argument);
}

TEST(Motzkin, PrefixesAreUniform) {
  // Length 3 prefixes staying non-negative: 13 of them.
  std::map<std::vector<std::uint8_t>, std::uint64_t> seen;
  Stream rng(8);
  for (int k = 0; k < 130000; ++k) ++seen[motzkin_prefix(3, {}, rng).trace.steps];
  ASSERT_EQ(seen.size(), 13u);
  std::vector<std::uint64_t> counts;
  for (const auto& [steps, c] : seen) counts.push_back(c);
  EXPECT_LT(stats::chi_square_uniform(counts), stats::chi_square_critical(12, 1e-3));
}

TEST(Motzkin, ColoredPrefixesAreUniform) {
  // Two colors each way, length 2: first step up (2) or level (2), then anything, or down after up.
  // Up: 2 * 6 = 12, level: 2 * 4 = 8, total 20 prefixes.
  std::map<std::vector<std::uint8_t>, std::uint64_t> seen;
  Stream rng(9);
  for (int k = 0; k < 200000; ++k) ++seen[motzkin_prefix(2, {2, 2, 2}, rng).trace.steps];
  ASSERT_EQ(seen.size(), 20u);
  std::vector<std::uint64_t> counts;
  for (const auto& [steps, c] : seen) counts.push_back(c);
  EXPECT_LT(stats::chi_square_uniform(counts), stats::chi_square_critical(19, 1e-3));
}

TEST(Schroeder, Model) {
  const auto model = schroeder_model();
  const double rho = std::numbers::sqrt2 - 1.0;
  ASSERT_EQ(model.steps.size(), 3u);
  double total = 0.0;
  for (const auto& s : model.steps) total += s.probability;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(model.steps[0].probability, rho, 1e-15);
  EXPECT_NEAR(model.steps[2].probability, rho * rho, 1e-15);
  EXPECT_EQ(model.steps[2].length, 2u);
  EXPECT_EQ(model.target, Target::exact_hit);
}

TEST(Schroeder, ExactLengthAndConstraint) {
  const auto model = schroeder_model();
  Stream rng(3);
  for (int k = 0; k < 300; ++k) {
    const auto run = schroeder_prefix(101, rng);
    std::uint32_t length = 0;
    for (auto idx : run.trace.steps) length += model.steps[idx].length;
    EXPECT_EQ(length, 101u);
    for (const auto& p : run.trace.points) EXPECT_GE(p.y, 0);
    EXPECT_EQ(run.trace.points.back().x, 101);
    EXPECT_GE(run.cost.total_ops, 101u);
  }
}

TEST(Schroeder, CostLawMatchesGeometricSum) {
  const std::uint32_t n = 2000;
  const auto costs = cost_distribution([n](Stream& rng) { return schroeder_prefix(n, rng).cost; }, n, 10000, 51);
  const auto half = dm::build_density(dm::Alpha(0.5), std::ldexp(1.0, -10));
  Stream rng(52);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = dm::sample_dmp(half, (2.0 + std::numbers::sqrt2) / 4.0, rng);
  EXPECT_LE(stats::ks_two_sample(costs, stats::EmpiricalSample(draws)), 0.03);
}

TEST(SizeProcess, DeterministicIncrementAlwaysHits) {
  const std::vector<Increment> unit = {{1, 1.0}};
  Stream rng(1);
  const auto out = size_process(unit, 37, Policy::fail_on_pass, rng);
  EXPECT_TRUE(out.hit);
  EXPECT_EQ(out.cost.total_ops, 37u);
  EXPECT_EQ(out.cost.misses, 0u);
}

TEST(SizeProcess, RejectsBadIncrements) {
  Stream rng(1);
  const std::vector<Increment> drifting_down = {{-1, 0.5}, {1, 0.5}};
  EXPECT_THROW(size_process(drifting_down, 10, Policy::fail_on_pass, rng), std::invalid_argument);
  const std::vector<Increment> unnormalised = {{1, 0.5}, {2, 0.4}};
  EXPECT_THROW(size_process(unnormalised, 10, Policy::fail_on_pass, rng), std::invalid_argument);
}

TEST(SizeProcess, UnaryBinaryHitFrequency) {
  // A +1/+2 walk with drift 4/3 visits a given far site with probability 3/4.
  const auto inc = unary_binary_increments();
  Stream rng(12);
  const int runs = 100000;
  int hits = 0;
  for (int k = 0; k < runs; ++k) hits += size_process(inc, 1000, Policy::fail_on_pass, rng).hit;
  EXPECT_NEAR(static_cast<double>(hits) / runs, 0.75, 0.01);
}

TEST(SizeProcess, SchroederLengthsMatchWalkHitFraction) {
  const double rho = std::numbers::sqrt2 - 1.0;
  const std::vector<Increment> inc = {{1, 2.0 * rho}, {2, rho * rho}};
  Stream rng(4);
  const int runs = 100000;
  int hits = 0;
  for (int k = 0; k < runs; ++k) hits += size_process(inc, 2000, Policy::fail_on_pass, rng).hit;
  EXPECT_NEAR(static_cast<double>(hits) / runs, (2.0 + std::numbers::sqrt2) / 4.0, 0.01);
}

TEST(SizeProcess, MarginPolicyHitsMoreOften) {
  // With a negative step the walk can come back after passing n.
  const std::vector<Increment> backtracking = {{-1, 1.0 / 3.0}, {2, 2.0 / 3.0}};
  Stream rng_a(21), rng_b(22);
  const int runs = 40000;
  int fail_hits = 0, margin_hits = 0;
  for (int k = 0; k < runs; ++k) {
    fail_hits += size_process(backtracking, 500, Policy::fail_on_pass, rng_a).hit;
    margin_hits += size_process(backtracking, 500, Policy::restart_after_margin, rng_b).hit;
  }
  const double f = static_cast<double>(fail_hits) / runs, m = static_cast<double>(margin_hits) / runs;
  EXPECT_GT(f, 0.0);
  EXPECT_LT(m, 1.0);
  EXPECT_GT(m, f + 0.05);
}

TEST(SizeProcess, UnaryBinaryCostMean) {
  const auto half = dm::build_density(dm::Alpha(0.5), std::ldexp(1.0, -10));
  Stream rng(6);
  EXPECT_THROW(unary_binary_cost(dm::build_density(dm::Alpha(0.25), 1.0 / 64), 100, rng), std::invalid_argument);
  double total = 0.0;
  const int runs = 20000;
  for (int k = 0; k < runs; ++k) total += unary_binary_cost(half, 1000, rng);
  EXPECT_NEAR(total / runs, 8.0 / 3.0, 0.05 * 8.0 / 3.0);
}

TEST(QuarterPlane, ModelsHaveZeroDrift) {
  for (auto q : {QuarterPlane::gessel, QuarterPlane::kreweras3}) {
    const auto model = quarter_plane_model(q);
    double dx = 0.0, dy = 0.0;
    for (const auto& s : model.steps) dx += s.probability * s.dx, dy += s.probability * s.dy;
    EXPECT_NEAR(dx, 0.0, 1e-15);
    EXPECT_NEAR(dy, 0.0, 1e-15);
  }
}

TEST(QuarterPlane, StaysInQuadrant) {
  Stream rng(2);
  for (auto q : {QuarterPlane::gessel, QuarterPlane::kreweras3}) {
    for (int k = 0; k < 50; ++k) {
      const auto run = quarter_plane_walk(q, 500, rng);
      EXPECT_EQ(run.trace.points.size(), 501u);
      for (const auto& p : run.trace.points) {
        EXPECT_GE(p.x, 0);
        EXPECT_GE(p.y, 0);
      }
    }
  }
}

TEST(QuarterPlane, GesselCost) {
  // Survival ~ n^(-2/3) gives E[ops]/n -> 1/(1 - 2/3) = 3.
  const auto sample = cost_distribution(
      [](Stream& rng) { return quarter_plane_walk(QuarterPlane::gessel, 4096, rng).cost; }, 4096, 4000, 17);
  const auto mean = stats::moment_report(sample, 1);
  EXPECT_NEAR(mean.estimate, 3.0, 0.1 * 3.0);
}

TEST(Wedge, StartPoints) {
  EXPECT_EQ(wedge_model(std::numbers::pi / 2).start, (Point{1, 1}));
  const auto half = wedge_model(std::numbers::pi);
  EXPECT_TRUE(half.inside(half.start));
  EXPECT_GT(half.start.y, 0);
  const auto slit = wedge_model(2.0 * std::numbers::pi);
  EXPECT_TRUE(slit.inside(slit.start));
  EXPECT_FALSE(slit.inside({3, 0}));
  EXPECT_TRUE(slit.inside({-3, 0}));
  EXPECT_THROW(wedge_model(0.0), std::domain_error);
  EXPECT_THROW(wedge_model(7.0), std::domain_error);
}

TEST(Wedge, BoundaryIsInclusive) {
  const auto quarter = wedge_model(std::numbers::pi / 2);
  EXPECT_TRUE(quarter.inside({0, 5}));
  EXPECT_TRUE(quarter.inside({5, 0}));
  EXPECT_FALSE(quarter.inside({-1, 5}));
  const auto eighth = wedge_model(std::numbers::pi / 4);
  EXPECT_TRUE(eighth.inside({4, 4}));
  EXPECT_FALSE(eighth.inside({3, 4}));
  const auto odd = wedge_model(1.0);
  EXPECT_TRUE(odd.inside({5, 1}));
  EXPECT_FALSE(odd.inside({1, 5}));
}

TEST(Wedge, HalfPlaneAndSlitExponents) {
  // Survival in a wedge of angle theta decays like n^(-pi/(2 theta)).
  const auto half = survival_fraction_exponents(wedge_model(std::numbers::pi), 200000);
  EXPECT_NEAR(half[0], 0.5, 0.05);
  const auto slit = survival_fraction_exponents(wedge_model(2.0 * std::numbers::pi), 200000);
  EXPECT_NEAR(slit[0], 0.25, 0.05);
}

TEST(Wedge, QuarterPlaneCostGrowsLikeNLogN) {
  // At theta = pi/2 the survival exponent is exactly 1, so E[ops] ~ c n ln n.
  std::vector<double> ratios;
  for (std::uint32_t n : {256u, 2048u}) {
    const auto records = cost_records([n](Stream& rng) { return wedge_walk(std::numbers::pi / 2, n, rng).cost; },
                                      4000, 23);
    double total = 0.0;
    for (const auto& r : records) total += static_cast<double>(r.total_ops);
    ratios.push_back(total / records.size() / (n * std::log(static_cast<double>(n))));
  }
  EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.25);
}

TEST(Pair, TrivialLength) {
  Stream rng(1);
  const auto run = avoiding_pair(0, rng);
  EXPECT_EQ(run.cost.total_ops, 0u);
  EXPECT_EQ(run.first.points.size(), 1u);
  EXPECT_EQ(run.second.points.front(), (Point{1, 0}));
}

TEST(Pair, TracesAreDisjointWalks) {
  Stream rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto run = avoiding_pair(200, rng);
    ASSERT_EQ(run.first.points.size(), 201u);
    ASSERT_EQ(run.second.points.size(), 201u);
    std::set<std::pair<int, int>> a, b;
    for (std::size_t i = 0; i < run.first.points.size(); ++i) {
      if (i > 0) {
        EXPECT_TRUE(adjacent(run.first.points[i - 1], run.first.points[i]));
        EXPECT_TRUE(adjacent(run.second.points[i - 1], run.second.points[i]));
      }
      a.insert({run.first.points[i].x, run.first.points[i].y});
      b.insert({run.second.points[i].x, run.second.points[i].y});
    }
    for (const auto& p : a) EXPECT_EQ(b.count(p), 0u);
    EXPECT_GE(run.cost.total_ops, 400u);
  }
}

TEST(Pair, LifetimesMatchSingleRuns) {
  const auto lifetimes = pair_lifetimes(512, 3000, 7);
  ASSERT_EQ(lifetimes.size(), 3000u);
  for (auto l : lifetimes) EXPECT_LE(l, 512u);
  const auto again = pair_lifetimes(512, 3000, 7);
  EXPECT_EQ(lifetimes, again);
  const std::vector<std::uint32_t> sizes = {1, 64, 512};
  const auto counts = survival_counts(lifetimes, sizes);
  EXPECT_GE(counts[0].survivors, counts[1].survivors);
  EXPECT_GE(counts[1].survivors, counts[2].survivors);
  EXPECT_EQ(counts[0].trials, 3000.0);
}

TEST(Pair, CostOverTwoN) {
  // Survival ~ n^(-5/8), so E[ops]/(2n) -> 1/(1 - 5/8) = 8/3.
  const std::uint32_t n = 2048;
  const auto records = cost_records([n](Stream& rng) { return avoiding_pair(n, rng).cost; }, 2000, 41);
  std::vector<double> ratios;
  for (const auto& r : records) ratios.push_back(static_cast<double>(r.total_ops) / (2.0 * n));
  EXPECT_NEAR(mean_of(ratios), 8.0 / 3.0, 0.15 * 8.0 / 3.0);
}

TEST(Lifetimes, SurvivalCountsAreMonotone) {
  const auto lifetimes = walk_lifetimes(motzkin_model(1, 1, 1), 1024, 20000, 3);
  const std::vector<std::uint32_t> sizes = {1, 2, 16, 128, 1024};
  const auto counts = survival_counts(lifetimes, sizes);
  for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_LE(counts[i].survivors, counts[i - 1].survivors);
  EXPECT_NEAR(counts[0].survivors / 20000.0, 2.0 / 3.0, 0.02);
  EXPECT_THROW(walk_lifetimes(schroeder_model(), 10, 10, 1), std::invalid_argument);
}

TEST(Determinism, SameSeedSameRecords) {
  const CostSampler sampler = [](Stream& rng) { return motzkin_prefix(500, {}, rng).cost; };
  const auto a = cost_records(sampler, 200, 99);
  const auto b = cost_records(sampler, 200, 99);
  std::ostringstream sa, sb;
  write_costs_csv(sa, a);
  write_costs_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, 24), "run,total_ops,attempts\n0");
}

TEST(Output, TraceLines) {
  Trace trace;
  trace.points = {{0, 0}, {1, 1}, {2, 0}};
  std::ostringstream out;
  write_trace(out, trace);
  EXPECT_EQ(out.str(), "0 0\n1 1\n2 0\n");
}
