#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ars/density.hpp"
#include "ars/rng.hpp"
#include "ars/stats.hpp"

/// Anticipated-rejection samplers: grow an object step by step, start over
/// from scratch as soon as the constraint fails, and count every elementary
/// step spent on the way.
namespace ars::samplers {

struct CostRecord {
  std::uint64_t total_ops = 0;  // steps (or step lengths) over all attempts, the successful one included
  std::uint64_t attempts = 0;
  std::uint64_t target = 0;
  std::uint64_t misses = 0;     // attempts that survived but overshot an exact target
};

struct Point {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Successful attempt: positions visited (start included) and the index of
/// each step in its model's step set.
struct Trace {
  std::vector<Point> points;
  std::vector<std::uint8_t> steps;
};

struct Run {
  Trace trace;
  CostRecord cost;
};

struct Step {
  std::int32_t dx;
  std::int32_t dy;
  double probability;
  std::uint32_t length;
};

enum class Target { fixed_length, exact_hit };

/// Step set plus a positional survival constraint. For fixed_length the
/// walk succeeds after n steps; for exact_hit it succeeds when the summed
/// step lengths reach n exactly and fails on jumping past n.
struct WalkModel {
  std::string name;
  std::vector<Step> steps;
  std::function<bool(const Point&)> inside;
  Point start;
  Target target = Target::fixed_length;
};

WalkModel motzkin_model(int up, int down, int level);
/// Steps up, down (probability rho, length 1) and a long level step
/// (rho^2, length 2), rho = sqrt(2) - 1; exact-hit target.
WalkModel schroeder_model();
enum class QuarterPlane { gessel, kreweras3 };
WalkModel quarter_plane_model(QuarterPlane model);
/// Simple symmetric walk in the wedge 0 <= arg <= theta, 0 < theta <= 2 pi.
/// theta = 2 pi is the plane slit along the half-line y = 0, x >= 0.
WalkModel wedge_model(double theta);

/// Anticipated rejection for any WalkModel.
Run run_walk(const WalkModel& model, std::uint32_t n, Stream& rng);

struct MotzkinColors {
  int up = 1;
  int down = 1;
  int level = 1;
};
/// Uniform random colored Motzkin prefix of length n; requires up == down.
Run motzkin_prefix(std::uint32_t n, MotzkinColors colors, Stream& rng);
Run schroeder_prefix(std::uint32_t n, Stream& rng);
Run quarter_plane_walk(QuarterPlane model, std::uint32_t n, Stream& rng);
Run wedge_walk(double theta, std::uint32_t n, Stream& rng);

/// Two simple walks from (0,0) and (1,0), stepping alternately, whose
/// vertex sets must stay disjoint.
struct PairRun {
  Trace first;
  Trace second;
  CostRecord cost;
};
PairRun avoiding_pair(std::uint32_t n, Stream& rng);

struct Increment {
  std::int32_t size;
  double probability;
};
enum class Policy { fail_on_pass, restart_after_margin };
struct SizeOutcome {
  bool hit = false;
  CostRecord cost;
};
/// Random walk on sizes from 0. A hit is a visit to exactly n. With
/// fail_on_pass the round ends once the size exceeds n; with
/// restart_after_margin it ends at n + ceil(sqrt(n)).
SizeOutcome size_process(std::span<const Increment> increments, std::uint32_t n, Policy policy, Stream& rng);
/// The unary-binary size process, +1 w.p. 2/3 and +2 w.p. 1/3.
std::vector<Increment> unary_binary_increments();

/// Normalised cost of a full unary-binary run: rounds of the size process
/// repeat until one hits n, and each round costs a shifted D(1/2) draw.
double unary_binary_cost(const dm::DensityGrid& half, std::uint32_t n, Stream& rng);

/// Lifetimes of independent attempts, capped at `cap` steps: the survival
/// count at n is the number of lifetimes >= n. Attempt k uses Stream(seed, k).
std::vector<std::uint32_t> walk_lifetimes(const WalkModel& model, std::uint32_t cap, std::size_t attempts,
                                          std::uint64_t seed);
std::vector<std::uint32_t> pair_lifetimes(std::uint32_t cap, std::size_t attempts, std::uint64_t seed);
std::vector<stats::SurvivalCount> survival_counts(std::span<const std::uint32_t> lifetimes,
                                                  std::span<const std::uint32_t> sizes);

/// total_ops / n over n_runs runs; run k uses Stream(seed, k).
using CostSampler = std::function<CostRecord(Stream&)>;
std::vector<CostRecord> cost_records(const CostSampler& sampler, std::size_t n_runs, std::uint64_t seed);
stats::EmpiricalSample cost_distribution(const CostSampler& sampler, std::uint32_t n, std::size_t n_runs,
                                         std::uint64_t seed);

/// CSV with header `run,total_ops,attempts`.
void write_costs_csv(std::ostream& out, const std::vector<CostRecord>& records);
/// `x y` per visited point of the successful attempt.
void write_trace(std::ostream& out, const Trace& trace);

}  // namespace ars::samplers
