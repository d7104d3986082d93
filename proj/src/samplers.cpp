#include "ars/samplers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ars/parallel.hpp"

namespace ars::samplers {
namespace {

// Picks step indices with the model's probabilities.
class StepPicker {
 public:
  explicit StepPicker(const std::vector<Step>& steps) {
    if (steps.empty() || steps.size() > 255) throw std::invalid_argument("walk model: need 1 to 255 steps");
    double total = 0.0;
    uniform_ = true;
    for (const auto& s : steps) {
      if (!(s.probability > 0.0) || s.length == 0) {
        throw std::invalid_argument("walk model: steps need positive probability and length");
      }
      total += s.probability;
      cumulative_.push_back(total);
      if (std::abs(s.probability - steps.front().probability) > 1e-15) uniform_ = false;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("walk model: probabilities must sum to 1");
  }

  std::uint8_t operator()(Stream& rng) const {
    if (uniform_) return static_cast<std::uint8_t>(rng.below(cumulative_.size()));
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::uint8_t>(std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
  }

 private:
  std::vector<double> cumulative_;
  bool uniform_ = true;
};

// Position -> owner map for the avoiding pair. Entries from earlier attempts
// are invalidated by bumping the generation instead of clearing.
class OwnerTable {
 public:
  explicit OwnerTable(std::size_t expected) {
    const std::size_t size = std::bit_ceil(std::max<std::size_t>(64, 4 * expected));
    keys_.resize(size);
    owners_.resize(size);
    stamps_.assign(size, 0);
    mask_ = size - 1;
  }

  void reset() { ++generation_; }

  // Owner of p, or 0.
  std::uint8_t owner(const Point& p) const {
    for (std::size_t slot = hash(p);; slot = (slot + 1) & mask_) {
      if (stamps_[slot] != generation_) return 0;
      if (keys_[slot] == p) return owners_[slot];
    }
  }

  void claim(const Point& p, std::uint8_t who) {
    for (std::size_t slot = hash(p);; slot = (slot + 1) & mask_) {
      if (stamps_[slot] != generation_) {
        stamps_[slot] = generation_;
        keys_[slot] = p;
        owners_[slot] = who;
        return;
      }
      if (keys_[slot] == p) return;
    }
  }

 private:
  std::size_t hash(const Point& p) const {
    std::uint64_t z = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
                      static_cast<std::uint32_t>(p.y);
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    return static_cast<std::size_t>(z) & mask_;
  }

  std::vector<Point> keys_;
  std::vector<std::uint8_t> owners_;
  std::vector<std::uint32_t> stamps_;
  std::uint32_t generation_ = 1;
  std::size_t mask_ = 0;
};

constexpr Point kCompass[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// Exact membership for theta = k pi/4 through integer half-plane tests.
bool wedge_contains_exact(int eighths, const Point& p) {
  static constexpr Point kRay[9] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}};
  const Point d = kRay[eighths];
  const std::int64_t cross = static_cast<std::int64_t>(d.x) * p.y - static_cast<std::int64_t>(d.y) * p.x;
  if (eighths <= 4) return p.y >= 0 && cross <= 0;
  // Reflex wedge: everything except the open sector (theta, 2 pi) below the axis.
  return !(p.y < 0 && cross > 0);
}

}  // namespace

WalkModel motzkin_model(int up, int down, int level) {
  if (up < 1 || down < 1 || level < 0 || up + down + level > 255) {
    throw std::invalid_argument("motzkin: colors must satisfy up, down >= 1, level >= 0, total <= 255");
  }
  WalkModel m;
  m.name = "motzkin";
  const double p = 1.0 / (up + down + level);
  for (int i = 0; i < up; ++i) m.steps.push_back({1, 1, p, 1});
  for (int i = 0; i < down; ++i) m.steps.push_back({1, -1, p, 1});
  for (int i = 0; i < level; ++i) m.steps.push_back({1, 0, p, 1});
  m.inside = [](const Point& q) { return q.y >= 0; };
  return m;
}

WalkModel schroeder_model() {
  const double rho = std::numbers::sqrt2 - 1.0;
  WalkModel m;
  m.name = "schroeder";
  m.steps = {{1, 1, rho, 1}, {1, -1, rho, 1}, {2, 0, 1.0 - 2.0 * rho, 2}};
  if (std::abs(rho * rho - (1.0 - 2.0 * rho)) > 1e-15) throw std::logic_error("schroeder: rho^2 + 2 rho != 1");
  m.inside = [](const Point& q) { return q.y >= 0; };
  m.target = Target::exact_hit;
  return m;
}

WalkModel quarter_plane_model(QuarterPlane model) {
  WalkModel m;
  if (model == QuarterPlane::gessel) {
    m.name = "gessel";
    m.steps = {{-1, -1, 0.25, 1}, {-1, 0, 0.25, 1}, {1, 1, 0.25, 1}, {1, 0, 0.25, 1}};
  } else {
    m.name = "kreweras3";
    const double third = 1.0 / 3.0;
    m.steps = {{0, -1, third, 1}, {-1, 0, third, 1}, {1, 1, third, 1}};
  }
  int sx = 0, sy = 0;
  for (const auto& s : m.steps) {
    sx += s.dx;
    sy += s.dy;
  }
  if (sx != 0 || sy != 0) throw std::logic_error("quarter plane model must have zero drift");
  m.inside = [](const Point& q) { return q.x >= 0 && q.y >= 0; };
  return m;
}

WalkModel wedge_model(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (!(theta > 0.0 && theta <= two_pi)) throw std::domain_error("wedge: theta must lie in (0, 2 pi]");
  WalkModel m;
  m.name = "wedge";
  for (const auto& d : kCompass) m.steps.push_back({d.x, d.y, 0.25, 1});

  const double eighths = theta / (std::numbers::pi / 4.0);
  const bool slit = std::abs(theta - two_pi) < 1e-12;
  if (slit) {
    m.inside = [](const Point& q) { return !(q.y == 0 && q.x >= 0); };
  } else if (std::abs(eighths - std::round(eighths)) < 1e-12) {
    const int k = static_cast<int>(std::lround(eighths));
    m.inside = [k](const Point& q) { return wedge_contains_exact(k, q); };
  } else {
    m.inside = [theta](const Point& q) {
      if (q.x == 0 && q.y == 0) return true;
      double angle = std::atan2(static_cast<double>(q.y), static_cast<double>(q.x));
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      return angle <= theta + 1e-12;
    };
  }

  // Start at the lattice point nearest the apex whose direction is closest
  // to the bisector, strictly inside.
  const double bisector = theta / 2.0;
  for (int radius = 1;; ++radius) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int x = -radius; x <= radius; ++x) {
      for (int y = -radius; y <= radius; ++y) {
        if (std::max(std::abs(x), std::abs(y)) != radius) continue;
        double angle = std::atan2(static_cast<double>(y), static_cast<double>(x));
        if (angle < 0.0) angle += two_pi;
        if (!(angle > 1e-12 && angle < theta - 1e-12) || !m.inside({x, y})) continue;
        const double gap = std::abs(angle - bisector);
        if (gap < best - 1e-12) {
          best = gap;
          m.start = {x, y};
          found = true;
        }
      }
    }
    if (found) break;
  }
  return m;
}

Run run_walk(const WalkModel& model, std::uint32_t n, Stream& rng) {
  const StepPicker pick(model.steps);
  Run run;
  run.cost.target = n;
  auto& points = run.trace.points;
  auto& steps = run.trace.steps;
  for (;;) {
    ++run.cost.attempts;
    points.assign(1, model.start);
    steps.clear();
    if (n == 0) return run;
    Point pos = model.start;
    std::uint64_t length = 0;
    for (;;) {
      const std::uint8_t k = pick(rng);
      const Step& s = model.steps[k];
      run.cost.total_ops += s.length;
      length += s.length;
      pos.x += s.dx;
      pos.y += s.dy;
      if (!model.inside(pos)) break;
      if (length > n) {
        ++run.cost.misses;
        break;
      }
      points.push_back(pos);
      steps.push_back(k);
      if (length == n) return run;
    }
  }
}

Run motzkin_prefix(std::uint32_t n, MotzkinColors colors, Stream& rng) {
  if (colors.up != colors.down) throw std::invalid_argument("motzkin_prefix: needs as many up as down colors");
  return run_walk(motzkin_model(colors.up, colors.down, colors.level), n, rng);
}

Run schroeder_prefix(std::uint32_t n, Stream& rng) { return run_walk(schroeder_model(), n, rng); }

Run quarter_plane_walk(QuarterPlane model, std::uint32_t n, Stream& rng) {
  return run_walk(quarter_plane_model(model), n, rng);
}

Run wedge_walk(double theta, std::uint32_t n, Stream& rng) { return run_walk(wedge_model(theta), n, rng); }

namespace {

// One attempt of the avoiding pair; returns the completed time units.
std::uint32_t pair_attempt(std::uint32_t n, OwnerTable& owners, Stream& rng, std::uint64_t& ops, PairRun* keep) {
  owners.reset();
  Point walkers[2] = {{0, 0}, {1, 0}};
  owners.claim(walkers[0], 1);
  owners.claim(walkers[1], 2);
  if (keep) {
    keep->first.points.assign(1, walkers[0]);
    keep->second.points.assign(1, walkers[1]);
    keep->first.steps.clear();
    keep->second.steps.clear();
  }
  for (std::uint32_t time = 0; time < n; ++time) {
    for (int w = 0; w < 2; ++w) {
      const auto k = static_cast<std::uint8_t>(rng.below(4));
      ++ops;
      Point& p = walkers[w];
      p.x += kCompass[k].x;
      p.y += kCompass[k].y;
      const auto self = static_cast<std::uint8_t>(w + 1);
      const std::uint8_t owner = owners.owner(p);
      if (owner != 0 && owner != self) return time;
      owners.claim(p, self);
      if (keep) {
        Trace& t = w == 0 ? keep->first : keep->second;
        t.points.push_back(p);
        t.steps.push_back(k);
      }
    }
  }
  return n;
}

}  // namespace

PairRun avoiding_pair(std::uint32_t n, Stream& rng) {
  OwnerTable owners(2 * static_cast<std::size_t>(n) + 2);
  PairRun run;
  run.cost.target = n;
  for (;;) {
    ++run.cost.attempts;
    if (pair_attempt(n, owners, rng, run.cost.total_ops, &run) == n) return run;
  }
}

std::vector<Increment> unary_binary_increments() { return {{1, 2.0 / 3.0}, {2, 1.0 / 3.0}}; }

SizeOutcome size_process(std::span<const Increment> increments, std::uint32_t n, Policy policy, Stream& rng) {
  if (increments.empty()) throw std::invalid_argument("size_process: no increments");
  double total = 0.0;
  double drift = 0.0;
  std::vector<double> cumulative;
  for (const auto& inc : increments) {
    if (!(inc.probability > 0.0)) throw std::invalid_argument("size_process: probabilities must be positive");
    total += inc.probability;
    drift += inc.probability * inc.size;
    cumulative.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("size_process: probabilities must sum to 1");
  if (!(drift > 0.0)) throw std::invalid_argument("size_process: drift must be positive");

  const std::int64_t target = n;
  const std::int64_t ceiling = policy == Policy::fail_on_pass
                                   ? target + 1
                                   : target + static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  SizeOutcome out;
  out.cost.target = n;
  out.cost.attempts = 1;
  std::int64_t size = 0;
  if (n == 0) {
    out.hit = true;
    return out;
  }
  for (;;) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto& inc = increments[std::min<std::size_t>(it - cumulative.begin(), increments.size() - 1)];
    ++out.cost.total_ops;
    size += inc.size;
    if (size == target) {
      out.hit = true;
      return out;
    }
    if (size >= ceiling) {
      out.cost.misses = 1;
      return out;
    }
  }
}

double unary_binary_cost(const dm::DensityGrid& half, std::uint32_t n, Stream& rng) {
  if (half.alpha() != 0.5) throw std::invalid_argument("unary_binary_cost: needs the D(1/2) grid");
  const auto increments = unary_binary_increments();
  double cost = 0.0;
  for (;;) {
    const bool hit = size_process(increments, n, Policy::fail_on_pass, rng).hit;
    cost += dm::sample_dm(half, true, rng);
    if (hit) return cost;
  }
}

std::vector<std::uint32_t> walk_lifetimes(const WalkModel& model, std::uint32_t cap, std::size_t attempts,
                                          std::uint64_t seed) {
  if (model.target != Target::fixed_length) throw std::invalid_argument("walk_lifetimes: fixed-length models only");
  const StepPicker pick(model.steps);
  std::vector<std::uint32_t> lifetimes(attempts);
  parallel_for(attempts, [&](std::size_t k) {
    Stream rng(seed, k);
    Point pos = model.start;
    std::uint32_t alive = 0;
    while (alive < cap) {
      const Step& s = model.steps[pick(rng)];
      pos.x += s.dx;
      pos.y += s.dy;
      if (!model.inside(pos)) break;
      ++alive;
    }
    lifetimes[k] = alive;
  });
  return lifetimes;
}

std::vector<std::uint32_t> pair_lifetimes(std::uint32_t cap, std::size_t attempts, std::uint64_t seed) {
  std::vector<std::uint32_t> lifetimes(attempts);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), attempts));
  parallel_for(workers, [&](std::size_t w) {
    OwnerTable owners(2 * static_cast<std::size_t>(cap) + 2);
    std::uint64_t ops = 0;
    for (std::size_t k = attempts * w / workers; k < attempts * (w + 1) / workers; ++k) {
      Stream rng(seed, k);
      lifetimes[k] = pair_attempt(cap, owners, rng, ops, nullptr);
    }
  });
  return lifetimes;
}

std::vector<stats::SurvivalCount> survival_counts(std::span<const std::uint32_t> lifetimes,
                                                  std::span<const std::uint32_t> sizes) {
  std::vector<std::uint32_t> sorted(lifetimes.begin(), lifetimes.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<stats::SurvivalCount> counts;
  for (auto n : sizes) {
    const auto alive = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), n);
    counts.push_back({static_cast<double>(n), static_cast<double>(alive), static_cast<double>(sorted.size())});
  }
  return counts;
}

std::vector<CostRecord> cost_records(const CostSampler& sampler, std::size_t n_runs, std::uint64_t seed) {
  std::vector<CostRecord> records(n_runs);
  parallel_for(n_runs, [&](std::size_t k) {
    Stream rng(seed, k);
    records[k] = sampler(rng);
  });
  return records;
}

stats::EmpiricalSample cost_distribution(const CostSampler& sampler, std::uint32_t n, std::size_t n_runs,
                                         std::uint64_t seed) {
  if (n == 0 || n_runs == 0) throw std::invalid_argument("cost_distribution: n and n_runs must be positive");
  const auto records = cost_records(sampler, n_runs, seed);
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(static_cast<double>(r.total_ops) / n);
  return stats::EmpiricalSample(std::move(values), {"cost", static_cast<double>(n), n_runs, seed});
}

void write_costs_csv(std::ostream& out, const std::vector<CostRecord>& records) {
  out << "run,total_ops,attempts\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    out << k << ',' << records[k].total_ops << ',' << records[k].attempts << '\n';
  }
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& p : trace.points) out << p.x << ' ' << p.y << '\n';
}

}  // namespace ars::samplers
