#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dla1d/occupancy.hpp"
#include "dla1d/rng.hpp"
#include "dla1d/steps.hpp"
#include "dla1d/walker.hpp"

namespace dla1d {

class AggregateError : public std::invalid_argument {
 public:
  enum class Code { InvalidDistribution, InvalidCount };
  AggregateError(Code code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ParticleRecord {
  std::uint64_t index = 0;  // i >= 1
  Side side = Side::plus_inf;
  std::int64_t glue = 0;
  std::int64_t attach = 0;
  std::int64_t path_min = 0;
  std::int64_t path_max = 0;
  std::uint64_t J = 0;
  std::uint64_t steps = 0;
  std::uint64_t excursions = 0;
  std::uint64_t restarts = 0;
  std::int64_t launch_start = 0;
};

struct Hull {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

/// Number of points of A passed on the way in: |A ∩ (path_min, inf)| for a
/// particle from +inf, |A ∩ (-inf, path_max)| from -inf.
inline std::uint64_t penetration(const OccupancySet& before, const HitResult& r, Side side) {
  if (side == Side::plus_inf) return before.size() - before.count_less(r.path_min + 1);
  return before.count_less(r.path_max);
}

/// Geometric checkpoint grid: distinct values of ceil(1.2^j) up to n, plus n.
inline std::vector<std::uint64_t> checkpoint_grid(std::uint64_t n, double ratio = 1.2) {
  std::vector<std::uint64_t> out;
  for (int j = 0;; ++j) {
    const double v = std::ceil(std::pow(ratio, j) - 1e-9);
    if (v > static_cast<double>(n)) break;
    const auto k = static_cast<std::uint64_t>(v);
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  if (out.empty() || out.back() != n) out.push_back(n);
  return out;
}

inline const std::vector<std::int64_t>& default_radii() {
  static const std::vector<std::int64_t> r = {10, 100, 1000, 10000, 100000, 1000000};
  return r;
}

struct Checkpoint {
  std::uint64_t n = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::int64_t diameter = 0;
  std::vector<std::uint64_t> counts;  // |A ∩ [-r, r]| for each radius
};

/// The DLA process with paths: A_0 = {0}, each particle from +inf or -inf
/// with probability 1/2, glued where its blocked jump left it.
class Process {
 public:
  Process(StepDistribution dist, std::uint64_t seed, LaunchPolicy policy = {})
      : dist_(std::move(dist)), policy_(policy), seed_(seed), rng_(make_rng(seed, 0)) {
    policy_.validate();
    if (dist_.kind() == StepKind::zeta && dist_.alpha() <= 1.0)
      throw AggregateError(AggregateError::Code::InvalidDistribution, "walk is transient for alpha <= 1");
    if (policy_.mode == WalkMode::exact && !dist_.variance())
      throw AggregateError(AggregateError::Code::InvalidDistribution,
                           "exact excursion mode needs finite variance (alpha > 2); use raw mode");
    occ_.insert(0);
  }

  const StepDistribution& distribution() const { return dist_; }
  const LaunchPolicy& policy() const { return policy_; }
  std::uint64_t seed() const { return seed_; }
  const OccupancySet& occupancy() const { return occ_; }
  const std::vector<ParticleRecord>& records() const { return records_; }
  std::uint64_t particles() const { return records_.size(); }
  Hull hull() const { return {occ_.min(), occ_.max()}; }
  std::uint64_t total_restarts() const { return restarts_; }

  const ParticleRecord& step() {
    const Side side = fair_coin(rng_) ? Side::plus_inf : Side::minus_inf;
    const HitResult r = launch_from_infinity(occ_, side, dist_, policy_, rng_);
    ParticleRecord rec;
    rec.index = records_.size() + 1;
    rec.side = side;
    rec.glue = r.glue;
    rec.attach = r.attach;
    rec.path_min = r.path_min;
    rec.path_max = r.path_max;
    rec.J = penetration(occ_, r, side);
    rec.steps = r.steps;
    rec.excursions = r.excursions;
    rec.restarts = r.restarts;
    rec.launch_start = r.start;
    if (!occ_.insert(r.glue)) throw std::logic_error("glue point already occupied");
    restarts_ += r.restarts;
    records_.push_back(rec);
    return records_.back();
  }

  Checkpoint checkpoint(const std::vector<std::int64_t>& radii = default_radii()) const {
    Checkpoint c;
    c.n = particles();
    c.min = occ_.min();
    c.max = occ_.max();
    c.diameter = c.max - c.min;
    for (auto r : radii) c.counts.push_back(occ_.count_in(-r, r));
    return c;
  }

 private:
  StepDistribution dist_;
  LaunchPolicy policy_;
  std::uint64_t seed_;
  Rng rng_;
  OccupancySet occ_;
  std::vector<ParticleRecord> records_;
  std::uint64_t restarts_ = 0;
};

inline Process new_process(const StepDistribution& dist, std::uint64_t seed, const LaunchPolicy& policy = {}) {
  return Process(dist, seed, policy);
}

/// Grow by n particles. `on_record` sees each record with the hull before it;
/// `on_checkpoint` fires at every grid point of the particle count.
struct GrowHooks {
  std::function<void(const ParticleRecord&, const Hull&)> on_record;
  std::function<void(const Process&)> on_checkpoint;
};

inline std::vector<Checkpoint> grow(Process& p, std::uint64_t n, const GrowHooks& hooks = {},
                                    const std::vector<std::int64_t>& radii = default_radii()) {
  if (n < 1) throw AggregateError(AggregateError::Code::InvalidCount, "particle count must be >= 1");
  const std::uint64_t target = p.particles() + n;
  const auto grid = checkpoint_grid(target);
  std::size_t gi = 0;
  while (gi < grid.size() && grid[gi] <= p.particles()) ++gi;
  std::vector<Checkpoint> out;
  while (p.particles() < target) {
    const Hull before = p.hull();
    const auto& rec = p.step();
    if (hooks.on_record) hooks.on_record(rec, before);
    if (gi < grid.size() && grid[gi] == p.particles()) {
      out.push_back(p.checkpoint(radii));
      if (hooks.on_checkpoint) hooks.on_checkpoint(p);
      ++gi;
    }
  }
  return out;
}

}  // namespace dla1d
