#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/half_line.hpp"
#include "dla1d/rng.hpp"
#include "dla1d/steps.hpp"

namespace dla1d {

enum class Side { plus_inf, minus_inf };

inline const char* to_string(Side s) { return s == Side::plus_inf ? "+inf" : "-inf"; }

class WalkerError : public std::runtime_error {
 public:
  enum class Code { EmptyOccupancy, StartInsideSet, BudgetExceeded, InvalidPolicy };

  WalkerError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct HitResult {
  std::int64_t glue = 0;
  std::int64_t attach = 0;
  std::int64_t path_min = 0;
  std::int64_t path_max = 0;
  std::uint64_t steps = 0;       // raw steps of the successful attempt
  std::uint64_t excursions = 0;  // half-line excursions resolved in closed form
  std::uint64_t restarts = 0;
  std::int64_t start = 0;
};

/// How a walk outside the hull of the target is advanced.
///
/// `exact` resolves every excursion above max A (or below min A) by a single
/// draw from the first-entry law of the half line; `raw` steps the walk one
/// jump at a time everywhere. Both produce the same law for glue, attach and
/// the rank of path_min / path_max within A.
enum class WalkMode { exact, raw };

struct LaunchPolicy {
  std::int64_t offset_scale = 4;
  std::int64_t offset_const = 1024;
  std::uint64_t step_budget = 1'000'000'000;
  bool validation_mode = false;
  /// Launch from the stationary entry law (K = infinity) instead of a finite offset.
  bool stationary = false;
  WalkMode mode = WalkMode::exact;

  std::int64_t offset(std::int64_t diam) const { return offset_scale * (diam + 1) + offset_const; }

  void validate() const {
    if (offset_scale < 0 || offset_const < 1) throw WalkerError(WalkerError::Code::InvalidPolicy, "launch offset must be >= 1");
    if (step_budget < 1'000'000) throw WalkerError(WalkerError::Code::InvalidPolicy, "step budget must be >= 1e6");
  }

  nlohmann::json to_json() const {
    return {{"offset_rule", std::to_string(offset_scale) + "*(diam+1)+" + std::to_string(offset_const)},
            {"offset_scale", offset_scale},
            {"offset_const", offset_const},
            {"step_budget", step_budget},
            {"validation_mode", validation_mode},
            {"stationary", stationary},
            {"mode", mode == WalkMode::exact ? "exact" : "raw"}};
  }
};

namespace detail {

constexpr std::int64_t kAtInfinity = std::numeric_limits<std::int64_t>::max();

// Shared loop. With tables, excursions beyond the hull are drawn in one go;
// the from_infinity flags start the walk in the stationary entry law.
template <class Occ, class Gen>
HitResult walk(const Occ& occ, std::int64_t start, const StepDistribution& dist, const HalfLineExit* hl, Gen& g,
               std::uint64_t budget, bool from_infinity_above, bool from_infinity_below) {
  const std::int64_t lo = occ.min();
  const std::int64_t hi = occ.max();
  HitResult r;
  r.start = start;
  for (;;) {
    std::int64_t pos = start;
    std::int64_t pmin = start, pmax = start;
    std::uint64_t steps = 0, exc = 0;
    bool hit = false;
    bool at_inf_above = from_infinity_above, at_inf_below = from_infinity_below;
    if (at_inf_above || at_inf_below) pmin = pmax = at_inf_above ? hi + 1 : lo - 1;
    for (;;) {
      if (hl && (at_inf_above || pos > hi)) {
        const auto e = at_inf_above ? hl->from_infinity(g) : hl->from_height(pos - hi, g);
        at_inf_above = false;
        ++exc;
        const std::int64_t pre = hi + e.pre, land = hi + e.entry;
        pmax = std::max(pmax, pre);
        pmin = std::min(pmin, hi + e.low);
        if (occ.contains(land)) {
          r.glue = pre;
          r.attach = land;
          hit = true;
          break;
        }
        pmin = std::min(pmin, land);
        pos = land;
        continue;
      }
      if (hl && (at_inf_below || pos < lo)) {
        const auto e = at_inf_below ? hl->from_infinity(g) : hl->from_height(lo - pos, g);
        at_inf_below = false;
        ++exc;
        const std::int64_t pre = lo - e.pre, land = lo - e.entry;
        pmin = std::min(pmin, pre);
        pmax = std::max(pmax, lo - e.low);
        if (occ.contains(land)) {
          r.glue = pre;
          r.attach = land;
          hit = true;
          break;
        }
        pmax = std::max(pmax, land);
        pos = land;
        continue;
      }
      // Raw steps; (gap_lo, gap_hi) is the open run of free sites around pos.
      std::int64_t gap_lo = occ.prev_below(pos), gap_hi = occ.next_above(pos);
      for (;;) {
        const std::int64_t q = pos + dist.sample(g);
        ++steps;
        if (q > gap_lo && q < gap_hi) [[likely]] {
          pos = q;
          pmin = std::min(pmin, q);
          pmax = std::max(pmax, q);
          if (steps + exc >= budget) [[unlikely]]
            break;
          continue;
        }
        if (occ.contains(q)) {
          r.glue = pos;
          r.attach = q;
          hit = true;
          break;
        }
        pos = q;
        pmin = std::min(pmin, q);
        pmax = std::max(pmax, q);
        if (steps + exc >= budget) break;
        if (hl && (pos > hi || pos < lo)) break;
        gap_lo = occ.prev_below(pos);
        gap_hi = occ.next_above(pos);
      }
      if (hit || steps + exc >= budget) break;
    }
    if (!hit) {
      ++r.restarts;
      continue;
    }
    r.path_min = pmin;
    r.path_max = pmax;
    r.steps = steps;
    r.excursions = exc;
    return r;
  }
}

inline const HalfLineExit* tables_for(const StepDistribution& dist, WalkMode mode) {
  if (mode == WalkMode::raw) return nullptr;
  return HalfLineExit::for_distribution(dist).get();
}

}  // namespace detail

/// Walk from `start` until a proposed jump lands in `occ`; the jump is cancelled
/// and the walker glues where it stands.
template <class Occ, class Gen>
HitResult walk_until_hit(const Occ& occ, std::int64_t start, const StepDistribution& dist, Gen& g,
                         std::uint64_t budget = 1'000'000'000, WalkMode mode = WalkMode::raw) {
  if (occ.empty()) throw WalkerError(WalkerError::Code::EmptyOccupancy, "occupancy set is empty");
  if (occ.contains(start)) throw WalkerError(WalkerError::Code::StartInsideSet, "start point lies in the set");
  return detail::walk(occ, start, dist, detail::tables_for(dist, mode), g, budget, false, false);
}

/// Launch a particle from max A + K (side +inf) or min A - K (side -inf).
template <class Occ, class Gen>
HitResult launch_from_infinity(const Occ& occ, Side side, const StepDistribution& dist, const LaunchPolicy& policy,
                               Gen& g) {
  if (occ.empty()) throw WalkerError(WalkerError::Code::EmptyOccupancy, "occupancy set is empty");
  const HalfLineExit* hl = detail::tables_for(dist, policy.mode);
  if (policy.stationary) {
    if (!hl) throw WalkerError(WalkerError::Code::InvalidPolicy, "stationary launch needs exact mode");
    const bool above = side == Side::plus_inf;
    return detail::walk(occ, above ? detail::kAtInfinity : -detail::kAtInfinity, dist, hl, g, policy.step_budget, above,
                        !above);
  }
  const std::int64_t k = policy.offset(occ.max() - occ.min());
  const std::int64_t start = side == Side::plus_inf ? occ.max() + k : occ.min() - k;
  return detail::walk(occ, start, dist, hl, g, policy.step_budget, false, false);
}

struct LadderSample {
  std::vector<std::int64_t> values;
  std::uint64_t budget_exceeded = 0;
};

/// Ladder steps L_xi: the entry value into {..., -2, -1} of a walk started at 0.
template <class Gen>
LadderSample ladder_steps(const StepDistribution& dist, Gen& g, std::size_t count, WalkMode mode = WalkMode::exact,
                          std::uint64_t budget = 1'000'000'000) {
  LadderSample out;
  out.values.reserve(count);
  if (mode == WalkMode::exact) {
    const auto hl = HalfLineExit::for_distribution(dist);
    for (std::size_t i = 0; i < count; ++i) out.values.push_back(-1 + hl->from_height(1, g).entry);
    return out;
  }
  while (out.values.size() < count) {
    std::int64_t pos = 0;
    std::uint64_t s = 0;
    while (pos >= 0 && s < budget) {
      pos += dist.sample(g);
      ++s;
    }
    if (pos >= 0) {
      ++out.budget_exceeded;
      continue;
    }
    out.values.push_back(pos);
  }
  return out;
}

/// Overshoot z = -R(tau) >= 1 where tau is the first entry into {..., -1} from y >= 0.
template <class Gen>
std::int64_t sample_overshoot(const StepDistribution& dist, std::int64_t y, Gen& g, WalkMode mode = WalkMode::exact,
                              std::uint64_t budget = 1'000'000'000) {
  if (y < 0) throw std::invalid_argument("sample_overshoot: y must be >= 0");
  if (mode == WalkMode::exact) return 1 - HalfLineExit::for_distribution(dist)->from_height(y + 1, g).entry;
  std::int64_t pos = y;
  for (std::uint64_t s = 0; s < budget; ++s) {
    pos += dist.sample(g);
    if (pos < 0) return -pos;
  }
  throw WalkerError(WalkerError::Code::BudgetExceeded, "overshoot walk exceeded its step budget");
}

}  // namespace dla1d
