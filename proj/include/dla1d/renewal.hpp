#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/aggregate.hpp"
#include "dla1d/numerics.hpp"

namespace dla1d {

enum class RenewalSide { right, left };
enum class RenewalKind { weak, strong };
enum class RenewalStatus { open, violated, confirmed_at_horizon };

inline const char* to_string(RenewalSide s) { return s == RenewalSide::right ? "right" : "left"; }
inline const char* to_string(RenewalKind k) { return k == RenewalKind::weak ? "weak" : "strong"; }
inline const char* to_string(RenewalStatus s) {
  switch (s) {
    case RenewalStatus::open: return "open";
    case RenewalStatus::violated: return "violated";
    case RenewalStatus::confirmed_at_horizon: return "confirmed_at_horizon";
  }
  return "?";
}

struct RenewalCandidate {
  std::uint64_t time = 0;
  std::int64_t position = 0;
  RenewalSide side = RenewalSide::right;
  RenewalKind kind = RenewalKind::weak;
  RenewalStatus status = RenewalStatus::open;
  std::optional<std::uint64_t> violated_by;
};

class RenewalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct IntervalStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct RenewalSummary {
  std::uint64_t horizon = 0;
  // [side][kind]
  std::uint64_t confirmed[2][2] = {{0, 0}, {0, 0}};
  std::uint64_t confirmed_first_half[2][2] = {{0, 0}, {0, 0}};
  std::uint64_t confirmed_second_half[2][2] = {{0, 0}, {0, 0}};
  std::uint64_t created[2][2] = {{0, 0}, {0, 0}};
  /// Confirmed candidates created in the second half, most exposed to censoring.
  std::uint64_t censored = 0;
  /// Confirmed strong right candidates created by time horizon/2, per particle.
  Proportion strong_right_rate;
  IntervalStats w[2];  // particle gaps between consecutive confirmed strong candidates, per side
  IntervalStats d[2];  // hull increments over the same intervals
  std::uint64_t w_total[2] = {0, 0};

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["horizon"] = horizon;
    for (int s = 0; s < 2; ++s) {
      const char* sn = s == 0 ? "right" : "left";
      for (int k = 0; k < 2; ++k) {
        const char* kn = k == 0 ? "weak" : "strong";
        j["created"][sn][kn] = created[s][k];
        j["confirmed"][sn][kn] = confirmed[s][k];
        j["confirmed_first_half"][sn][kn] = confirmed_first_half[s][k];
        j["confirmed_second_half"][sn][kn] = confirmed_second_half[s][k];
      }
      j["w"][sn] = {{"count", w[s].count}, {"mean", w[s].mean}, {"stderr", w[s].stderr_}, {"sum", w_total[s]}};
      j["d"][sn] = {{"count", d[s].count}, {"mean", d[s].mean}, {"stderr", d[s].stderr_}};
    }
    j["censored"] = censored;
    j["strong_right_rate"] = {{"value", strong_right_rate.value},
                              {"stderr", strong_right_rate.stderr_},
                              {"lo95", strong_right_rate.lo95()},
                              {"hi95", strong_right_rate.hi95()}};
    return j;
  }
};

/// Online tracker of weak and strong renewal candidates on both sides.
///
/// A right candidate is created whenever a particle glues beyond the current
/// maximum. A later +inf particle violates the weak candidate at a if it glues
/// left of a, and the strong one if its path, including the attach point, goes
/// left of a. Left candidates mirror this for -inf particles. Right candidate
/// positions increase with creation time, so each violation pops a suffix of
/// the open stack.
class RenewalTracker {
 public:
  void observe(const ParticleRecord& rec, const Hull& before) {
    if (rec.index != last_ + 1) throw RenewalError("records must arrive in index order");
    last_ = rec.index;
    if (rec.side == Side::plus_inf) {
      violate_right(open_[0][0], rec.glue, rec.index);
      violate_right(open_[0][1], std::min(rec.path_min, rec.attach), rec.index);
    } else {
      violate_left(open_[1][0], rec.glue, rec.index);
      violate_left(open_[1][1], std::max(rec.path_max, rec.attach), rec.index);
    }
    if (rec.glue > before.max) create(RenewalSide::right, rec);
    if (rec.glue < before.min) create(RenewalSide::left, rec);
  }

  const std::vector<RenewalCandidate>& candidates() const { return all_; }
  std::uint64_t observed() const { return last_; }

  /// Marks all open candidates confirmed_at_horizon and summarizes.
  RenewalSummary summarize(std::uint64_t horizon) {
    for (int s = 0; s < 2; ++s)
      for (int k = 0; k < 2; ++k) {
        for (auto i : open_[s][k]) all_[i].status = RenewalStatus::confirmed_at_horizon;
        open_[s][k].clear();
      }
    RenewalSummary out;
    out.horizon = horizon;
    const std::uint64_t half = horizon / 2;
    std::vector<const RenewalCandidate*> strong[2];
    for (const auto& c : all_) {
      const int s = c.side == RenewalSide::right ? 0 : 1;
      const int k = c.kind == RenewalKind::weak ? 0 : 1;
      ++out.created[s][k];
      if (c.status != RenewalStatus::confirmed_at_horizon) continue;
      ++out.confirmed[s][k];
      if (c.time <= half) {
        ++out.confirmed_first_half[s][k];
      } else {
        ++out.confirmed_second_half[s][k];
        ++out.censored;
      }
      if (k == 1) strong[s].push_back(&c);
    }
    out.strong_right_rate = proportion(out.confirmed_first_half[0][1], std::max<std::uint64_t>(half, 1));
    for (int s = 0; s < 2; ++s) {
      RunningStats ws, ds;
      for (std::size_t i = 1; i < strong[s].size(); ++i) {
        const auto w = strong[s][i]->time - strong[s][i - 1]->time;
        const auto d = strong[s][i]->position - strong[s][i - 1]->position;
        ws.add(static_cast<double>(w));
        ds.add(static_cast<double>(s == 0 ? d : -d));
        out.w_total[s] += w;
      }
      out.w[s] = {ws.count(), ws.mean(), ws.stderr_of_mean()};
      out.d[s] = {ds.count(), ds.mean(), ds.stderr_of_mean()};
    }
    return out;
  }

 private:
  void create(RenewalSide side, const ParticleRecord& rec) {
    const int s = side == RenewalSide::right ? 0 : 1;
    for (auto kind : {RenewalKind::weak, RenewalKind::strong}) {
      all_.push_back({rec.index, rec.glue, side, kind, RenewalStatus::open, std::nullopt});
      open_[s][kind == RenewalKind::weak ? 0 : 1].push_back(all_.size() - 1);
    }
  }

  void violate_right(std::vector<std::size_t>& stack, std::int64_t reach, std::uint64_t by) {
    while (!stack.empty() && all_[stack.back()].position > reach) {
      all_[stack.back()].status = RenewalStatus::violated;
      all_[stack.back()].violated_by = by;
      stack.pop_back();
    }
  }

  void violate_left(std::vector<std::size_t>& stack, std::int64_t reach, std::uint64_t by) {
    while (!stack.empty() && all_[stack.back()].position < reach) {
      all_[stack.back()].status = RenewalStatus::violated;
      all_[stack.back()].violated_by = by;
      stack.pop_back();
    }
  }

  std::uint64_t last_ = 0;
  std::vector<RenewalCandidate> all_;
  std::vector<std::size_t> open_[2][2];  // [side][kind] indices into all_, sorted by position
};

}  // namespace dla1d
