#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/half_line.hpp"
#include "dla1d/numerics.hpp"
#include "dla1d/rng.hpp"
#include "dla1d/steps.hpp"
#include "dla1d/walker.hpp"

namespace dla1d::oracle {

class OracleError : public std::invalid_argument {
 public:
  enum class Code { EmptySet, StartInsideSet, DisjointnessViolated, TooFewTrials, UnboundedSupport };
  OracleError(Code code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

using PointSet = std::set<std::int64_t>;

/// A start: finite point, or a side at infinity.
using Start = std::variant<std::int64_t, Side>;

/// Plain random walk confined to a window [lo, hi] of interest. Whenever it
/// leaves the window the excursion is replaced by one draw of the half-line
/// first-entry law, so only positions inside the window are ever visited one
/// by one. Membership tests use std::set and nothing from the aggregate or the
/// walker glue loop is involved.
class WindowWalk {
 public:
  WindowWalk(const StepDistribution& dist, std::int64_t lo, std::int64_t hi)
      : dist_(dist), lo_(lo), hi_(hi), hl_(HalfLineExit::for_distribution(dist)) {}

  struct Move {
    std::int64_t from;  // position before the jump
    std::int64_t to;    // position after the jump
  };

  /// Next jump that lands inside [lo, hi] or is the re-entry jump of an
  /// excursion; `from` may lie outside the window in the latter case.
  template <class Gen>
  Move next(std::int64_t pos, Gen& g) const {
    if (pos > hi_) {
      const auto e = hl_->from_height(pos - hi_, g);
      return {hi_ + e.pre, hi_ + e.entry};
    }
    if (pos < lo_) {
      const auto e = hl_->from_height(lo_ - pos, g);
      return {lo_ - e.pre, lo_ - e.entry};
    }
    return {pos, pos + dist_.sample(g)};
  }

  /// First entry of a walk started at +inf (above = true) or -inf.
  template <class Gen>
  Move from_infinity(bool above, Gen& g) const {
    const auto e = hl_->from_infinity(g);
    return above ? Move{hi_ + e.pre, hi_ + e.entry} : Move{lo_ - e.pre, lo_ - e.entry};
  }

 private:
  const StepDistribution& dist_;
  std::int64_t lo_, hi_;
  std::shared_ptr<const HalfLineExit> hl_;
};

inline std::int64_t window_margin(const PointSet& a) {
  const std::int64_t diam = *a.rbegin() - *a.begin();
  return std::max<std::int64_t>(64, 4 * diam);
}

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double lo95() const { return value - 1.959963984540054 * stderr_; }
  double hi95() const { return value + 1.959963984540054 * stderr_; }
  nlohmann::json to_json() const { return {{"estimate", value}, {"stderr", stderr_}, {"ci95", {lo95(), hi95()}}}; }
};

inline Estimate from_proportion(const Proportion& p) { return {p.value, p.stderr_}; }

struct HitDistribution {
  PointSet target;
  std::string start;
  std::uint64_t trials = 0;
  std::map<std::int64_t, std::uint64_t> attach;
  std::map<std::int64_t, std::uint64_t> glue;

  Proportion attach_probability(std::int64_t a) const {
    const auto it = attach.find(a);
    return proportion(it == attach.end() ? 0 : it->second, trials);
  }
  Proportion glue_probability(std::int64_t x) const {
    const auto it = glue.find(x);
    return proportion(it == glue.end() ? 0 : it->second, trials);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["target"] = std::vector<std::int64_t>(target.begin(), target.end());
    j["start"] = start;
    j["trials"] = trials;
    for (const auto& [k, v] : attach) {
      const auto p = proportion(v, trials);
      j["attach"][std::to_string(k)] = {{"p", p.value}, {"ci95", {p.lo95(), p.hi95()}}};
    }
    for (const auto& [k, v] : glue) {
      const auto p = proportion(v, trials);
      j["glue"][std::to_string(k)] = {{"p", p.value}, {"ci95", {p.lo95(), p.hi95()}}};
    }
    return j;
  }
};

/// Monte Carlo harmonic measure: attach and glue laws of a particle that is
/// stopped when its proposed jump lands in A. Side starts are launched from
/// max A + K (or min A - K) with K from the launch policy, or from infinity
/// when the policy is stationary.
template <class Gen>
HitDistribution mc_hit_distribution(const PointSet& a, Start start, const StepDistribution& dist, std::uint64_t trials,
                                    Gen& g, const LaunchPolicy& policy = {}) {
  if (a.empty()) throw OracleError(OracleError::Code::EmptySet, "target set is empty");
  if (trials < 10'000) throw OracleError(OracleError::Code::TooFewTrials, "need at least 1e4 trials");
  const std::int64_t amin = *a.begin(), amax = *a.rbegin();
  const std::int64_t w = window_margin(a);
  const WindowWalk walk(dist, amin - w, amax + w);
  HitDistribution out;
  out.target = a;
  out.trials = trials;
  std::optional<std::int64_t> y;
  bool above = true;
  if (std::holds_alternative<std::int64_t>(start)) {
    y = std::get<std::int64_t>(start);
    if (a.count(*y)) throw OracleError(OracleError::Code::StartInsideSet, "start lies in the target");
    out.start = std::to_string(*y);
  } else {
    above = std::get<Side>(start) == Side::plus_inf;
    out.start = above ? "+inf" : "-inf";
    if (!policy.stationary) {
      const std::int64_t k = policy.offset(amax - amin);
      y = above ? amax + k : amin - k;
    }
  }
  for (std::uint64_t t = 0; t < trials; ++t) {
    WindowWalk::Move m = y ? walk.next(*y, g) : walk.from_infinity(above, g);
    while (!a.count(m.to)) m = walk.next(m.to, g);
    ++out.attach[m.to];
    ++out.glue[m.from];
  }
  return out;
}

struct VisitsReport {
  Estimate lhs;        // mean visits to z before T_A from y
  Estimate p_reach;    // P_y(T_z < T_A)
  Estimate p_escape;   // P_z(T_A < T_z^+)
  Estimate rhs;        // p_reach / p_escape
  double z_score = 0.0;
  std::optional<double> closed_form;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"lhs", lhs.to_json()},         {"rhs", rhs.to_json()}, {"p_reach", p_reach.to_json()},
                        {"p_escape", p_escape.to_json()}, {"z_score", z_score}};
    if (closed_form) j["closed_form"] = *closed_form;
    return j;
  }
};

/// Expected visits to z before T_A against P_y(T_z < T_A) / P_z(T_A < T_z^+).
/// Here T_A is the first time the walk stands in A. Three independent blocks
/// of `trials` each.
template <class Gen>
VisitsReport visits_identity(const PointSet& a, std::int64_t z, std::int64_t y, const StepDistribution& dist,
                             std::uint64_t trials, Gen& g) {
  if (a.empty()) throw OracleError(OracleError::Code::EmptySet, "target set is empty");
  if (a.count(z) || a.count(y)) throw OracleError(OracleError::Code::StartInsideSet, "z and y must lie outside A");
  PointSet pts = a;
  pts.insert(z);
  pts.insert(y);
  const WindowWalk walk(dist, *pts.begin() - 16, *pts.rbegin() + 16);

  RunningStats visits;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::int64_t pos = y;
    std::uint64_t v = pos == z;
    for (;;) {
      pos = walk.next(pos, g).to;
      if (a.count(pos)) break;
      v += pos == z;
    }
    visits.add(static_cast<double>(v));
  }
  std::uint64_t reach = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::int64_t pos = y;
    if (pos == z) {
      ++reach;
      continue;
    }
    for (;;) {
      pos = walk.next(pos, g).to;
      if (pos == z) {
        ++reach;
        break;
      }
      if (a.count(pos)) break;
    }
  }
  std::uint64_t escape = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::int64_t pos = z;
    for (;;) {
      pos = walk.next(pos, g).to;
      if (pos == z) break;
      if (a.count(pos)) {
        ++escape;
        break;
      }
    }
  }
  VisitsReport r;
  r.lhs = {visits.mean(), visits.stderr_of_mean()};
  r.p_reach = from_proportion(proportion(reach, trials));
  r.p_escape = from_proportion(proportion(escape, trials));
  if (r.p_escape.value > 0.0) {
    const double b = r.p_escape.value;
    r.rhs.value = r.p_reach.value / b;
    r.rhs.stderr_ = std::sqrt(std::pow(r.p_reach.stderr_ / b, 2) + std::pow(r.p_reach.value * r.p_escape.stderr_ / (b * b), 2));
  }
  const double se = std::hypot(r.lhs.stderr_, r.rhs.stderr_);
  r.z_score = se > 0.0 ? (r.lhs.value - r.rhs.value) / se : 0.0;
  return r;
}

struct EscapeReport {
  std::int64_t distance = 0;
  Estimate probability;  // P_x(T_A < T_x^+)
  Estimate product;      // d(x, A) * probability
  std::optional<double> closed_form;
  std::optional<std::pair<double, double>> band;
  bool in_band = true;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"distance", distance}, {"probability", probability.to_json()}, {"product", product.to_json()},
                        {"in_band", in_band}};
    if (closed_form) j["closed_form"] = *closed_form;
    if (band) j["band"] = {band->first, band->second};
    return j;
  }
};

/// d(x, A) * P_x(T_A < T_x^+).
template <class Gen>
EscapeReport escape_product(const PointSet& a, std::int64_t x, const StepDistribution& dist, std::uint64_t trials, Gen& g,
                            std::optional<std::pair<double, double>> band = std::nullopt) {
  if (a.empty()) throw OracleError(OracleError::Code::EmptySet, "target set is empty");
  if (a.count(x)) throw OracleError(OracleError::Code::StartInsideSet, "x must lie outside A");
  PointSet pts = a;
  pts.insert(x);
  const WindowWalk walk(dist, *pts.begin() - 16, *pts.rbegin() + 16);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::int64_t pos = x;
    for (;;) {
      pos = walk.next(pos, g).to;
      if (pos == x) break;
      if (a.count(pos)) {
        ++hits;
        break;
      }
    }
  }
  EscapeReport r;
  const auto lb = a.lower_bound(x);
  std::int64_t d = std::numeric_limits<std::int64_t>::max();
  if (lb != a.end()) d = std::min(d, *lb - x);
  if (lb != a.begin()) d = std::min(d, x - *std::prev(lb));
  r.distance = d;
  r.probability = from_proportion(proportion(hits, trials));
  r.product = {static_cast<double>(d) * r.probability.value, static_cast<double>(d) * r.probability.stderr_};
  if (band) {
    r.band = band;
    r.in_band = r.product.value > band->first && r.product.value < band->second;
  }
  return r;
}

struct AvoidReport {
  Estimate in_hull;  // P(R(T_{A∪B} - 1) in (min A, max A))
  Estimate hits_a;   // P(R(T_{A∪B}) in A)
  double jump_scale = 0.0;  // (diam A - |A|) * diam(A ∪ B)^{1 - alpha}
  double ratio = 0.0;        // in_hull / jump_scale

  nlohmann::json to_json() const {
    return {{"in_hull", in_hull.to_json()}, {"hits_a", hits_a.to_json()}, {"scale", jump_scale}, {"ratio", ratio}};
  }
};

/// Probability that a walk from `start` enters the holes of A before touching
/// A ∪ B, measured by where it stands just before its first landing on A ∪ B.
template <class Gen>
AvoidReport avoid_set_prob(const PointSet& a, const PointSet& b, Start start, const StepDistribution& dist,
                           std::uint64_t trials, Gen& g, const LaunchPolicy& policy = {.stationary = true}) {
  if (a.empty() || b.empty()) throw OracleError(OracleError::Code::EmptySet, "sets must be non-empty");
  if (!(*a.rbegin() < *b.begin())) throw OracleError(OracleError::Code::DisjointnessViolated, "need max A < min B");
  PointSet ab = a;
  ab.insert(b.begin(), b.end());
  const std::int64_t lo = *ab.begin(), hi = *ab.rbegin();
  const WindowWalk walk(dist, lo - 16, hi + 16);
  std::optional<std::int64_t> y;
  bool above = true;
  if (std::holds_alternative<std::int64_t>(start)) {
    y = std::get<std::int64_t>(start);
    if (ab.count(*y)) throw OracleError(OracleError::Code::StartInsideSet, "start lies in A ∪ B");
  } else {
    above = std::get<Side>(start) == Side::plus_inf;
    if (!policy.stationary) {
      const std::int64_t k = policy.offset(hi - lo);
      y = above ? hi + k : lo - k;
    }
  }
  std::uint64_t in_hull = 0, hit_a = 0;
  const std::int64_t amin = *a.begin(), amax = *a.rbegin();
  for (std::uint64_t t = 0; t < trials; ++t) {
    WindowWalk::Move m = y ? walk.next(*y, g) : walk.from_infinity(above, g);
    while (!ab.count(m.to)) m = walk.next(m.to, g);
    in_hull += m.from > amin && m.from < amax;
    hit_a += a.count(m.to);
  }
  AvoidReport r;
  r.in_hull = from_proportion(proportion(in_hull, trials));
  r.hits_a = from_proportion(proportion(hit_a, trials));
  const double diam_a = static_cast<double>(amax - amin);
  const double diam_ab = static_cast<double>(hi - lo);
  const double alpha = dist.alpha();
  if (std::isfinite(alpha)) {
    r.jump_scale = (diam_a - static_cast<double>(a.size())) * std::pow(diam_ab, 1.0 - alpha);
    r.ratio = r.jump_scale > 0.0 ? r.in_hull.value / r.jump_scale : 0.0;
  }
  return r;
}

/// Exact hitting law for a bounded-support walk from a finite start, by an
/// absorbing-chain solve on [min A - L, max A + L]. The walk is killed when it
/// leaves the box; L doubles until the conditional law (given absorption in A)
/// changes by less than `tol` in total variation.
struct ExactHit {
  std::map<std::int64_t, double> attach;
  std::map<std::int64_t, double> glue;
  std::int64_t margin = 0;
  double lost = 0.0;  // probability of leaving the box first, at the final margin
};

inline ExactHit exact_hit_distribution(const PointSet& a, std::int64_t y, const StepDistribution& dist, double tol = 1e-6,
                                       std::int64_t max_margin = 1 << 20) {
  if (!dist.bounded()) throw OracleError(OracleError::Code::UnboundedSupport, "exact solver needs bounded support");
  if (a.empty()) throw OracleError(OracleError::Code::EmptySet, "target set is empty");
  if (a.count(y)) throw OracleError(OracleError::Code::StartInsideSet, "start lies in the target");
  const std::int64_t s = dist.cutoff();
  const std::int64_t amin = std::min(*a.begin(), y), amax = std::max(*a.rbegin(), y);
  auto solve = [&](std::int64_t margin) {
    const std::int64_t lo = amin - margin, hi = amax + margin;
    const auto n = static_cast<int>(hi - lo + 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * (2 * s + 2));
    for (std::int64_t x = lo; x <= hi; ++x) {
      const int i = static_cast<int>(x - lo);
      trip.emplace_back(i, i, 1.0);
      if (a.count(x)) continue;
      for (std::int64_t k = -s; k <= s; ++k) {
        const double p = dist.pmf(k);
        const std::int64_t z = x + k;
        if (p == 0.0 || z < lo || z > hi || a.count(z)) continue;
        // Transposed system: row z collects inflow, so the solution is G(y, .).
        trip.emplace_back(static_cast<int>(z - lo), i, -p);
      }
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw std::runtime_error("exact solver: factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[static_cast<int>(y - lo)] = 1.0;
    const Eigen::VectorXd green = lu.solve(rhs);
    ExactHit h;
    h.margin = margin;
    double total = 0.0;
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (a.count(x)) continue;
      const double gx = green[static_cast<int>(x - lo)];
      for (std::int64_t k = -s; k <= s; ++k) {
        const double p = dist.pmf(k);
        if (p == 0.0 || !a.count(x + k)) continue;
        h.attach[x + k] += gx * p;
        h.glue[x] += gx * p;
        total += gx * p;
      }
    }
    for (auto& [k, v] : h.attach) v /= total;
    for (auto& [k, v] : h.glue) v /= total;
    h.lost = 1.0 - total;
    return h;
  };
  auto tv = [](const std::map<std::int64_t, double>& p, const std::map<std::int64_t, double>& q) {
    std::map<std::int64_t, double> d = p;
    for (const auto& [k, v] : q) d[k] -= v;
    double t = 0.0;
    for (const auto& [k, v] : d) t += std::fabs(v);
    return 0.5 * t;
  };
  std::int64_t margin = std::max<std::int64_t>(64, 8 * s);
  ExactHit prev = solve(margin);
  for (margin *= 2; margin <= max_margin; margin *= 2) {
    ExactHit cur = solve(margin);
    const double change = tv(cur.glue, prev.glue);
    prev = std::move(cur);
    if (change < tol) break;
  }
  return prev;
}

}  // namespace dla1d::oracle
