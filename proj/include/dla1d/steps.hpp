#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/alias.hpp"
#include "dla1d/numerics.hpp"
#include "dla1d/rng.hpp"

namespace dla1d {

enum class StepKind { zeta, simple, table };

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::zeta: return "zeta";
    case StepKind::simple: return "simple";
    case StepKind::table: return "table";
  }
  return "?";
}

class StepError : public std::invalid_argument {
 public:
  enum class Code { InvalidAlpha, CutoffTooSmall, AsymmetricPmf, NotNormalized, InvalidSupport };

  StepError(Code code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Symmetric integer step law. Immutable after construction.
///
/// Three families are supported: the zeta law P(|xi| = k) = k^{-1-alpha} / zeta(1+alpha)
/// split evenly between +k and -k, the nearest-neighbour walk, and arbitrary
/// finite symmetric tables. Sampling uses an alias table over the signed head
/// |k| <= cutoff; the zeta tail beyond the cutoff is drawn exactly by rejection
/// from a continuous Pareto envelope.
class StepDistribution {
 public:
  static constexpr std::int64_t kMinCutoff = 1000;
  static constexpr std::int64_t kDefaultCutoff = 4096;

  static StepDistribution zeta(double alpha, std::int64_t cutoff = kDefaultCutoff) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw StepError(StepError::Code::InvalidAlpha, "zeta law needs alpha > 0");
    if (cutoff > (std::int64_t{1} << 30))
      throw StepError(StepError::Code::CutoffTooSmall, "zeta cutoff must be at most 2^30");
    if (cutoff < kMinCutoff)
      throw StepError(StepError::Code::CutoffTooSmall, "zeta cutoff must be at least " + std::to_string(kMinCutoff));
    StepDistribution d;
    d.kind_ = StepKind::zeta;
    d.alpha_ = alpha;
    d.cutoff_ = cutoff;
    d.zeta_norm_ = riemann_zeta(1.0 + alpha);
    d.head_.assign(static_cast<std::size_t>(cutoff) + 1, 0.0);
    for (std::int64_t k = 1; k <= cutoff; ++k) d.head_[k] = std::pow(static_cast<double>(k), -1.0 - alpha) / d.zeta_norm_;
    d.tail_mass_ = hurwitz_zeta(1.0 + alpha, static_cast<double>(cutoff + 1)) / d.zeta_norm_;
    d.finish();
    return d;
  }

  static StepDistribution simple() {
    StepDistribution d;
    d.kind_ = StepKind::simple;
    d.cutoff_ = 1;
    d.head_ = {0.0, 1.0};
    d.warnings_.push_back("ZeroOnOddSupport: support is odd only, walk has period 2");
    d.finish();
    return d;
  }

  /// Finite symmetric table keyed by signed step.
  static StepDistribution table(const std::map<std::int64_t, double>& pmf) {
    if (pmf.empty()) throw StepError(StepError::Code::InvalidSupport, "empty pmf");
    long double total = 0.0L;
    std::int64_t bound = 0;
    std::int64_t g = 0;
    for (const auto& [k, p] : pmf) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw StepError(StepError::Code::NotNormalized, "negative or non-finite probability");
      if (p == 0.0) continue;
      if (k == 0) throw StepError(StepError::Code::InvalidSupport, "zero step is not supported");
      total += p;
      bound = std::max(bound, k < 0 ? -k : k);
      g = std::gcd(g, k < 0 ? -k : k);
    }
    for (const auto& [k, p] : pmf) {
      const auto it = pmf.find(-k);
      const double q = it == pmf.end() ? 0.0 : it->second;
      if (std::fabs(p - q) > 1e-12)
        throw StepError(StepError::Code::AsymmetricPmf, "pmf is not symmetric at step " + std::to_string(k));
    }
    if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12)
      throw StepError(StepError::Code::NotNormalized, "pmf sums to " + std::to_string(static_cast<double>(total)));
    if (g != 1) throw StepError(StepError::Code::InvalidSupport, "support does not generate the integers");

    StepDistribution d;
    d.kind_ = StepKind::table;
    d.cutoff_ = bound;
    d.head_.assign(static_cast<std::size_t>(bound) + 1, 0.0);
    for (const auto& [k, p] : pmf)
      if (k > 0) d.head_[k] = 2.0 * p;
    bool all_odd = true;
    for (std::int64_t k = 2; k <= bound; k += 2) all_odd = all_odd && d.head_[k] == 0.0;
    if (all_odd) d.warnings_.push_back("ZeroOnOddSupport: support is odd only, walk has period 2");
    d.finish();
    return d;
  }

  static StepDistribution from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zeta") return zeta(j.at("alpha").get<double>(), j.value("cutoff", kDefaultCutoff));
    if (kind == "simple") return simple();
    if (kind == "table") {
      std::map<std::int64_t, double> pmf;
      for (const auto& [k, v] : j.at("pmf").items()) pmf[std::stoll(k)] = v.get<double>();
      return table(pmf);
    }
    throw StepError(StepError::Code::InvalidSupport, "unknown distribution kind '" + kind + "'");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    if (kind_ == StepKind::zeta) {
      j["alpha"] = alpha_;
      j["cutoff"] = cutoff_;
    } else if (kind_ == StepKind::table) {
      nlohmann::json pmf = nlohmann::json::object();
      for (std::int64_t k = -cutoff_; k <= cutoff_; ++k)
        if (pmf_of(k) > 0.0) pmf[std::to_string(k)] = pmf_of(k);
      j["pmf"] = pmf;
    }
    return j;
  }

  /// Canonical identity, stable across runs.
  std::string key() const { return to_json().dump(); }

  StepKind kind() const { return kind_; }
  /// Tail index; +infinity for bounded laws.
  double alpha() const { return kind_ == StepKind::zeta ? alpha_ : std::numeric_limits<double>::infinity(); }
  std::int64_t cutoff() const { return cutoff_; }
  bool bounded() const { return kind_ != StepKind::zeta; }
  /// Largest |k| with positive mass, or nullopt for unbounded support.
  std::optional<std::int64_t> support_bound() const {
    if (!bounded()) return std::nullopt;
    return cutoff_;
  }
  const std::vector<std::string>& warnings() const { return warnings_; }
  bool periodic() const { return !warnings_.empty(); }

  /// P(|xi| = k).
  double magnitude_pmf(std::int64_t k) const {
    if (k < 0) k = -k;
    if (k == 0) return 0.0;
    if (k <= cutoff_) return head_[k];
    if (kind_ != StepKind::zeta) return 0.0;
    return std::pow(static_cast<double>(k), -1.0 - alpha_) / zeta_norm_;
  }

  /// P(xi = k).
  double pmf(std::int64_t k) const { return 0.5 * magnitude_pmf(k); }

  /// P(|xi| > t) for t >= 0.
  double magnitude_survival(std::int64_t t) const {
    if (t < 0) return 1.0;
    if (t < cutoff_) return head_survival_[t];
    if (kind_ != StepKind::zeta) return 0.0;
    return hurwitz_zeta(1.0 + alpha_, static_cast<double>(t + 1)) / zeta_norm_;
  }

  /// P(xi > t) for t >= 0.
  double survival(std::int64_t t) const { return 0.5 * magnitude_survival(t); }

  /// Variance of a step, or nullopt if infinite.
  std::optional<double> variance() const {
    if (kind_ == StepKind::zeta) {
      if (alpha_ <= 2.0) return std::nullopt;
      return riemann_zeta(alpha_ - 1.0) / zeta_norm_;
    }
    long double v = 0.0L;
    for (std::int64_t k = 1; k <= cutoff_; ++k) v += static_cast<long double>(k) * k * head_[k];
    return static_cast<double>(v);
  }

  /// Mean of |xi|, or nullopt if infinite.
  std::optional<double> mean_abs() const {
    if (kind_ == StepKind::zeta) {
      if (alpha_ <= 1.0) return std::nullopt;
      return riemann_zeta(alpha_) / zeta_norm_;
    }
    long double v = 0.0L;
    for (std::int64_t k = 1; k <= cutoff_; ++k) v += static_cast<long double>(k) * head_[k];
    return static_cast<double>(v);
  }

  /// Sum of the signed pmf over |k| <= cutoff plus the closed-form tail.
  double total_mass() const {
    long double s = 0.0L;
    for (std::int64_t k = cutoff_; k >= 1; --k) s += head_[k];
    return static_cast<double>(s + tail_mass_);
  }

  template <class Gen>
  std::int64_t sample(Gen& g) const {
    const unsigned __int128 m = static_cast<unsigned __int128>(g()) * cells_.size();
    const Cell& cell = cells_[static_cast<std::size_t>(m >> 64)];
    const double frac = static_cast<double>(static_cast<std::uint64_t>(m) >> 11) * 0x1.0p-53;
    const std::int32_t v = frac < cell.prob ? cell.self : cell.other;
    if (v != kTailUp && v != kTailDown) [[likely]]
      return v;
    const std::int64_t k = sample_tail(g);
    return v == kTailUp ? k : -k;
  }

  template <class Gen>
  std::int64_t sample_magnitude(Gen& g) const {
    const std::int64_t k = sample(g);
    return k < 0 ? -k : k;
  }

  /// |xi| conditioned on |xi| > cutoff (zeta law only).
  template <class Gen>
  std::int64_t sample_tail(Gen& g) const {
    const double c = static_cast<double>(cutoff_);
    for (;;) {
      // Pareto(alpha) on [cutoff, inf), rounded up; accept with the ratio of
      // the discrete mass to the envelope mass on (k-1, k].
      const double y = c * std::pow(uniform01_open_low(g), -1.0 / alpha_);
      if (!(y < 1.0e18)) continue;
      const auto k = static_cast<std::int64_t>(std::ceil(y));
      if (k <= cutoff_) continue;
      const double inv_k = 1.0 / static_cast<double>(k);
      const double accept = alpha_ * inv_k / std::expm1(-alpha_ * std::log1p(-inv_k));
      if (uniform01(g) < accept) return k;
    }
  }

 private:
  StepDistribution() = default;

  double pmf_of(std::int64_t k) const { return pmf(k); }

  void finish() {
    const auto c = static_cast<std::size_t>(cutoff_);
    head_survival_.assign(c, 0.0);
    long double acc = tail_mass_;
    for (std::size_t t = c; t-- > 0;) {
      head_survival_[t] = static_cast<double>(acc + head_[t + 1]);
      acc += head_[t + 1];
    }
    std::vector<double> w(2 * c + 2, 0.0);
    for (std::size_t k = 1; k <= c; ++k) {
      w[k - 1] = 0.5 * head_[k];
      w[c + k - 1] = 0.5 * head_[k];
    }
    w[2 * c] = 0.5 * tail_mass_;
    w[2 * c + 1] = 0.5 * tail_mass_;
    const AliasTable alias(w);
    auto value = [c](std::size_t i) -> std::int32_t {
      if (i < c) return static_cast<std::int32_t>(i + 1);
      if (i < 2 * c) return -static_cast<std::int32_t>(i - c + 1);
      return i == 2 * c ? kTailUp : kTailDown;
    };
    cells_.resize(alias.size());
    for (std::size_t i = 0; i < alias.size(); ++i)
      cells_[i] = Cell{alias.probability(i), value(i), value(alias.alias(i))};
  }

  // One alias column with both outcomes stored as signed steps.
  struct Cell {
    double prob;
    std::int32_t self;
    std::int32_t other;
  };
  static constexpr std::int32_t kTailUp = std::numeric_limits<std::int32_t>::max();
  static constexpr std::int32_t kTailDown = std::numeric_limits<std::int32_t>::min();

  StepKind kind_ = StepKind::simple;
  double alpha_ = 0.0;
  std::int64_t cutoff_ = 1;
  double zeta_norm_ = 1.0;
  double tail_mass_ = 0.0;
  std::vector<double> head_;           // P(|xi| = k), index k
  std::vector<double> head_survival_;  // P(|xi| > t), t < cutoff
  std::vector<Cell> cells_;
  std::vector<std::string> warnings_;
};

inline StepDistribution make_zeta(double alpha, std::int64_t cutoff = StepDistribution::kDefaultCutoff) {
  return StepDistribution::zeta(alpha, cutoff);
}
inline StepDistribution make_simple() { return StepDistribution::simple(); }
inline StepDistribution make_table(const std::map<std::int64_t, double>& pmf) { return StepDistribution::table(pmf); }

}  // namespace dla1d
