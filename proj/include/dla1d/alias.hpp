#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dla1d/rng.hpp"

namespace dla1d {

/// Walker/Vose alias table over indices [0, n). Weights need not be normalized.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0 || n > UINT32_MAX) throw std::invalid_argument("AliasTable: bad size");
    long double total = 0.0L;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("AliasTable: negative weight");
      total += w;
    }
    if (!(total > 0.0L)) throw std::invalid_argument("AliasTable: zero total weight");

    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = static_cast<double>(weights[i] * n / total);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // round-off leftovers
  }

  std::size_t size() const { return prob_.size(); }
  double probability(std::size_t column) const { return prob_[column]; }
  std::size_t alias(std::size_t column) const { return alias_[column]; }

  template <class Gen>
  std::size_t sample(Gen& g) const {
    // High word picks the column; the low word is uniform given the column.
    const unsigned __int128 m = static_cast<unsigned __int128>(g()) * prob_.size();
    const auto column = static_cast<std::size_t>(m >> 64);
    const double frac = static_cast<double>(static_cast<std::uint64_t>(m) >> 11) * 0x1.0p-53;
    return frac < prob_[column] ? column : alias_[column];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace dla1d
