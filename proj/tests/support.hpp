#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace testing_support {

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// expected probabilities; cells with expectation < 5 are pooled.
inline double chi_square_pvalue(const std::vector<double>& observed, const std::vector<double>& probs, double total) {
  double stat = 0.0, pool_o = 0.0, pool_e = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    if (e < 5.0) {
      pool_o += observed[i];
      pool_e += e;
      continue;
    }
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++cells;
  }
  if (pool_e >= 5.0) {
    stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

template <class Map>
double frequency(const Map& counts, typename Map::key_type k, double n) {
  const auto it = counts.find(k);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / n;
}

}  // namespace testing_support
