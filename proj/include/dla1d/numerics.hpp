#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dla1d {

/// Hurwitz zeta function sum_{i>=0} (q+i)^{-s} for s > 1, q > 0.
///
/// The first `direct_terms` summands (at least enough to push the argument
/// past 16) are added explicitly, smallest first; the remainder uses the
/// Euler-Maclaurin expansion with seven Bernoulli corrections. Relative error
/// is below 1e-14 over the parameter ranges used here.
inline double hurwitz_zeta(double s, double q, std::int64_t direct_terms = 0) {
  if (!(s > 1.0) || !(q > 0.0)) throw std::domain_error("hurwitz_zeta: need s > 1, q > 0");
  constexpr double kShift = 16.0;
  std::int64_t n = direct_terms;
  if (q + static_cast<double>(n) < kShift) n = static_cast<std::int64_t>(std::ceil(kShift - q));

  long double head = 0.0L;
  for (std::int64_t i = n - 1; i >= 0; --i) head += std::pow(static_cast<long double>(q) + i, -static_cast<long double>(s));

  const long double a = static_cast<long double>(q) + n;
  const long double ls = s;
  long double tail = std::pow(a, 1.0L - ls) / (ls - 1.0L) + 0.5L * std::pow(a, -ls);
  // B_{2j} / (2j)!
  static constexpr std::array<long double, 7> kCoef = {
      1.0L / 12.0L,          -1.0L / 720.0L,          1.0L / 30240.0L,         -1.0L / 1209600.0L,
      1.0L / 47900160.0L,    -691.0L / 1307674368000.0L, 1.0L / 74724249600.0L};
  long double rising = ls;                     // s (s+1) ... (s+2j-2)
  long double power = std::pow(a, -ls - 1.0L);  // a^{-s-2j+1}
  const long double inv_a2 = 1.0L / (a * a);
  for (std::size_t j = 0; j < kCoef.size(); ++j) {
    tail += kCoef[j] * rising * power;
    rising *= (ls + 2.0L * j + 1.0L) * (ls + 2.0L * j + 2.0L);
    power *= inv_a2;
  }
  return static_cast<double>(head + tail);
}

/// Riemann zeta by direct summation of 10^6 terms plus the integral tail.
inline double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0, 1'000'000); }

/// Binomial proportion with its normal-approximation standard error.
struct Proportion {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;

  double lo95() const { return value - 1.959963984540054 * stderr_; }
  double hi95() const { return value + 1.959963984540054 * stderr_; }
};

inline Proportion proportion(std::uint64_t successes, std::uint64_t trials) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials == 0) return p;
  p.value = static_cast<double>(successes) / static_cast<double>(trials);
  p.stderr_ = std::sqrt(p.value * (1.0 - p.value) / static_cast<double>(trials));
  return p;
}

/// Running mean / variance (Welford).
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) { *this = o; return; }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double stderr_of_mean() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace dla1d
