#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "dla1d/alias.hpp"
#include "dla1d/numerics.hpp"
#include "dla1d/rng.hpp"
#include "dla1d/steps.hpp"

namespace dla1d {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place complex DFT of length n. sign = FFTW_FORWARD or FFTW_BACKWARD, unnormalized.
inline void dft(std::vector<std::complex<double>>& a, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(a.size()), p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace detail

/// Exact first-entry law of the walk into a half line.
///
/// For a walk started at height h >= 1 above a barrier b, let T be the first
/// time it lands in (-inf, b]. The tables here give the joint law of the path
/// minimum before T, the position at T-1 and the position at T, all as offsets
/// from b. They come from the Wiener-Hopf factorization of 1 - phi computed on
/// an FFT grid: d_j = P(H > j) for the strict ladder height H and the strict
/// renewal sequence u. The Green function of the half line is
///   G(x, y) = sum_{n=1}^{min(x,y)} u(x-n) v(y-n),   v = u / (1 - tie),
/// and P_h(pre = b+j, entry = b+j-k) = G(h, j) P(xi = -k).
///
/// Requires a finite step variance. Tables are large for the zeta law, so use
/// `for_distribution` which caches one instance per law.
class HalfLineExit {
 public:
  struct Entry {
    std::int64_t low;    // minimum of the path before entry, >= 1
    std::int64_t pre;    // position before the entering jump, >= low
    std::int64_t entry;  // landing position, <= 0
  };

  static constexpr std::int64_t kMaxJump = 1'000'000'000'000'000'000LL;

  explicit HalfLineExit(const StepDistribution& dist) : dist_(dist) {
    if (!dist.variance()) throw std::invalid_argument("half-line tables need a step law with finite variance");
    sigma2_ = *dist.variance();
    bounded_ = dist.bounded();
    alpha_ = dist.alpha();
    std::size_t m;
    if (bounded_) {
      m = 4096;
      while (m < 64 * static_cast<std::size_t>(dist.cutoff())) m *= 2;
    } else {
      m = std::size_t{1} << 22;
    }
    build(m);
  }

  static std::shared_ptr<const HalfLineExit> for_distribution(const StepDistribution& dist) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const HalfLineExit>> cache;
    const std::string key = dist.key();
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const HalfLineExit>(dist);
    cache.emplace(key, t);
    return t;
  }

  const StepDistribution& distribution() const { return dist_; }
  /// Length of the stored tables; values beyond it are extrapolated.
  std::int64_t table_size() const { return static_cast<std::int64_t>(u_.size()); }

  /// Probability that the walk revisits its starting level before going strictly below it.
  double tie_probability() const { return tie_; }
  /// E[H] for the strict ladder height, from mu^2 (1 - tie) = sigma^2 / 2.
  double mean_ladder() const { return mu_; }
  /// Same mean from summing the ladder survival table; a consistency check.
  double mean_ladder_from_table() const { return mu_table_; }

  /// P(H > j).
  double ladder_survival(std::int64_t j) const {
    if (j < 0) return 1.0;
    if (j < table_size()) return d_[j];
    if (bounded_) return 0.0;
    return d_.back() * c_asym(static_cast<double>(j)) / c_asym(static_cast<double>(table_size() - 1));
  }
  /// P(H = k) = P(first entry into (-inf, -1] from 0 is at -k).
  double ladder_pmf(std::int64_t k) const {
    if (k < 1) return 0.0;
    return std::max(0.0, ladder_survival(k - 1) - ladder_survival(k));
  }

  /// Strict ladder renewal sequence u(n).
  double renewal(std::int64_t n) const {
    if (n < 0) return 0.0;
    return n < table_size() ? u_[n] : u_inf_;
  }
  double weak_renewal(std::int64_t n) const { return renewal(n) / (1.0 - tie_); }

  /// Expected visits to y before entering (-inf, 0], from x (x, y >= 1, start counted).
  double green(std::int64_t x, std::int64_t y) const {
    long double s = 0.0L;
    for (std::int64_t n = 1; n <= std::min(x, y); ++n) s += renewal(x - n) * weak_renewal(y - n);
    return static_cast<double>(s);
  }

  /// Exact first entry from height h >= 1 above the barrier.
  template <class Gen>
  Entry from_height(std::int64_t h, Gen& g) const {
    if (h < 1) throw std::invalid_argument("from_height: h must be >= 1");
    for (;;) {
      const Entry e = from_infinity(g);
      if (e.low > h) continue;
      if (uniform01(g) * u_max_ < renewal(h - e.low)) return e;
    }
  }

  /// First entry for a walk started infinitely high (stationary entry law).
  template <class Gen>
  Entry from_infinity(Gen& g) const {
    const std::int64_t k = sample_jump(g);
    std::int64_t m;
    do {
      m = sample_weak_level(k, g);
    } while (uniform01(g) * static_cast<double>(k) >= static_cast<double>(k - m));
    const auto n = 1 + static_cast<std::int64_t>(uniform_below(g, static_cast<std::uint64_t>(k - m)));
    return Entry{n, n + m, n + m - k};
  }

 private:
  // c(x) = sum_{k > x} (k - x) P(xi = k) for the zeta law, leading terms.
  double c_asym(double x) const {
    const double q = x + 1.0;
    return (std::pow(q, 1.0 - alpha_) / (alpha_ * (alpha_ - 1.0)) + std::pow(q, -alpha_) / alpha_ +
            5.0 / 12.0 * std::pow(q, -alpha_ - 1.0)) /
           zeta_z_;
  }

  void build(std::size_t m) {
    const std::size_t half = m / 2;
    const std::size_t n_tab = m / 4;

    // c_j for j = 0..half via c_j = c_{j+1} + P(xi > j).
    std::vector<long double> c(half + 1, 0.0L);
    if (bounded_) {
      const auto b = static_cast<std::size_t>(dist_.cutoff());
      long double s = 0.0L;
      long double acc = 0.0L;
      for (std::size_t j = std::min(b, half); j-- > 0;) {
        s += dist_.pmf(static_cast<std::int64_t>(j + 1));
        acc += s;
        c[j] = acc;
      }
    } else {
      zeta_z_ = 2.0 * riemann_zeta(1.0 + alpha_);
      const double jh = static_cast<double>(half);
      c[half] = (static_cast<long double>(hurwitz_zeta(alpha_, jh + 1.0)) -
                 jh * static_cast<long double>(hurwitz_zeta(1.0 + alpha_, jh + 1.0))) /
                zeta_z_;
      long double s = dist_.survival(static_cast<std::int64_t>(half));
      for (std::size_t j = half; j-- > 0;) {
        s += dist_.pmf(static_cast<std::int64_t>(j + 1));
        c[j] = c[j + 1] + s;
      }
      // Periodize: add sum_{t>=1} c(tM + j) + c(tM - j), interpolated from a coarse grid.
      const double md = static_cast<double>(m);
      const std::size_t nodes = 4096;
      std::vector<double> img(nodes + 1);
      for (std::size_t i = 0; i <= nodes; ++i) {
        const double j = jh * static_cast<double>(i) / nodes;
        double v = 0.0;
        for (double a : {j + 1.0, 1.0 - j}) {
          const double q = 1.0 + a / md;
          v += std::pow(md, 1.0 - alpha_) * hurwitz_zeta(alpha_ - 1.0, q) / (alpha_ * (alpha_ - 1.0)) +
               std::pow(md, -alpha_) * hurwitz_zeta(alpha_, q) / alpha_;
        }
        img[i] = v / zeta_z_;
      }
      for (std::size_t j = 0; j <= half; ++j) {
        const double x = static_cast<double>(j) / jh * nodes;
        const auto i = std::min(static_cast<std::size_t>(x), nodes - 1);
        const double f = x - static_cast<double>(i);
        c[j] += (1.0 - f) * img[i] + f * img[i + 1];
      }
    }

    using cd = std::complex<double>;
    std::vector<cd> a(m);
    for (std::size_t j = 0; j <= half; ++j) a[j] = static_cast<double>(c[j]);
    for (std::size_t j = 1; j < half; ++j) a[m - j] = a[j];
    detail::dft(a, FFTW_FORWARD);
    for (auto& x : a) {
      if (!(x.real() > 0.0)) throw std::runtime_error("half-line tables: non-positive symbol");
      x = std::log(x.real());
    }
    detail::dft(a, FFTW_BACKWARD);
    const double inv_m = 1.0 / static_cast<double>(m);
    const double r0 = a[0].real() * inv_m;
    tie_ = -std::expm1(r0);
    // Analytic half of log rho.
    std::vector<cd> rp(m, 0.0);
    for (std::size_t k = 1; k < half; ++k) rp[k] = a[k] * inv_m;
    detail::dft(rp, FFTW_FORWARD);
    std::vector<cd> ep(m), em(m);
    for (std::size_t i = 0; i < m; ++i) {
      ep[i] = std::exp(rp[i]);
      em[i] = std::exp(-rp[i]);
    }
    rp.clear();
    rp.shrink_to_fit();
    detail::dft(ep, FFTW_BACKWARD);
    detail::dft(em, FFTW_BACKWARD);

    d_.resize(n_tab);
    u_.resize(n_tab);
    long double cum = 0.0L;
    long double dsum = 0.0L;
    for (std::size_t j = 0; j < n_tab; ++j) {
      d_[j] = std::clamp(ep[j].real() * inv_m, 0.0, 1.0);
      cum += em[j].real() * inv_m;
      u_[j] = static_cast<double>(cum);
      dsum += d_[j];
    }
    if (bounded_)
      for (auto j = static_cast<std::size_t>(dist_.cutoff()); j < n_tab; ++j) d_[j] = 0.0;
    d_[0] = 1.0;

    mu_ = std::sqrt(sigma2_ / (2.0 * (1.0 - tie_)));
    mu_table_ = static_cast<double>(dsum);
    if (!bounded_) {
      // Extrapolated tail of sum_j P(H > j), d_j proportional to c_j beyond the table.
      const double nt = static_cast<double>(n_tab);
      const double tail_c = (hurwitz_zeta(alpha_ - 1.0, nt + 1.0) / (alpha_ * (alpha_ - 1.0)) +
                             hurwitz_zeta(alpha_, nt + 1.0) / alpha_) /
                            zeta_z_;
      mu_table_ += d_.back() / c_asym(nt - 1.0) * tail_c;
    }
    u_inf_ = 1.0 / mu_;
    u_max_ = std::max(u_inf_, *std::max_element(u_.begin(), u_.end()));

    // Cumulative weak renewal V and its running sum W(k) = sum_{j<k} V(j).
    const double w_scale = 1.0 / (1.0 - tie_);
    v_cum_.resize(n_tab);
    w_.resize(n_tab + 1);
    long double vacc = 0.0L;
    long double wacc = 0.0L;
    w_[0] = 0.0;
    for (std::size_t j = 0; j < n_tab; ++j) {
      vacc += u_[j] * w_scale;
      v_cum_[j] = static_cast<double>(vacc);
      wacc += vacc;
      w_[j + 1] = static_cast<double>(wacc);
    }
    v_inf_ = u_inf_ * w_scale;

    // Jump law of the entering step: P(xi = -k) W(k), k >= 1.
    const std::int64_t kmax = bounded_ ? dist_.cutoff() : static_cast<std::int64_t>(n_tab);
    std::vector<double> jw(static_cast<std::size_t>(kmax) + 1, 0.0);
    long double total = 0.0L;
    for (std::int64_t k = 1; k <= kmax; ++k) {
      jw[k - 1] = dist_.pmf(k) * w_[static_cast<std::size_t>(k)];
      total += jw[k - 1];
    }
    head_kmax_ = kmax;
    if (!bounded_) {
      const long double nn = static_cast<long double>(n_tab);
      const long double vp = v_cum_.back();
      a0_ = static_cast<long double>(w_[n_tab]) - nn * vp + v_inf_ * (nn * nn - nn) / 2.0L;
      a1_ = vp + v_inf_ * (1.0L - 2.0L * nn) / 2.0L;
      a2_ = v_inf_ / 2.0L;
      const double q = static_cast<double>(n_tab) + 1.0;
      const long double tail = (a0_ * hurwitz_zeta(1.0 + alpha_, q) + a1_ * hurwitz_zeta(alpha_, q) +
                                a2_ * hurwitz_zeta(alpha_ - 1.0, q)) /
                               zeta_z_;
      jw[static_cast<std::size_t>(kmax)] = static_cast<double>(tail);
      total += tail;
      tail_bound_ = static_cast<double>(std::fabs(a0_) / (nn * nn) + std::fabs(a1_) / nn + a2_);
    }
    stationary_total_ = static_cast<double>(total);
    jump_alias_ = AliasTable(jw);
  }

  // W extended quadratically beyond the table.
  double w_of(std::int64_t k) const {
    if (k <= static_cast<std::int64_t>(w_.size()) - 1) return w_[static_cast<std::size_t>(k)];
    const long double kk = static_cast<long double>(k);
    return static_cast<double>(a0_ + a1_ * kk + a2_ * kk * kk);
  }

  template <class Gen>
  std::int64_t sample_jump(Gen& g) const {
    const auto i = static_cast<std::int64_t>(jump_alias_.sample(g));
    if (i < head_kmax_) return i + 1;
    // Tail k > N: weight k^{-1-alpha} W(k) <= B k^{1-alpha}; propose from the
    // discrete k^{1-alpha} law by ceil of a Pareto(alpha-2) draw.
    const double nt = static_cast<double>(head_kmax_);
    const double s = alpha_ - 2.0;
    for (;;) {
      const double y = nt * std::pow(uniform01_open_low(g), -1.0 / s);
      if (!(y < static_cast<double>(kMaxJump))) continue;
      const auto k = static_cast<std::int64_t>(std::ceil(y));
      if (k <= head_kmax_) continue;
      const double inv_k = 1.0 / static_cast<double>(k);
      const double acc1 = s * inv_k / std::expm1(-s * std::log1p(-inv_k));
      const double acc2 = w_of(k) * inv_k * inv_k / tail_bound_;
      if (uniform01(g) < acc1 * acc2) return k;
    }
  }

  // m in [0, k) with probability proportional to v(m).
  template <class Gen>
  std::int64_t sample_weak_level(std::int64_t k, Gen& g) const {
    const std::int64_t n_tab = table_size();
    const double top = k <= n_tab ? v_cum_[static_cast<std::size_t>(k - 1)]
                                  : v_cum_.back() + v_inf_ * static_cast<double>(k - n_tab);
    const double x = uniform01(g) * top;
    if (x < v_cum_.back()) {
      const auto it = std::upper_bound(v_cum_.begin(), v_cum_.end(), x);
      return std::min<std::int64_t>(it - v_cum_.begin(), k - 1);
    }
    const auto extra = static_cast<std::int64_t>((x - v_cum_.back()) / v_inf_);
    return std::min(n_tab + extra, k - 1);
  }

 public:
  /// Sum over k of P(xi = -k) W(k); equals the mean ladder height in exact arithmetic.
  double stationary_total() const { return stationary_total_; }

 private:
  StepDistribution dist_;
  bool bounded_ = true;
  double alpha_ = 0.0;
  double sigma2_ = 0.0;
  double zeta_z_ = 1.0;
  double tie_ = 0.0;
  double mu_ = 1.0;
  double mu_table_ = 1.0;
  double u_inf_ = 1.0;
  double u_max_ = 1.0;
  double v_inf_ = 1.0;
  std::vector<double> d_;
  std::vector<double> u_;
  std::vector<double> v_cum_;
  std::vector<double> w_;
  std::int64_t head_kmax_ = 0;
  long double a0_ = 0.0L, a1_ = 0.0L, a2_ = 0.0L;
  double tail_bound_ = 1.0;
  double stationary_total_ = 1.0;
  AliasTable jump_alias_;
};

}  // namespace dla1d
