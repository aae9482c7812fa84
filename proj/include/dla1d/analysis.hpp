#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dla1d/aggregate.hpp"
#include "dla1d/numerics.hpp"
#include "dla1d/occupancy.hpp"
#include "dla1d/rng.hpp"

namespace dla1d {

class AnalysisError : public std::invalid_argument {
 public:
  enum class Code { NonPositiveValue, WindowTooSmall, InvalidInterval, EmptySamples };
  AnalysisError(Code code, const std::string& what) : std::invalid_argument(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

using Series = std::vector<std::pair<double, double>>;

struct SeriesFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
  double r2 = 1.0;
  double residual_max = 0.0;
  std::size_t points = 0;
  double x_lo = 0.0;
  double x_hi = 0.0;

  nlohmann::json to_json() const {
    return {{"slope", slope},   {"intercept", intercept}, {"stderr", stderr_}, {"r2", r2},
            {"residual_max", residual_max}, {"points", points}, {"window", {x_lo, x_hi}}};
  }
};

/// OLS of log(value) on log(n) over points with n in [x_lo, x_hi].
inline SeriesFit fit_loglog_slope(const Series& series, double x_lo, double x_hi) {
  std::vector<double> xs, ys;
  for (const auto& [x, y] : series) {
    if (x < x_lo || x > x_hi) continue;
    if (!(x > 0.0) || !(y > 0.0)) throw AnalysisError(AnalysisError::Code::NonPositiveValue, "log-log fit needs positive values");
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
  }
  if (xs.size() < 8) throw AnalysisError(AnalysisError::Code::WindowTooSmall, "fit window has fewer than 8 points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw AnalysisError(AnalysisError::Code::WindowTooSmall, "fit window has no spread in n");
  SeriesFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    sse += r * r;
    f.residual_max = std::max(f.residual_max, std::fabs(r));
  }
  // Exact power laws leave only rounding in the residuals.
  if (sse <= 1e-24 * std::max(1.0, syy)) sse = 0.0;
  f.stderr_ = std::sqrt(sse / (n - 2.0) / sxx);
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.points = xs.size();
  f.x_lo = std::exp(xs.front());
  f.x_hi = std::exp(xs.back());
  return f;
}

/// Default window: the top two decades of the abscissa.
inline SeriesFit fit_loglog_slope(const Series& series) {
  if (series.empty()) throw AnalysisError(AnalysisError::Code::WindowTooSmall, "empty series");
  double xmax = 0.0;
  for (const auto& p : series) xmax = std::max(xmax, p.first);
  return fit_loglog_slope(series, xmax / 100.0, xmax);
}

/// |A ∩ [-r, r]| for each radius.
inline std::vector<std::uint64_t> occupancy_profile(const OccupancySet& a, const std::vector<std::int64_t>& radii) {
  std::vector<std::uint64_t> out;
  out.reserve(radii.size());
  for (auto r : radii) out.push_back(a.count_in(-r, r));
  return out;
}

/// (n, n / D_n) for checkpoints with D_n > 0.
inline Series density_series(const std::vector<Checkpoint>& cps) {
  Series out;
  for (const auto& c : cps)
    if (c.diameter > 0) out.emplace_back(static_cast<double>(c.n), static_cast<double>(c.n) / static_cast<double>(c.diameter));
  return out;
}

namespace detail {
// b_next < b^{1+eps}, evaluated in logs to avoid overflow.
inline bool dense_gap(double b, double b_next, double eps) {
  return std::log(b_next) < (1.0 + eps) * std::log(b);
}
}  // namespace detail

/// Whether a finite set of positive (or of negative, by mirroring) integers
/// has every consecutive ratio gap b_{i+1} < b_i^{1+eps}.
inline bool is_eps_dense(std::vector<std::int64_t> b, double eps) {
  if (!(eps > 0.0)) throw AnalysisError(AnalysisError::Code::InvalidInterval, "eps must be positive");
  if (b.size() <= 1) return true;
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (b.back() < 0) {
    for (auto& x : b) x = -x;
    std::sort(b.begin(), b.end());
  }
  if (b.front() < 1) throw AnalysisError(AnalysisError::Code::InvalidInterval, "set must lie in [1, inf) or (-inf, -1]");
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (!detail::dense_gap(static_cast<double>(b[i]), static_cast<double>(b[i + 1]), eps)) return false;
  return true;
}

/// Whether {n, m} ∪ (B ∩ [n, m]) is eps-dense.
inline bool is_eps_dense(const std::vector<std::int64_t>& b, double eps, std::int64_t n, std::int64_t m) {
  if (n < 1 || m < n) throw AnalysisError(AnalysisError::Code::InvalidInterval, "need 1 <= n <= m");
  std::vector<std::int64_t> s = {n, m};
  for (auto x : b)
    if (x >= n && x <= m) s.push_back(x);
  return is_eps_dense(std::move(s), eps);
}

/// (t, fraction of samples > t) at every distinct sample value t.
inline Series empirical_survival(std::vector<std::int64_t> samples) {
  if (samples.empty()) throw AnalysisError(AnalysisError::Code::EmptySamples, "no samples");
  std::sort(samples.begin(), samples.end());
  Series out;
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    out.emplace_back(static_cast<double>(samples[i]), static_cast<double>(samples.size() - j) / n);
    i = j;
  }
  return out;
}

/// Survival fraction P(X > t) for a sorted sample.
inline double survival_at(const std::vector<std::int64_t>& sorted, std::int64_t t) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

/// Log-log slope of the empirical survival over t in [lo, hi] on a geometric
/// grid of `points` abscissae. Grid points with zero survival are dropped.
inline SeriesFit survival_slope(std::vector<std::int64_t> samples, double lo, double hi, int points = 16) {
  std::sort(samples.begin(), samples.end());
  Series s;
  for (int i = 0; i < points; ++i) {
    const auto t = static_cast<std::int64_t>(std::floor(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)) + 1e-9));
    if (!s.empty() && s.back().first == static_cast<double>(t)) continue;
    const double v = survival_at(samples, t);
    if (v > 0.0) s.emplace_back(static_cast<double>(t), v);
  }
  return fit_loglog_slope(s, lo, hi);
}

/// Two-sample total-variation distance on ordered bins.
///
/// Adjacent values (in pooled sort order) are merged until each bin holds at
/// least `min_bin_mass` of the pooled sample, which bounds the null bias of the
/// plug-in estimate. `sigma` is the spread of the statistic when both samples
/// are redrawn from the pooled law (parametric bootstrap).
struct TvEstimate {
  double tv = 0.0;
  double sigma = 0.0;
  double null_mean = 0.0;
  std::size_t bins = 0;
};

inline TvEstimate total_variation(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                  double min_bin_mass = 0.02, int bootstrap = 64, std::uint64_t seed = 1) {
  if (a.empty() || b.empty()) throw AnalysisError(AnalysisError::Code::EmptySamples, "no samples");
  std::map<std::int64_t, std::pair<double, double>> h;
  for (auto x : a) h[x].first += 1.0;
  for (auto x : b) h[x].second += 1.0;
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> cur{0.0, 0.0};
  for (const auto& [k, c] : h) {
    cur.first += c.first;
    cur.second += c.second;
    if ((cur.first + cur.second) / (na + nb) >= min_bin_mass) {
      bins.push_back(cur);
      cur = {0.0, 0.0};
    }
  }
  if (cur.first + cur.second > 0.0) {
    if (bins.empty()) bins.push_back(cur);
    else {
      bins.back().first += cur.first;
      bins.back().second += cur.second;
    }
  }
  auto tv_of = [&](const std::vector<std::pair<double, double>>& bs) {
    double t = 0.0;
    for (const auto& [ca, cb] : bs) t += std::fabs(ca / na - cb / nb);
    return 0.5 * t;
  };
  TvEstimate out;
  out.tv = tv_of(bins);
  out.bins = bins.size();
  std::vector<double> pooled;
  for (const auto& [ca, cb] : bins) pooled.push_back((ca + cb) / (na + nb));
  Rng g(seed);
  RunningStats st;
  for (int r = 0; r < bootstrap; ++r) {
    // Multinomial draws by sequential binomials.
    std::vector<std::pair<double, double>> sim(bins.size());
    double left_a = na, left_b = nb, rest = 1.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double p = i + 1 == bins.size() ? 1.0 : std::clamp(pooled[i] / rest, 0.0, 1.0);
      std::binomial_distribution<std::int64_t> da(static_cast<std::int64_t>(left_a), p), db(static_cast<std::int64_t>(left_b), p);
      const auto xa = static_cast<double>(da(g));
      const auto xb = static_cast<double>(db(g));
      sim[i] = {xa, xb};
      left_a -= xa;
      left_b -= xb;
      rest -= pooled[i];
    }
    st.add(tv_of(sim));
  }
  out.sigma = st.stddev();
  out.null_mean = st.mean();
  return out;
}

/// Runtime eps-density audit of A_m against [max A_n, max A_m] (and the
/// mirrored left side) over checkpoint pairs n < m.
class EpsDensityAudit {
 public:
  explicit EpsDensityAudit(double eps = 0.3) : eps_(eps) {}

  /// Call at each checkpoint with the current aggregate.
  void record(std::uint64_t n, const OccupancySet& a) {
    Entry e;
    e.n = n;
    e.max = a.max();
    e.min = a.min();
    const auto pts = a.sorted();
    e.bad_right = 0;
    e.bad_left = 0;
    // Largest left endpoint of a non-dense consecutive gap among points >= 1 (and <= -1 mirrored).
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i] >= 1 && !detail::dense_gap(static_cast<double>(pts[i]), static_cast<double>(pts[i + 1]), eps_))
        e.bad_right = std::max(e.bad_right, pts[i]);
      if (pts[i + 1] <= -1 &&
          !detail::dense_gap(static_cast<double>(-pts[i + 1]), static_cast<double>(-pts[i]), eps_))
        e.bad_left = std::max(e.bad_left, -pts[i + 1]);
    }
    entries_.push_back(e);
  }

  struct Result {
    std::uint64_t n0 = 0;         // every pair with n > n0 passes
    std::uint64_t pairs = 0;      // pairs checked
    std::uint64_t failures = 0;   // failing pairs (all have n <= n0)
  };

  Result result() const {
    Result r;
    for (std::size_t j = 0; j < entries_.size(); ++j)
      for (std::size_t i = 0; i < j; ++i) {
        const auto& en = entries_[i];
        const auto& em = entries_[j];
        bool ok = true;
        if (en.max >= 1) {
          ++r.pairs;
          ok = ok && en.max > em.bad_right;
        }
        if (en.min <= -1) {
          ++r.pairs;
          ok = ok && -en.min > em.bad_left;
        }
        if (!ok) {
          ++r.failures;
          r.n0 = std::max(r.n0, en.n);
        }
      }
    return r;
  }

  double eps() const { return eps_; }

 private:
  struct Entry {
    std::uint64_t n;
    std::int64_t max, min;
    std::int64_t bad_right, bad_left;
  };
  double eps_;
  std::vector<Entry> entries_;
};

/// Minimal log-log SVG plot of one or more series.
inline std::string loglog_svg(const std::vector<std::pair<std::string, Series>>& curves, const std::string& title) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = 0, y0 = x0, y1 = 0;
  for (const auto& [name, s] : curves)
    for (const auto& [x, y] : s)
      if (x > 0 && y > 0) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  const double w = 640, h = 420, m = 50;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  if (!(x1 > x0) || !(y1 > y0)) return o.str() + "</svg>\n";
  auto px = [&](double x) { return m + (std::log(x) - std::log(x0)) / (std::log(x1) - std::log(x0)) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (std::log(y) - std::log(y0)) / (std::log(y1) - std::log(y0)) * (h - 2 * m); };
  o << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\"" << h - 2 * m
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  int ci = 0;
  for (const auto& [name, s] : curves) {
    o << "<polyline fill=\"none\" stroke=\"" << colors[ci % 5] << "\" points=\"";
    for (const auto& [x, y] : s)
      if (x > 0 && y > 0) o << px(x) << "," << py(y) << " ";
    o << "\"/>\n";
    o << "<text x=\"" << w - m - 150 << "\" y=\"" << m + 16 * (ci + 1) << "\" fill=\"" << colors[ci % 5]
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
    ++ci;
  }
  o << "<text x=\"" << m << "\" y=\"" << h - 15 << "\" font-family=\"sans-serif\" font-size=\"11\">x: " << x0 << " .. "
    << x1 << " (log)   y: " << y0 << " .. " << y1 << " (log)</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace dla1d
