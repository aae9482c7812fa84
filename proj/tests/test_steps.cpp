#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dla1d/steps.hpp"
#include "support.hpp"

using namespace dla1d;
using testing_support::binomial_sigma;
using testing_support::chi_square_pvalue;

// Reference values computed to 18 digits with mpmath.
constexpr double kZeta35 = 1.12673386731705664;
constexpr double kZeta45 = 1.05470751076145426;
constexpr double kZeta15 = 2.61237534868548834;
constexpr double kP1Zeta25 = 0.443760513909628297;
constexpr double kSurvival10Zeta25 = 0.000495229135322953;

TEST(Numerics, RiemannZetaMatchesReference) {
  EXPECT_NEAR(riemann_zeta(3.5) / kZeta35, 1.0, 1e-10);
  EXPECT_NEAR(riemann_zeta(4.5) / kZeta45, 1.0, 1e-10);
  EXPECT_NEAR(riemann_zeta(1.5) / kZeta15, 1.0, 1e-10);
}

TEST(Numerics, HurwitzZetaMatchesReference) {
  EXPECT_NEAR(hurwitz_zeta(2.5, 0.7) / 2.90286757775734663, 1.0, 1e-12);
  EXPECT_NEAR(hurwitz_zeta(1.2, 3.0) / 4.15630715952968980, 1.0, 1e-12);
  EXPECT_THROW(hurwitz_zeta(1.0, 1.0), std::domain_error);
}

TEST(Steps, ZetaPmfAtOne) {
  const auto d = make_zeta(2.5);
  EXPECT_NEAR(d.pmf(1), kP1Zeta25, 1e-12);
  EXPECT_NEAR(d.pmf(1), 1.0 / (2.0 * kZeta35), 1e-12);
}

TEST(Steps, ZetaSymmetricAndNormalized) {
  for (double a : {2.5, 3.5, 1.5, 0.8}) {
    const auto d = make_zeta(a);
    for (std::int64_t k = 1; k <= d.cutoff(); ++k) ASSERT_EQ(d.pmf(k), d.pmf(-k));
    EXPECT_NEAR(d.total_mass(), 1.0, 1e-9) << "alpha " << a;
    EXPECT_EQ(d.pmf(0), 0.0);
  }
}

TEST(Steps, ZetaPmfPointwise) {
  for (double a : {2.5, 3.5}) {
    const auto d = make_zeta(a);
    const double z = a == 2.5 ? kZeta35 : kZeta45;
    for (std::int64_t k = 1; k <= d.cutoff(); ++k) {
      const double want = std::pow(static_cast<double>(k), -1.0 - a) / z;
      ASSERT_NEAR(d.magnitude_pmf(k) / want, 1.0, 1e-10) << k;
      ASSERT_NEAR(d.magnitude_pmf(k), want, 1e-12) << k;
    }
  }
}

TEST(Steps, ZetaSurvivalReference) {
  const auto d = make_zeta(2.5);
  EXPECT_NEAR(d.survival(10) / kSurvival10Zeta25, 1.0, 1e-9);
  // Independent: direct summation far beyond the cutoff plus the integral tail.
  long double s = 0.0L;
  for (std::int64_t k = 2'000'000; k > 10; --k) s += std::pow(static_cast<long double>(k), -3.5L);
  s += std::pow(2'000'000.5L, -2.5L) / 2.5L;
  EXPECT_NEAR(d.survival(10) / static_cast<double>(s / (2.0L * kZeta35)), 1.0, 1e-9);
}

TEST(Steps, SurvivalMonotoneAndHalfAtZero) {
  for (const auto& d : {make_zeta(2.5), make_zeta(3.5), make_simple(),
                        make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}})}) {
    EXPECT_NEAR(d.survival(0), 0.5, 1e-12);
    double prev = d.survival(0);
    for (std::int64_t t = 1; t < 20000; t += (t < 100 ? 1 : 97)) {
      const double s = d.survival(t);
      ASSERT_LE(s, prev + 1e-18) << t;
      prev = s;
    }
  }
}

TEST(Steps, ExactSurvivalSlope) {
  const auto d = make_zeta(2.5);
  const double slope = (std::log(d.magnitude_survival(10000)) - std::log(d.magnitude_survival(10))) / std::log(1000.0);
  EXPECT_NEAR(slope, -2.5, 0.15);
}

TEST(Steps, ZetaRejectsBadParameters) {
  EXPECT_THROW(make_zeta(0.0), StepError);
  EXPECT_THROW(make_zeta(-1.0), StepError);
  EXPECT_THROW(make_zeta(2.5, 999), StepError);
  try {
    make_zeta(0.0);
  } catch (const StepError& e) {
    EXPECT_EQ(e.code(), StepError::Code::InvalidAlpha);
  }
}

TEST(Steps, SimpleLaw) {
  const auto d = make_simple();
  EXPECT_EQ(d.pmf(1), 0.5);
  EXPECT_EQ(d.pmf(-1), 0.5);
  EXPECT_EQ(d.pmf(3), 0.0);
  EXPECT_EQ(d.variance().value(), 1.0);
  EXPECT_EQ(d.survival(0), 0.5);
  EXPECT_EQ(d.survival(1), 0.0);
  EXPECT_TRUE(d.periodic());
}

TEST(Steps, TableLaw) {
  const auto d = make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}});
  EXPECT_NEAR(d.variance().value(), 2.5, 1e-15);
  EXPECT_FALSE(d.periodic());
  try {
    make_table({{1, 0.5}, {-1, 0.25}, {-2, 0.25}});
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.code(), StepError::Code::AsymmetricPmf);
  }
  try {
    make_table({{-2, 0.3}, {-1, 0.3}, {1, 0.3}, {2, 0.3}});
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.code(), StepError::Code::NotNormalized);
  }
  const auto odd = make_table({{-3, 0.25}, {-1, 0.25}, {1, 0.25}, {3, 0.25}});
  EXPECT_TRUE(odd.periodic());
  ASSERT_FALSE(odd.warnings().empty());
  EXPECT_EQ(odd.warnings().front().rfind("ZeroOnOddSupport", 0), 0u);
}

TEST(Steps, JsonRoundTrip) {
  for (const auto& d : {make_zeta(2.5, 2048), make_simple(), make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}})}) {
    const auto back = StepDistribution::from_json(d.to_json());
    EXPECT_EQ(back.key(), d.key());
    EXPECT_EQ(back.pmf(1), d.pmf(1));
  }
  EXPECT_EQ(make_zeta(2.5).to_json()["cutoff"], 4096);
}

TEST(Steps, SimpleSamplerFrequencies) {
  const auto d = make_simple();
  auto g = make_rng(11);
  std::int64_t plus = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto k = d.sample(g);
    ASSERT_TRUE(k == 1 || k == -1);
    plus += k == 1;
  }
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, 3 * binomial_sigma(0.5, n));
}

TEST(Steps, ZetaSamplerFrequencyOfOne) {
  const auto d = make_zeta(2.5);
  auto g = make_rng(12);
  std::int64_t ones = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) ones += d.sample(g) == 1;
  EXPECT_NEAR(static_cast<double>(ones) / n, kP1Zeta25, 3 * binomial_sigma(kP1Zeta25, n));
}

namespace {
void chi_square_head(const StepDistribution& d, std::uint64_t seed) {
  auto g = make_rng(seed);
  const std::int64_t span = std::min<std::int64_t>(d.cutoff(), 400);
  std::vector<double> obs(2 * span + 2, 0.0), probs(2 * span + 2, 0.0);
  for (std::int64_t k = 1; k <= span; ++k) {
    probs[span - k] = d.pmf(-k);
    probs[span + k - 1] = d.pmf(k);
  }
  probs[2 * span] = d.survival(span);
  probs[2 * span + 1] = d.survival(span);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto k = d.sample(g);
    ASSERT_NE(k, 0);
    if (k > span) ++obs[2 * span];
    else if (k < -span) ++obs[2 * span + 1];
    else if (k < 0) ++obs[span + k];
    else ++obs[span + k - 1];
  }
  EXPECT_GT(chi_square_pvalue(obs, probs, n), 0.001) << d.key();
}
}  // namespace

TEST(Steps, ChiSquareSimple) { chi_square_head(make_simple(), 21); }
TEST(Steps, ChiSquarePm12) { chi_square_head(make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}}), 22); }
TEST(Steps, ChiSquareZeta25) { chi_square_head(make_zeta(2.5), 23); }
TEST(Steps, ChiSquareZeta35) { chi_square_head(make_zeta(3.5), 24); }

TEST(Steps, TailSamplerMatchesExactConditionalLaw) {
  const auto d = make_zeta(2.5, 1000);
  auto g = make_rng(31);
  const int n = 400'000;
  const std::vector<std::int64_t> ts = {1000, 1001, 1002, 1005, 1010, 1100, 2000, 4000, 16000, 100000};
  std::vector<double> obs(ts.size(), 0.0), probs(ts.size(), 0.0);
  const double tail = d.magnitude_survival(1000);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double hi = i + 1 < ts.size() ? d.magnitude_survival(ts[i + 1]) : 0.0;
    probs[i] = (d.magnitude_survival(ts[i]) - hi) / tail;
  }
  for (int i = 0; i < n; ++i) {
    const auto k = d.sample_tail(g);
    ASSERT_GT(k, 1000);
    const auto it = std::upper_bound(ts.begin(), ts.end(), k - 1);
    ++obs[static_cast<std::size_t>(it - ts.begin()) - 1];
  }
  EXPECT_GT(chi_square_pvalue(obs, probs, n), 0.001);
}

TEST(Steps, EmpiricalSurvivalSlope) {
  // Exceedance counts on a geometric grid, enough draws to see |xi| > 300.
  const auto d = make_zeta(2.5);
  auto g = make_rng(41);
  std::vector<std::int64_t> ts;
  for (int i = 0; i < 12; ++i) ts.push_back(static_cast<std::int64_t>(10 * std::pow(30.0, i / 11.0)));
  std::vector<double> above(ts.size(), 0.0);
  const long n = 20'000'000;
  for (long i = 0; i < n; ++i) {
    const auto k = d.sample_magnitude(g);
    for (std::size_t j = 0; j < ts.size() && k > ts[j]; ++j) ++above[j];
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double x = std::log(static_cast<double>(ts[j])), y = std::log(above[j] / n);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = static_cast<double>(ts.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_NEAR(slope, -2.5, 0.15);
}

TEST(Steps, Determinism) {
  const auto d = make_zeta(2.5);
  auto g1 = make_rng(5), g2 = make_rng(5);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(d.sample(g1), d.sample(g2));
}
