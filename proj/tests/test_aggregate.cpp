#include <gtest/gtest.h>

#include <map>

#include "dla1d/aggregate.hpp"
#include "dla1d/oracle.hpp"
#include "support.hpp"

using namespace dla1d;
using testing_support::binomial_sigma;

namespace {
StepDistribution pm12() { return make_table({{-2, 0.25}, {-1, 0.25}, {1, 0.25}, {2, 0.25}}); }
}  // namespace

TEST(Aggregate, NewProcessStartsAtOrigin) {
  auto p = new_process(make_zeta(2.5), 42);
  EXPECT_EQ(p.occupancy().size(), 1u);
  EXPECT_TRUE(p.occupancy().contains(0));
  EXPECT_EQ(p.particles(), 0u);
}

TEST(Aggregate, SameSeedSameTrajectory) {
  auto a = new_process(make_zeta(2.5), 42), b = new_process(make_zeta(2.5), 42);
  grow(a, 2000);
  grow(b, 2000);
  ASSERT_EQ(a.records().size(), b.records().size());
  for (std::size_t i = 0; i < a.records().size(); ++i) {
    const auto &x = a.records()[i], &y = b.records()[i];
    ASSERT_EQ(x.glue, y.glue);
    ASSERT_EQ(x.attach, y.attach);
    ASSERT_EQ(x.side, y.side);
    ASSERT_EQ(x.path_min, y.path_min);
    ASSERT_EQ(x.steps, y.steps);
  }
}

TEST(Aggregate, FirstSideIsFairCoin) {
  const auto d = make_simple();
  const int n = 10000;
  int plus = 0;
  for (int s = 0; s < n; ++s) {
    auto p = new_process(d, static_cast<std::uint64_t>(s));
    plus += p.step().side == Side::plus_inf;
  }
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, 3 * binomial_sigma(0.5, n));
}

TEST(Aggregate, SimpleFirstParticle) {
  auto p = new_process(make_simple(), 3);
  const auto r = p.step();
  EXPECT_EQ(r.index, 1u);
  EXPECT_EQ(r.attach, 0);
  EXPECT_EQ(r.glue, r.side == Side::plus_inf ? 1 : -1);
  EXPECT_EQ(r.J, 0u);
}

TEST(Aggregate, SimpleWalkGrowsAnInterval) {
  auto p = new_process(make_simple(), 9);
  const auto cps = grow(p, 10000);
  const auto& occ = p.occupancy();
  EXPECT_EQ(occ.size(), 10001u);
  EXPECT_EQ(occ.max() - occ.min(), 10000);
  EXPECT_LE(occ.min(), 0);
  EXPECT_GE(occ.max(), 0);
  for (const auto& c : cps) EXPECT_EQ(c.diameter, static_cast<std::int64_t>(c.n));
  for (const auto& r : p.records()) ASSERT_EQ(r.J, 0u);
}

TEST(Aggregate, Pm12FirstParticleSymmetricAndMatchesExactSolve) {
  const auto d = pm12();
  const int n = 100000;
  std::map<std::int64_t, double> c;
  for (int s = 0; s < n; ++s) {
    auto p = new_process(d, static_cast<std::uint64_t>(s) + 1'000'000);
    c[p.step().glue] += 1;
  }
  for (std::int64_t k : {1, 2}) {
    const double a = c[k] / n, b = c[-k] / n, pm = (a + b) / 2;
    EXPECT_NEAR(a, b, 3 * std::sqrt(2 * pm * (1 - pm) / n)) << k;
  }
  // From +inf the glue law on {1, 2} equals the exact absorbing-chain solution.
  const auto ex = oracle::exact_hit_distribution({0}, LaunchPolicy{}.offset(0), d);
  const double p1 = (ex.glue.count(1) ? ex.glue.at(1) : 0.0) + (ex.glue.count(-1) ? ex.glue.at(-1) : 0.0);
  EXPECT_NEAR((c[1] + c[-1]) / n, p1, 3 * binomial_sigma(p1, n));
}

TEST(Aggregate, PenetrationExamples) {
  const OccupancySet a{0, 5, 9};
  HitResult r;
  r.path_min = 7;
  EXPECT_EQ(penetration(a, r, Side::plus_inf), 1u);
  r.path_min = 10;
  EXPECT_EQ(penetration(a, r, Side::plus_inf), 0u);
  r.path_max = 6;
  EXPECT_EQ(penetration(a, r, Side::minus_inf), 2u);
}

TEST(Aggregate, CheckpointGrid) {
  const auto g = checkpoint_grid(100000);
  EXPECT_GE(g.size(), 40u);
  EXPECT_EQ(g.front(), 1u);
  EXPECT_EQ(g.back(), 100000u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
}

TEST(Aggregate, Errors) {
  try {
    Process p(make_zeta(0.9), 1);
    FAIL();
  } catch (const AggregateError& e) {
    EXPECT_EQ(e.code(), AggregateError::Code::InvalidDistribution);
  }
  EXPECT_THROW(Process(make_zeta(1.5), 1), AggregateError);
  LaunchPolicy raw;
  raw.mode = WalkMode::raw;
  EXPECT_NO_THROW(Process(make_zeta(1.5), 1, raw));
  auto p = new_process(make_simple(), 1);
  try {
    grow(p, 0);
    FAIL();
  } catch (const AggregateError& e) {
    EXPECT_EQ(e.code(), AggregateError::Code::InvalidCount);
  }
}

TEST(Aggregate, InvariantsAlongARun) {
  for (double a : {2.5, 3.5}) {
    auto p = new_process(make_zeta(a), 77);
    OccupancySet shadow{0};
    GrowHooks hooks;
    hooks.on_record = [&](const ParticleRecord& r, const Hull& before) {
      ASSERT_FALSE(shadow.contains(r.glue));
      ASSERT_TRUE(shadow.contains(r.attach));
      ASSERT_EQ(before.min, shadow.min());
      ASSERT_EQ(before.max, shadow.max());
      ASSERT_LE(r.J, r.index);
      HitResult h;
      h.path_min = r.path_min;
      h.path_max = r.path_max;
      ASSERT_EQ(r.J, penetration(shadow, h, r.side));
      shadow.insert(r.glue);
      ASSERT_EQ(shadow.size(), r.index + 1);
    };
    grow(p, 3000, hooks);
    EXPECT_EQ(p.occupancy().size(), 3001u);
  }
}
