#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <set>

#include "dla1d/aggregate.hpp"
#include "dla1d/oracle.hpp"
#include "dla1d/tree.hpp"

using namespace dla1d;

namespace {
ParticleRecord edge(std::uint64_t i, std::int64_t attach, std::int64_t glue) {
  ParticleRecord r;
  r.index = i;
  r.attach = attach;
  r.glue = glue;
  return r;
}

AggregationTree grown(const StepDistribution& d, std::uint64_t seed, std::uint64_t n, std::uint64_t n0 = 0,
                      std::uint32_t m = 0) {
  auto p = new_process(d, seed);
  AggregationTree t;
  GrowHooks h;
  h.on_record = [&](const ParticleRecord& r, const Hull&) {
    t.add_particle_edge(r);
    if (m && r.index == n0) t.seed_colors(n0, m);
  };
  grow(p, n, h);
  return t;
}
}  // namespace

TEST(Tree, FirstEdge) {
  AggregationTree t;
  t.add_particle_edge(edge(1, 0, 1));
  EXPECT_EQ(t.degree(0), 1u);
  EXPECT_EQ(t.degree(1), 1u);
  EXPECT_EQ(t.vertex_count(), 2u);
  EXPECT_EQ(t.edge_count(), 1u);
}

TEST(Tree, Errors) {
  AggregationTree t;
  try {
    t.add_particle_edge(edge(1, 5, 6));
    FAIL();
  } catch (const TreeError& e) {
    EXPECT_EQ(e.code(), TreeError::Code::UnknownAttach);
  }
  t.add_particle_edge(edge(1, 0, 1));
  try {
    t.add_particle_edge(edge(2, 0, 1));
    FAIL();
  } catch (const TreeError& e) {
    EXPECT_EQ(e.code(), TreeError::Code::DuplicateVertex);
  }
  try {
    t.seed_colors(1, 3);
    FAIL();
  } catch (const TreeError& e) {
    EXPECT_EQ(e.code(), TreeError::Code::TooManyColors);
  }
  try {
    t.survivor_count(2, 5);
    FAIL();
  } catch (const TreeError& e) {
    EXPECT_EQ(e.code(), TreeError::Code::NotSeeded);
  }
}

TEST(Tree, SimpleWalkGivesAPath) {
  const auto t = grown(make_simple(), 3, 1000);
  EXPECT_LE(t.max_degree(), 2u);
  EXPECT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.vertex_count(), 1001u);
}

TEST(Tree, OwnColourPerVertex) {
  auto t = grown(make_zeta(3.5), 4, 50);
  t.seed_colors(50, 51);
  std::set<std::uint32_t> cols;
  for (const auto& [x, d] : t.degrees()) cols.insert(*t.color(x));
  EXPECT_EQ(cols.size(), 51u);
}

TEST(Tree, SimpleCompetitionOnlyExtremesGrow) {
  const auto t = grown(make_simple(), 5, 2000, 100, 3);
  ASSERT_TRUE(t.seeded());
  EXPECT_EQ(t.survivor_count(101, 2000), 2u);
  EXPECT_EQ(t.survivor_count(1500, 2000), 2u);
  EXPECT_THROW(t.survivor_count(50, 2000), TreeError);
  std::set<std::uint32_t> late;
  for (const auto& e : t.edges())
    if (e.particle > 100) late.insert(*t.color(e.glue));
  EXPECT_EQ(late, (std::set<std::uint32_t>{0, 2}));
}

TEST(Tree, ColoursInheritFromParents) {
  const auto t = grown(make_zeta(3.5), 6, 3000, 100, 3);
  for (const auto& e : t.edges())
    if (e.particle > 100) ASSERT_EQ(t.color(e.glue), t.color(e.attach));
}

TEST(Tree, IsATreeWithDegreeSum) {
  for (double a : {2.5, 3.5}) {
    const auto t = grown(make_zeta(a), 7, 3000);
    EXPECT_EQ(t.edge_count() + 1, t.vertex_count());
    std::uint64_t sum = 0;
    for (const auto& [x, d] : t.degrees()) sum += d;
    EXPECT_EQ(sum, 2 * t.edge_count());
    std::map<std::int64_t, std::vector<std::int64_t>> adj;
    for (const auto& e : t.edges()) {
      adj[e.attach].push_back(e.glue);
      adj[e.glue].push_back(e.attach);
    }
    std::set<std::int64_t> seen{0};
    std::queue<std::int64_t> q;
    q.push(0);
    while (!q.empty()) {
      const auto x = q.front();
      q.pop();
      for (auto y : adj[x])
        if (seen.insert(y).second) q.push(y);
    }
    EXPECT_EQ(seen.size(), t.vertex_count());
  }
}

TEST(Tree, AttachmentMatchesOracleHarmonicMeasure) {
  // Frozen aggregate: walker launches against the independent oracle loop.
  const auto d = make_zeta(3.5);
  const oracle::PointSet a{0, 1, 3, 4, 8};
  OccupancySet occ{0, 1, 3, 4, 8};
  auto g = make_rng(8);
  const std::uint64_t n = 200000;
  std::map<std::int64_t, double> walker;
  for (std::uint64_t i = 0; i < n; ++i) walker[launch_from_infinity(occ, Side::plus_inf, d, LaunchPolicy{}, g).attach] += 1;
  auto g2 = make_rng(9);
  const auto h = oracle::mc_hit_distribution(a, Side::plus_inf, d, n, g2);
  for (auto x : a) {
    const auto o = h.attach_probability(x);
    const double w = walker[x] / n;
    const double se = std::sqrt(o.stderr_ * o.stderr_ + w * (1 - w) / n);
    EXPECT_NEAR(w, o.value, 3 * se + 1e-12) << x;
  }
}
