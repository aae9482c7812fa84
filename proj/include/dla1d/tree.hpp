#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dla1d/aggregate.hpp"

namespace dla1d {

class TreeError : public std::logic_error {
 public:
  enum class Code { UnknownAttach, DuplicateVertex, TooManyColors, NotSeeded };
  TreeError(Code code, const std::string& what) : std::logic_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct TreeEdge {
  std::uint64_t particle;
  std::int64_t attach;
  std::int64_t glue;
};

/// Aggregation tree on A_n: one directed edge attach -> glue per particle.
/// Optionally carries colours for the competition model; a vertex added after
/// seeding takes the colour of the vertex it attached to.
class AggregationTree {
 public:
  AggregationTree() { add_vertex(0, std::nullopt, 0); }

  std::size_t vertex_count() const { return positions_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  bool has_vertex(std::int64_t x) const { return index_.count(x) != 0; }

  std::uint32_t degree(std::int64_t x) const {
    const auto it = index_.find(x);
    return it == index_.end() ? 0 : degree_[it->second];
  }
  std::uint32_t max_degree() const { return max_degree_; }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count(degree_.begin(), degree_.end(), 1u));
  }

  /// (position, degree) in increasing position order.
  std::vector<std::pair<std::int64_t, std::uint32_t>> degrees() const {
    std::vector<std::pair<std::int64_t, std::uint32_t>> out;
    out.reserve(positions_.size());
    for (std::size_t i = 0; i < positions_.size(); ++i) out.emplace_back(positions_[i], degree_[i]);
    std::sort(out.begin(), out.end());
    return out;
  }

  void add_particle_edge(const ParticleRecord& rec) {
    const auto it = index_.find(rec.attach);
    if (it == index_.end()) throw TreeError(TreeError::Code::UnknownAttach, "attach point is not a vertex");
    if (index_.count(rec.glue)) throw TreeError(TreeError::Code::DuplicateVertex, "glue point is already a vertex");
    const std::uint32_t parent = it->second;
    std::optional<std::uint32_t> col;
    if (seeded_) col = color_[parent];
    add_vertex(rec.glue, col, rec.index);
    ++degree_[parent];
    ++degree_.back();
    max_degree_ = std::max({max_degree_, degree_[parent], degree_.back()});
    edges_.push_back({rec.index, rec.attach, rec.glue});
  }

  /// Partition the current n0 + 1 vertices into m contiguous blocks by position.
  void seed_colors(std::uint64_t n0, std::uint32_t m) {
    if (vertex_count() != n0 + 1) throw std::invalid_argument("seed_colors: tree must have exactly n0 + 1 vertices");
    if (m == 0 || m > n0 + 1) throw TreeError(TreeError::Code::TooManyColors, "palette larger than vertex count");
    std::vector<std::uint32_t> order(positions_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return positions_[a] < positions_[b]; });
    const std::size_t v = order.size();
    for (std::size_t r = 0; r < v; ++r) color_[order[r]] = static_cast<std::uint32_t>(r * m / v);
    seeded_ = true;
    seed_time_ = n0;
    palette_ = m;
  }

  bool seeded() const { return seeded_; }
  std::uint64_t seed_time() const { return seed_time_; }
  std::uint32_t palette() const { return palette_; }

  std::optional<std::uint32_t> color(std::int64_t x) const {
    if (!seeded_) return std::nullopt;
    const auto it = index_.find(x);
    if (it == index_.end()) return std::nullopt;
    return color_[it->second];
  }

  /// Colours gaining at least one vertex from particles first..last (inclusive).
  std::size_t survivor_count(std::uint64_t first, std::uint64_t last) const {
    if (!seeded_ || first <= seed_time_) throw TreeError(TreeError::Code::NotSeeded, "window starts before colours were seeded");
    std::set<std::uint32_t> seen;
    for (std::size_t i = 0; i < positions_.size(); ++i)
      if (added_by_[i] >= first && added_by_[i] <= last) seen.insert(color_[i]);
    return seen.size();
  }

 private:
  void add_vertex(std::int64_t x, std::optional<std::uint32_t> col, std::uint64_t by) {
    index_.emplace(x, static_cast<std::uint32_t>(positions_.size()));
    positions_.push_back(x);
    degree_.push_back(0);
    color_.push_back(col.value_or(0));
    added_by_.push_back(by);
  }

  std::unordered_map<std::int64_t, std::uint32_t> index_;
  std::vector<std::int64_t> positions_;
  std::vector<std::uint32_t> degree_;
  std::vector<std::uint32_t> color_;
  std::vector<std::uint64_t> added_by_;
  std::vector<TreeEdge> edges_;
  std::uint32_t max_degree_ = 0;
  bool seeded_ = false;
  std::uint64_t seed_time_ = 0;
  std::uint32_t palette_ = 0;
};

}  // namespace dla1d
