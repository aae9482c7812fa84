#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dla1d {

/// Set of integers stored as a bitset over a growable window, with a Fenwick
/// tree of per-word popcounts for rank queries.
///
/// contains() is a single word load; insert() and count_less() are O(log W)
/// where W is the window length in 64-bit words. The window grows by at least
/// doubling on either side, so inserts are amortized O(log W) as well.
class OccupancySet {
 public:
  static constexpr std::int64_t kMaxWindowBits = std::int64_t{1} << 36;

  OccupancySet() = default;
  explicit OccupancySet(std::initializer_list<std::int64_t> xs) {
    for (auto x : xs) insert(x);
  }

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }
  std::int64_t min() const { return min_; }
  std::int64_t max() const { return max_; }

  bool contains(std::int64_t x) const {
    const std::uint64_t off = static_cast<std::uint64_t>(x - base_);
    if (off >= bits()) return false;
    return (words_[off >> 6] >> (off & 63)) & 1u;
  }

  /// Returns false if x was already present.
  bool insert(std::int64_t x) {
    ensure(x);
    const auto off = static_cast<std::uint64_t>(x - base_);
    std::uint64_t& w = words_[off >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (off & 63);
    if (w & bit) return false;
    w |= bit;
    fenwick_add(off >> 6);
    if (size_ == 0) {
      min_ = max_ = x;
    } else {
      min_ = std::min(min_, x);
      max_ = std::max(max_, x);
    }
    ++size_;
    return true;
  }

  /// Number of elements strictly less than x.
  std::size_t count_less(std::int64_t x) const {
    if (size_ == 0 || x <= min_) return 0;
    if (x > max_) return size_;
    const auto off = static_cast<std::uint64_t>(x - base_);
    const std::size_t wi = off >> 6;
    std::size_t r = fenwick_prefix(wi);
    const unsigned b = off & 63;
    if (b) r += static_cast<std::size_t>(std::popcount(words_[wi] & ((std::uint64_t{1} << b) - 1)));
    return r;
  }

  /// Number of elements in [a, b].
  std::size_t count_in(std::int64_t a, std::int64_t b) const {
    if (b < a) return 0;
    return count_less(b + 1) - count_less(a);
  }

  /// Largest element < x, or INT64_MIN if none.
  std::int64_t prev_below(std::int64_t x) const {
    if (size_ == 0 || x <= min_) return std::numeric_limits<std::int64_t>::min();
    if (x > max_) return max_;
    const auto off = static_cast<std::uint64_t>(x - base_);
    std::size_t wi = off >> 6;
    std::uint64_t w = words_[wi] & ((std::uint64_t{1} << (off & 63)) - 1);
    while (w == 0) w = words_[--wi];
    return base_ + static_cast<std::int64_t>(wi * 64 + 63 - std::countl_zero(w));
  }

  /// Smallest element > x, or INT64_MAX if none.
  std::int64_t next_above(std::int64_t x) const {
    if (size_ == 0 || x >= max_) return std::numeric_limits<std::int64_t>::max();
    if (x < min_) return min_;
    const auto off = static_cast<std::uint64_t>(x - base_) + 1;
    std::size_t wi = off >> 6;
    std::uint64_t w = (off & 63) ? words_[wi] & ~((std::uint64_t{1} << (off & 63)) - 1) : words_[wi];
    while (w == 0) w = words_[++wi];
    return base_ + static_cast<std::int64_t>(wi * 64 + std::countr_zero(w));
  }

  /// Elements in increasing order.
  std::vector<std::int64_t> sorted() const {
    std::vector<std::int64_t> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint64_t w = words_[i];
      while (w) {
        const int b = std::countr_zero(w);
        out.push_back(base_ + static_cast<std::int64_t>(i * 64 + b));
        w &= w - 1;
      }
    }
    return out;
  }

 private:
  std::uint64_t bits() const { return static_cast<std::uint64_t>(words_.size()) * 64; }

  void ensure(std::int64_t x) {
    if (!words_.empty() && x >= base_ && static_cast<std::uint64_t>(x - base_) < bits()) return;
    std::int64_t lo, hi;  // new window [lo, hi), multiples of 64
    if (words_.empty()) {
      lo = floor64(x) - 64 * 32;
      hi = floor64(x) + 64 * 32;
    } else {
      const auto cur = static_cast<std::int64_t>(bits());
      lo = base_;
      hi = base_ + cur;
      if (x < lo) lo = floor64(std::min(x, lo - cur));
      if (x >= hi) hi = floor64(std::max(x, hi + cur - 1)) + 64;
    }
    if (hi - lo > kMaxWindowBits) throw std::length_error("occupancy window exceeds 2^36 positions");
    std::vector<std::uint64_t> nw(static_cast<std::size_t>((hi - lo) / 64), 0);
    const auto shift = static_cast<std::size_t>((base_ - lo) / 64);
    std::copy(words_.begin(), words_.end(), nw.begin() + static_cast<std::ptrdiff_t>(words_.empty() ? 0 : shift));
    words_.swap(nw);
    base_ = lo;
    rebuild_fenwick();
  }

  static std::int64_t floor64(std::int64_t x) { return x >= 0 ? x & ~std::int64_t{63} : -((-x + 63) & ~std::int64_t{63}); }

  void rebuild_fenwick() {
    const std::size_t n = words_.size();
    tree_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      tree_[i + 1] += static_cast<std::uint32_t>(std::popcount(words_[i]));
      const std::size_t j = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (j <= n) tree_[j] += tree_[i + 1];
    }
  }

  void fenwick_add(std::size_t word) {
    for (std::size_t i = word + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }

  // Sum of popcounts of words [0, word).
  std::size_t fenwick_prefix(std::size_t word) const {
    std::size_t s = 0;
    for (std::size_t i = word; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  std::int64_t base_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> tree_;
  std::size_t size_ = 0;
  std::int64_t min_ = 0;
  std::int64_t max_ = 0;
};

}  // namespace dla1d
