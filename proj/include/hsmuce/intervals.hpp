#ifndef HSMUCE_INTERVALS_HPP_
#define HSMUCE_INTERVALS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace hsmuce {

// Test interval of observation indices, 1-based and inclusive. Every
// interval carries at least two observations since the local variance
// estimate divides by j - i.
struct IndexInterval {
  std::int64_t i = 0;
  std::int64_t j = 0;

  std::int64_t length() const { return j - i + 1; }
  friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

enum class SystemKind {
  kDyadicPartition,  // disjoint tiling, lengths 2^k, O(n) intervals
  kDyadicLength,     // lengths 2^k at every start, O(n log n)
  kAllIntervals,     // every [i, j] with length >= 2, O(n^2)
};

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

// One scale = all member intervals of a common length, stored implicitly as
// an arithmetic progression of start positions.
struct IntervalScale {
  std::int64_t label = 0;   // dyadic partition: exponent k; otherwise length
  std::int64_t length = 0;  // common interval length
  std::int64_t first_start = 1;
  std::int64_t stride = 1;
  std::int64_t count = 0;

  IndexInterval member(std::int64_t t) const {
    const std::int64_t start = first_start + t * stride;
    return {start, start + length - 1};
  }
};

// The collection of intervals the multiscale test runs over, grouped into
// scales. Immutable after construction; empty scales are omitted.
class IntervalSystem {
 public:
  static IntervalSystem build(std::int64_t n, SystemKind kind);

  std::int64_t n() const { return n_; }
  SystemKind kind() const { return kind_; }
  const std::vector<IntervalScale>& scales() const { return scales_; }
  std::int64_t total_interval_count() const;

  // Visits every member interval [s, t] with i <= s < t <= j, together with
  // its scale position. `fn` has signature void(std::size_t scale_idx,
  // IndexInterval).
  template <typename Fn>
  void for_each_contained(std::int64_t i, std::int64_t j, Fn&& fn) const {
    for (std::size_t s = 0; s < scales_.size(); ++s) {
      const IntervalScale& scale = scales_[s];
      if (scale.length > j - i + 1) continue;
      // Starts in [i, j - length + 1] restricted to the progression.
      std::int64_t lo = i - scale.first_start;
      std::int64_t t0 = lo <= 0 ? 0 : (lo + scale.stride - 1) / scale.stride;
      std::int64_t t1 = (j - scale.length + 1 - scale.first_start) / scale.stride;
      if (t1 >= scale.count) t1 = scale.count - 1;
      for (std::int64_t t = t0; t <= t1; ++t) fn(s, scale.member(t));
    }
  }

  // Materialized variant of for_each_contained, mainly for tests.
  std::vector<IndexInterval> intervals_on(std::int64_t i, std::int64_t j) const;

 private:
  std::int64_t n_ = 0;
  SystemKind kind_ = SystemKind::kDyadicPartition;
  std::vector<IntervalScale> scales_;
};

}  // namespace hsmuce

#endif  // HSMUCE_INTERVALS_HPP_
