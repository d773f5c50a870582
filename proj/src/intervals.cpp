#include "hsmuce/intervals.hpp"

#include <stdexcept>

namespace hsmuce {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDyadicPartition: return "dyadic";
    case SystemKind::kDyadicLength: return "dyadic-length";
    case SystemKind::kAllIntervals: return "all";
  }
  throw std::logic_error("unknown SystemKind");
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "dyadic" || name == "dyadic-partition") return SystemKind::kDyadicPartition;
  if (name == "dyadic-length") return SystemKind::kDyadicLength;
  if (name == "all" || name == "all-intervals") return SystemKind::kAllIntervals;
  throw std::invalid_argument("unknown interval system: " + name);
}

IntervalSystem IntervalSystem::build(std::int64_t n, SystemKind kind) {
  if (n < 2) throw std::domain_error("IntervalSystem: need at least two observations");
  IntervalSystem sys;
  sys.n_ = n;
  sys.kind_ = kind;
  switch (kind) {
    case SystemKind::kDyadicPartition: {
      // Scale k holds the floor(n / 2^k) disjoint intervals of length 2^k
      // with starts 1 + (l-1) 2^k. Observations beyond the last full tile
      // are simply not covered at that scale.
      for (std::int64_t k = 1, len = 2; len <= n; ++k, len *= 2) {
        IntervalScale scale;
        scale.label = k;
        scale.length = len;
        scale.first_start = 1;
        scale.stride = len;
        scale.count = n / len;
        sys.scales_.push_back(scale);
      }
      break;
    }
    case SystemKind::kDyadicLength: {
      for (std::int64_t len = 2; len <= n; len *= 2) {
        IntervalScale scale;
        scale.label = len;
        scale.length = len;
        scale.first_start = 1;
        scale.stride = 1;
        scale.count = n - len + 1;
        sys.scales_.push_back(scale);
      }
      break;
    }
    case SystemKind::kAllIntervals: {
      for (std::int64_t len = 2; len <= n; ++len) {
        IntervalScale scale;
        scale.label = len;
        scale.length = len;
        scale.first_start = 1;
        scale.stride = 1;
        scale.count = n - len + 1;
        sys.scales_.push_back(scale);
      }
      break;
    }
  }
  return sys;
}

std::int64_t IntervalSystem::total_interval_count() const {
  std::int64_t total = 0;
  for (const IntervalScale& scale : scales_) total += scale.count;
  return total;
}

std::vector<IndexInterval> IntervalSystem::intervals_on(std::int64_t i,
                                                        std::int64_t j) const {
  std::vector<IndexInterval> out;
  for_each_contained(i, j, [&](std::size_t, IndexInterval iv) { out.push_back(iv); });
  return out;
}

}  // namespace hsmuce
