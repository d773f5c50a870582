#ifndef HSMUCE_LOCAL_STATS_HPP_
#define HSMUCE_LOCAL_STATS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace hsmuce {

// Local moments and the likelihood-ratio statistic, computed from cumulative
// sums of Y and Y^2 so each interval query is O(1).

struct SegmentMoments {
  std::int64_t len = 0;
  double mean = 0.0;
  double var_hat = 0.0;    // (len - 1)^{-1} sum (Y - mean)^2, clamped at 0
  bool degenerate = false; // variance indistinguishable from rounding noise
};

class PrefixSums {
 public:
  PrefixSums() = default;

  explicit PrefixSums(std::span<const double> y) { reset(y); }

  void reset(std::span<const double> y) {
    n_ = static_cast<std::int64_t>(y.size());
    sum_.assign(n_ + 1, 0.0);
    sumsq_.assign(n_ + 1, 0.0);
    long double s = 0.0L, s2 = 0.0L;
    for (std::int64_t i = 0; i < n_; ++i) {
      s += y[i];
      s2 += static_cast<long double>(y[i]) * y[i];
      sum_[i + 1] = static_cast<double>(s);
      sumsq_[i + 1] = static_cast<double>(s2);
    }
  }

  std::int64_t n() const { return n_; }

  double sum(std::int64_t i, std::int64_t j) const { return sum_[j] - sum_[i - 1]; }
  double sumsq(std::int64_t i, std::int64_t j) const { return sumsq_[j] - sumsq_[i - 1]; }

  // Magnitude of the rounding noise carried by segment sums derived from the
  // cumulative arrays; differences of large prefixes lose absolute accuracy
  // proportional to the prefixes themselves.
  double cancellation_scale(std::int64_t i, std::int64_t j) const {
    return std::numeric_limits<double>::epsilon() *
           (std::fabs(sum_[j]) + std::fabs(sum_[i - 1]) + std::fabs(sumsq_[j]) +
            std::fabs(sumsq_[i - 1]));
  }

  // Moments of observations i..j (1-based, inclusive), len >= 2. A segment
  // whose raw variance falls below the cancellation noise of the cumulative
  // sums is flagged degenerate and treated as exactly constant.
  SegmentMoments moments(std::int64_t i, std::int64_t j) const {
    SegmentMoments m;
    m.len = j - i + 1;
    const double s1 = sum(i, j);
    const double s2 = sumsq(i, j);
    m.mean = s1 / static_cast<double>(m.len);
    const double raw = s2 - s1 * m.mean;
    const double local = std::numeric_limits<double>::epsilon() *
                         (std::fabs(s2) + std::fabs(s1 * m.mean));
    const double noise = 64.0 * (local + cancellation_scale(i, j) * (1.0 + std::fabs(m.mean)));
    if (raw <= noise) {
      m.var_hat = 0.0;
      m.degenerate = true;
    } else {
      m.var_hat = raw / static_cast<double>(m.len - 1);
    }
    return m;
  }

 private:
  std::int64_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> sumsq_;
};

// Means agreeing to within accumulated rounding error count as equal when the
// local variance is degenerate.
inline bool means_equal_within_rounding(double a, double b, std::int64_t len) {
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                     static_cast<double>(len) * (std::fabs(a) + std::fabs(b) + 1.0);
  return std::fabs(a - b) <= tol;
}

// The local log-likelihood-ratio statistic for testing whether observations
// i..j have mean m: len * (mean - m)^2 / var_hat. With a degenerate variance
// the statistic is 0 when the observations equal m and +infinity otherwise
// (the continuous limit of the ratio).
inline double local_statistic_from_moments(const SegmentMoments& m, double value) {
  const double diff = m.mean - value;
  if (m.degenerate) {
    return means_equal_within_rounding(m.mean, value, m.len)
               ? 0.0
               : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(m.len) * diff * diff / m.var_hat;
}

// Direct two-pass evaluation on a contiguous segment of at least two
// observations.
inline double local_statistic(std::span<const double> y, double value) {
  SegmentMoments m;
  m.len = static_cast<std::int64_t>(y.size());
  long double s = 0.0L;
  for (double v : y) s += v;
  m.mean = static_cast<double>(s / m.len);
  long double rss = 0.0L;
  for (double v : y) {
    const long double d = static_cast<long double>(v) - m.mean;
    rss += d * d;
  }
  // A constant segment leaves only rounding residue of order len*(eps*mean)^2.
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::fabs(m.mean) + 1.0e-300;
  const double noise = 64.0 * static_cast<double>(m.len) * (eps * scale) * (eps * scale);
  if (static_cast<double>(rss) <= noise) {
    m.var_hat = 0.0;
    m.degenerate = true;
  } else {
    m.var_hat = static_cast<double>(rss) / static_cast<double>(m.len - 1);
  }
  return local_statistic_from_moments(m, value);
}

}  // namespace hsmuce

#endif  // HSMUCE_LOCAL_STATS_HPP_
