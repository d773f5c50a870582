#ifndef HSMUCE_TESTS_ORACLES_HPP_
#define HSMUCE_TESTS_ORACLES_HPP_

// Independent reference implementations used as test oracles. Everything
// here recomputes from first principles (two-pass compensated moments,
// exhaustive enumeration) and stays deliberately separate from the library's
// cumulative-sum fast paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "hsmuce/intervals.hpp"
#include "hsmuce/step_fn.hpp"

namespace oracle {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
  std::int64_t len = 0;
  double mean = 0.0;
  double var_hat = 0.0;
  bool degenerate = false;
};

// Two-pass compensated mean and variance of y[i-1 .. j-1] (1-based bounds).
inline Moments moments(std::span<const double> y, std::int64_t i, std::int64_t j) {
  Moments m;
  m.len = j - i + 1;
  long double sum = 0.0L;
  for (std::int64_t l = i; l <= j; ++l) sum += y[l - 1];
  m.mean = static_cast<double>(sum / m.len);
  long double rss = 0.0L;
  for (std::int64_t l = i; l <= j; ++l) {
    const long double d = static_cast<long double>(y[l - 1]) - m.mean;
    rss += d * d;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::fabs(m.mean) + 1e-300;
  if (static_cast<double>(rss) <= 64.0 * m.len * (eps * scale) * (eps * scale)) {
    m.degenerate = true;
  } else {
    m.var_hat = static_cast<double>(rss) / static_cast<double>(m.len - 1);
  }
  return m;
}

inline double local_stat(std::span<const double> y, std::int64_t i, std::int64_t j,
                         double value) {
  const Moments m = moments(y, i, j);
  if (m.degenerate) {
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * m.len *
                       (std::fabs(m.mean) + std::fabs(value) + 1.0);
    return std::fabs(m.mean - value) <= tol ? 0.0 : kInf;
  }
  const double d = m.mean - value;
  return static_cast<double>(m.len) * d * d / m.var_hat;
}

inline std::vector<double> scale_maxima(std::span<const double> y,
                                        const hsmuce::IntervalSystem& system) {
  std::vector<double> maxima(system.scales().size(), -kInf);
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    const hsmuce::IntervalScale& scale = system.scales()[s];
    for (std::int64_t t = 0; t < scale.count; ++t) {
      const hsmuce::IndexInterval iv = scale.member(t);
      maxima[s] = std::max(maxima[s], local_stat(y, iv.i, iv.j, 0.0));
    }
  }
  return maxima;
}

// Candidate accepted iff every system interval inside one segment stays
// below its scale threshold. Same boundary tolerance as the library: values
// clipped exactly onto an inverted-test bound reproduce the threshold up to
// rounding.
inline bool accepts(std::span<const double> y, const hsmuce::StepFn& candidate,
                    std::span<const double> thresholds,
                    const hsmuce::IntervalSystem& system) {
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    if (thresholds[s] == kInf) continue;
    const hsmuce::IntervalScale& scale = system.scales()[s];
    for (std::int64_t t = 0; t < scale.count; ++t) {
      const hsmuce::IndexInterval iv = scale.member(t);
      if (candidate.segment_of(iv.i) != candidate.segment_of(iv.j)) continue;
      const double value = candidate.values[candidate.segment_of(iv.i)];
      if (local_stat(y, iv.i, iv.j, value) >
          thresholds[s] + 1e-9 * (1.0 + thresholds[s])) {
        return false;
      }
    }
  }
  return true;
}

// Exhaustive reference for the estimator on small n: enumerate every
// segmentation, keep the feasible ones with the minimal number of changes,
// and report count, brackets, optimal cost and a maximizing fit.
struct ExhaustiveResult {
  std::int64_t k_hat = 0;
  double best_cost = kInf;
  std::vector<std::int64_t> best_boundaries;
  std::vector<double> best_values;
  // min / max of each boundary over all minimal feasible segmentations
  std::vector<std::int64_t> bracket_lo, bracket_hi;
  // per-index envelope over all minimal feasible solutions' admissible values
  std::vector<double> envelope_lo, envelope_hi;
};

constexpr double kRssFloor = 1e-300;

inline ExhaustiveResult exhaustive_fit(std::span<const double> y,
                                       const hsmuce::IntervalSystem& system,
                                       std::span<const double> thresholds) {
  const std::int64_t n = system.n();
  // Interval mean bounds, then the intersected bounds for every (s, e).
  std::vector<std::vector<double>> lo(n + 1, std::vector<double>(n + 1, -kInf));
  std::vector<std::vector<double>> hi(n + 1, std::vector<double>(n + 1, kInf));
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    if (thresholds[s] == kInf) continue;
    const hsmuce::IntervalScale& scale = system.scales()[s];
    for (std::int64_t t = 0; t < scale.count; ++t) {
      const hsmuce::IndexInterval iv = scale.member(t);
      const Moments m = moments(y, iv.i, iv.j);
      const double width = std::sqrt(thresholds[s] * m.var_hat / static_cast<double>(m.len));
      lo[iv.i][iv.j] = std::max(lo[iv.i][iv.j], m.mean - width);
      hi[iv.i][iv.j] = std::min(hi[iv.i][iv.j], m.mean + width);
    }
  }
  // Intersected bounds over [s, e]: the intervals inside are those inside
  // [s+1, e], those inside [s, e-1], and [s, e] itself.
  std::vector<std::vector<double>> ilo(n + 2, std::vector<double>(n + 1, -kInf));
  std::vector<std::vector<double>> ihi(n + 2, std::vector<double>(n + 1, kInf));
  for (std::int64_t s = n; s >= 1; --s) {
    for (std::int64_t e = s + 1; e <= n; ++e) {
      ilo[s][e] = std::max({ilo[s + 1][e], ilo[s][e - 1], lo[s][e]});
      ihi[s][e] = std::min({ihi[s + 1][e], ihi[s][e - 1], hi[s][e]});
    }
  }

  auto segment_cost = [&](std::int64_t s, std::int64_t e, double* value) {
    if (ilo[s][e] > ihi[s][e]) return kInf;
    const Moments m = moments(y, s, e);
    double mu = std::clamp(m.mean, ilo[s][e], ihi[s][e]);
    long double rss = 0.0L;
    long double s2 = 0.0L, s1 = 0.0L;
    for (std::int64_t l = s; l <= e; ++l) {
      const long double d = static_cast<long double>(y[l - 1]) - mu;
      rss += d * d;
      s1 += y[l - 1];
      s2 += static_cast<long double>(y[l - 1]) * y[l - 1];
    }
    // Same perfect-fit floor convention as the estimator: residuals below
    // the cancellation noise of cumulative sums count as zero.
    const double len = static_cast<double>(m.len);
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::fabs(static_cast<double>(s2)) +
                          2.0 * std::fabs(mu * static_cast<double>(s1)) + len * mu * mu);
    double r = static_cast<double>(rss);
    if (r <= noise) r = kRssFloor;
    if (value != nullptr) *value = mu;
    return len * std::log(r / len);
  };

  ExhaustiveResult result;
  // Pass 1: minimal feasible change count.
  std::int64_t best_k = n;
  const std::uint32_t masks = 1u << (n - 1);
  std::vector<std::int64_t> cuts;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    const int k = __builtin_popcount(mask);
    if (k > best_k) continue;
    cuts.clear();
    for (int p = 0; p < n - 1; ++p) {
      if (mask & (1u << p)) cuts.push_back(p + 2);
    }
    bool feasible = true;
    std::int64_t start = 1;
    for (std::int64_t cut : cuts) {
      if (ilo[start][cut - 1] > ihi[start][cut - 1]) {
        feasible = false;
        break;
      }
      start = cut;
    }
    if (feasible && ilo[start][n] > ihi[start][n]) feasible = false;
    if (feasible && k < best_k) best_k = k;
  }
  result.k_hat = best_k;
  result.bracket_lo.assign(best_k, n + 1);
  result.bracket_hi.assign(best_k, 0);
  result.envelope_lo.assign(n, kInf);
  result.envelope_hi.assign(n, -kInf);

  // Pass 2: among minimal feasible segmentations, track cost optimum,
  // brackets and the value envelope.
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    if (__builtin_popcount(mask) != best_k) continue;
    cuts.clear();
    for (int p = 0; p < n - 1; ++p) {
      if (mask & (1u << p)) cuts.push_back(p + 2);
    }
    bool feasible = true;
    std::int64_t start = 1;
    double total = 0.0;
    std::vector<double> values;
    std::vector<std::pair<std::int64_t, std::int64_t>> segs;
    for (std::size_t c = 0; c <= cuts.size(); ++c) {
      const std::int64_t end = c < cuts.size() ? cuts[c] - 1 : n;
      double value = 0.0;
      const double cost = segment_cost(start, end, &value);
      if (cost == kInf) {
        feasible = false;
        break;
      }
      total += cost;
      values.push_back(value);
      segs.emplace_back(start, end);
      start = end + 1;
    }
    if (!feasible) continue;
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      result.bracket_lo[c] = std::min(result.bracket_lo[c], cuts[c]);
      result.bracket_hi[c] = std::max(result.bracket_hi[c], cuts[c]);
    }
    for (std::size_t c = 0; c < segs.size(); ++c) {
      for (std::int64_t i = segs[c].first; i <= segs[c].second; ++i) {
        result.envelope_lo[i - 1] = std::min(result.envelope_lo[i - 1], ilo[segs[c].first][segs[c].second]);
        result.envelope_hi[i - 1] = std::max(result.envelope_hi[i - 1], ihi[segs[c].first][segs[c].second]);
      }
    }
    if (total < result.best_cost) {
      result.best_cost = total;
      result.best_boundaries = cuts;
      result.best_values = values;
    }
  }
  return result;
}

}  // namespace oracle

#endif  // HSMUCE_TESTS_ORACLES_HPP_
