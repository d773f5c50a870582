#include "hsmuce/estimator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hsmuce/local_stats.hpp"

namespace hsmuce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Floor for the residual sum of squares inside the profile-likelihood cost.
// Keeps perfectly fitted segments (RSS = 0) at a large finite advantage
// instead of producing -inf totals that defeat tie-breaking.
constexpr double kRssFloor = 1e-300;

struct RunningIntersection {
  double lo = -kInf;
  double hi = kInf;

  void add(const MeanBound& b) {
    if (b.lo > lo) lo = b.lo;
    if (b.hi < hi) hi = b.hi;
  }
  bool feasible() const { return lo <= hi; }
};

// Profile gaussian cost of fitting observations s..e with the constrained
// mean: len * log(RSS(mu*) / len), mu* the mean clipped into the bounds.
// Infeasible bounds cost +infinity. A residual below the cancellation noise
// of the cumulative sums is a perfect fit; it lands on the shared floor so
// the log cannot amplify rounding residue into arbitrary cost differences.
double segment_cost(const PrefixSums& sums, std::int64_t s, std::int64_t e,
                    const RunningIntersection& inter, double* fitted_value) {
  if (!inter.feasible()) return kInf;
  const auto len = static_cast<double>(e - s + 1);
  const double s1 = sums.sum(s, e);
  const double s2 = sums.sumsq(s, e);
  double mu = s1 / len;
  if (mu < inter.lo) mu = inter.lo;
  if (mu > inter.hi) mu = inter.hi;
  double rss = s2 - 2.0 * mu * s1 + len * mu * mu;
  const double local = std::numeric_limits<double>::epsilon() *
                       (std::fabs(s2) + 2.0 * std::fabs(mu * s1) + len * mu * mu);
  const double noise =
      64.0 * (local + sums.cancellation_scale(s, e) * (1.0 + std::fabs(mu)));
  if (rss <= noise) rss = kRssFloor;
  if (fitted_value != nullptr) *fitted_value = mu;
  return len * std::log(rss / len);
}

RunningIntersection intersect_range(const IntervalBounds& bounds, std::int64_t s,
                                    std::int64_t e) {
  RunningIntersection inter;
  for (std::int64_t t = s; t <= e; ++t) {
    for (std::uint32_t idx : bounds.ending_at(t)) {
      if (bounds.entries()[idx].interval.i >= s) inter.add(bounds.entries()[idx]);
    }
  }
  return inter;
}

// Worst multiscale margin of the fitted function, reconstructed from the
// interval bounds: an entry with midpoint m and half width w encodes the
// statistic q (value - m)^2 / w^2 at its scale's threshold q.
double worst_margin_from_bounds(const IntervalBounds& bounds, const IntervalSystem& system,
                                std::span<const double> thresholds, const StepFn& fitted) {
  std::vector<std::pair<std::int64_t, double>> threshold_by_length;
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    if (thresholds[s] != kInf) {
      threshold_by_length.emplace_back(system.scales()[s].length, thresholds[s]);
    }
  }
  std::sort(threshold_by_length.begin(), threshold_by_length.end());
  auto threshold_of = [&](std::int64_t length) {
    const auto it = std::lower_bound(threshold_by_length.begin(), threshold_by_length.end(),
                                     std::pair<std::int64_t, double>{length, -kInf});
    return it->second;
  };

  double worst = -kInf;
  const std::int64_t segments = fitted.change_point_count() + 1;
  for (std::int64_t k = 0; k < segments; ++k) {
    const std::int64_t lo = fitted.segment_start(k);
    const std::int64_t hi = fitted.segment_end(k);
    const double value = fitted.values[k];
    for (std::int64_t t = lo; t <= hi; ++t) {
      for (std::uint32_t idx : bounds.ending_at(t)) {
        const MeanBound& e = bounds.entries()[idx];
        if (e.interval.i < lo) continue;
        const double q = threshold_of(e.interval.length());
        const double mid = 0.5 * (e.lo + e.hi);
        const double half = 0.5 * (e.hi - e.lo);
        double stat;
        if (half > 0.0 && q > 0.0) {
          const double dev = (value - mid) / half;
          stat = q * dev * dev;
        } else {
          stat = means_equal_within_rounding(mid, value, e.interval.length()) ? 0.0 : kInf;
        }
        worst = std::max(worst, stat - q);
      }
    }
  }
  return worst;
}

}  // namespace

IntervalBoundsBuilder::IntervalBoundsBuilder(std::int64_t n, std::int64_t expected_entries) {
  if (n < 1) throw std::invalid_argument("IntervalBounds: n must be positive");
  bounds_.n_ = n;
  bounds_.entries_.reserve(expected_entries);
  bounds_.end_offset_.assign(n + 2, 0);
  bounds_.start_offset_.assign(n + 2, 0);
}

void IntervalBoundsBuilder::add(IndexInterval interval, double lo, double hi) {
  if (interval.i < 1 || interval.j > bounds_.n_ || interval.i >= interval.j) {
    throw std::invalid_argument("IntervalBounds: malformed interval");
  }
  ++bounds_.end_offset_[interval.j + 1];
  ++bounds_.start_offset_[interval.i + 1];
  bounds_.entries_.push_back(MeanBound{interval, lo, hi});
}

IntervalBounds IntervalBoundsBuilder::finish() {
  IntervalBounds b = std::move(bounds_);
  const std::int64_t n = b.n_;
  const auto m = static_cast<std::uint32_t>(b.entries_.size());
  for (std::int64_t t = 1; t <= n + 1; ++t) {
    b.end_offset_[t] += b.end_offset_[t - 1];
    b.start_offset_[t] += b.start_offset_[t - 1];
  }
  b.end_items_.resize(m);
  b.start_items_.resize(m);
  std::vector<std::uint32_t> end_fill(b.end_offset_.begin(), b.end_offset_.end());
  std::vector<std::uint32_t> start_fill(b.start_offset_.begin(), b.start_offset_.end());
  for (std::uint32_t idx = 0; idx < m; ++idx) {
    const MeanBound& e = b.entries_[idx];
    b.end_items_[end_fill[e.interval.j]++] = idx;
    b.start_items_[start_fill[e.interval.i]++] = idx;
  }
  return b;
}

IntervalBounds IntervalBounds::from_entries(std::int64_t n, std::vector<MeanBound> entries) {
  IntervalBoundsBuilder builder(n, static_cast<std::int64_t>(entries.size()));
  for (const MeanBound& e : entries) builder.add(e.interval, e.lo, e.hi);
  return builder.finish();
}

std::span<const std::uint32_t> IntervalBounds::ending_at(std::int64_t t) const {
  return {end_items_.data() + end_offset_[t], end_items_.data() + end_offset_[t + 1]};
}

std::span<const std::uint32_t> IntervalBounds::starting_at(std::int64_t s) const {
  return {start_items_.data() + start_offset_[s], start_items_.data() + start_offset_[s + 1]};
}

IntervalBounds compute_bounds(std::span<const double> y, const IntervalSystem& system,
                              std::span<const double> thresholds) {
  if (static_cast<std::int64_t>(y.size()) != system.n()) {
    throw std::invalid_argument("compute_bounds: length mismatch");
  }
  return compute_bounds(PrefixSums(y), system, thresholds);
}

IntervalBounds compute_bounds(const PrefixSums& sums, const IntervalSystem& system,
                              std::span<const double> thresholds) {
  if (sums.n() != system.n()) {
    throw std::invalid_argument("compute_bounds: length mismatch");
  }
  if (thresholds.size() != system.scales().size()) {
    throw std::invalid_argument("compute_bounds: need one threshold per scale");
  }
  std::int64_t finite_count = 0;
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    if (thresholds[s] != kInf) finite_count += system.scales()[s].count;
  }
  IntervalBoundsBuilder builder(system.n(), finite_count);
  for (std::size_t s = 0; s < system.scales().size(); ++s) {
    const double q = thresholds[s];
    if (q == kInf) continue;
    if (!(q >= 0.0)) throw std::invalid_argument("compute_bounds: thresholds must be >= 0");
    const IntervalScale& scale = system.scales()[s];
    const double inv_len = 1.0 / static_cast<double>(scale.length);
    // width = sqrt(q * var_hat / len) with var_hat = raw / (len - 1)
    const double width_coef =
        q / (static_cast<double>(scale.length) * static_cast<double>(scale.length - 1));
    for (std::int64_t t = 0; t < scale.count; ++t) {
      const IndexInterval iv = scale.member(t);
      const double s1 = sums.sum(iv.i, iv.j);
      const double s2 = sums.sumsq(iv.i, iv.j);
      const double mean = s1 * inv_len;
      const double raw = s2 - s1 * mean;
      const double noise = 64.0 * (std::numeric_limits<double>::epsilon() *
                                       (std::fabs(s2) + std::fabs(s1 * mean)) +
                                   sums.cancellation_scale(iv.i, iv.j) *
                                       (1.0 + std::fabs(mean)));
      const double width = raw <= noise ? 0.0 : std::sqrt(raw * width_coef);
      builder.add(iv, mean - width, mean + width);
    }
  }
  return builder.finish();
}

Limits left_right_limits(const IntervalBounds& bounds) {
  const std::int64_t n = bounds.n();
  Limits limits;

  // Forward sweep: right limits. Starting a segment at `anchor`, grow its
  // right end; the first position where the intersected bounds cross forces
  // a change-point strictly before it.
  std::int64_t anchor = 1;
  RunningIntersection inter;
  for (std::int64_t t = 2; t <= n; ++t) {
    for (std::uint32_t idx : bounds.ending_at(t)) {
      if (bounds.entries()[idx].interval.i >= anchor) inter.add(bounds.entries()[idx]);
    }
    if (!inter.feasible()) {
      limits.right.push_back(t);
      anchor = t;
      inter = RunningIntersection{};
    }
  }

  const auto k_hat = static_cast<std::int64_t>(limits.right.size());
  limits.left.assign(k_hat, 0);

  // Backward sweep: the left limit of change k is the smallest start from
  // which a single feasible segment reaches the next left limit minus one.
  std::int64_t right_end = n;  // = L_{k+1} - 1
  for (std::int64_t k = k_hat - 1; k >= 0; --k) {
    RunningIntersection back;
    std::int64_t best = -1;
    for (std::int64_t r = right_end; r >= 2; --r) {
      for (std::uint32_t idx : bounds.starting_at(r)) {
        if (bounds.entries()[idx].interval.j <= right_end) back.add(bounds.entries()[idx]);
      }
      if (!back.feasible()) break;
      best = r;
    }
    if (best < 0) throw std::logic_error("left_right_limits: backward sweep found no feasible start");
    limits.left[k] = best;
    right_end = best - 1;
  }
  return limits;
}

namespace {

// Dynamic program over the limit windows. suffix[k][c - L_k] is the best
// cost of covering observations c..n with segments k..k_hat, given segment k
// starts at c; choice[k][...] records the segment-(k+1) start attaining it
// (smallest on ties, so reconstruction is deterministic).
struct DynamicProgram {
  const PrefixSums& sums;
  const IntervalBounds& bounds;
  const Limits& limits;
  std::int64_t n;

  std::vector<std::vector<double>> suffix;
  std::vector<std::vector<std::int64_t>> choice;

  explicit DynamicProgram(const PrefixSums& s, const IntervalBounds& b, const Limits& l)
      : sums(s), bounds(b), limits(l), n(b.n()) {}

  void run() {
    const auto k_hat = static_cast<std::size_t>(limits.change_point_count());
    suffix.assign(k_hat, {});
    choice.assign(k_hat, {});

    // Last window: segments run to n, so sweep the start downward once,
    // folding in every interval that begins at or after the current start.
    {
      const std::size_t k = k_hat - 1;
      const std::int64_t lo = limits.left[k], hi = limits.right[k];
      suffix[k].assign(hi - lo + 1, kInf);
      RunningIntersection inter;
      for (std::int64_t c = n; c >= lo; --c) {
        for (std::uint32_t idx : bounds.starting_at(c)) {
          inter.add(bounds.entries()[idx]);
        }
        if (c <= hi) suffix[k][c - lo] = segment_cost(sums, c, n, inter, nullptr);
      }
    }

    for (std::int64_t k = static_cast<std::int64_t>(k_hat) - 2; k >= 0; --k) {
      const std::int64_t lo = limits.left[k], hi = limits.right[k];
      const std::int64_t next_lo = limits.left[k + 1], next_hi = limits.right[k + 1];
      const std::int64_t width = hi - lo + 1;
      suffix[k].assign(width, kInf);
      choice[k].assign(width, -1);

      // One sweep of the right end for the whole window. Intervals starting
      // at or beyond hi constrain every candidate start alike and live in a
      // shared intersection; intervals starting inside the window apply to
      // the starts at or before them.
      RunningIntersection shared;
      std::vector<RunningIntersection> per_start(width);
      std::vector<double> best(width, kInf);
      std::vector<std::int64_t> best_next(width, -1);
      for (std::int64_t e = lo; e <= next_hi - 1; ++e) {
        for (std::uint32_t idx : bounds.ending_at(e)) {
          const std::int64_t s = bounds.entries()[idx].interval.i;
          if (s < lo) continue;
          if (s >= hi) {
            shared.add(bounds.entries()[idx]);
          } else {
            for (std::int64_t c = lo; c <= s; ++c) {
              per_start[c - lo].add(bounds.entries()[idx]);
            }
          }
        }
        if (e + 1 < next_lo) continue;
        const double tail = suffix[k + 1][e + 1 - next_lo];
        if (tail == kInf) continue;
        const std::int64_t c_max = std::min(hi, e);
        for (std::int64_t c = lo; c <= c_max; ++c) {
          RunningIntersection inter{std::max(shared.lo, per_start[c - lo].lo),
                                    std::min(shared.hi, per_start[c - lo].hi)};
          const double cost = segment_cost(sums, c, e, inter, nullptr) + tail;
          if (cost < best[c - lo]) {
            best[c - lo] = cost;
            best_next[c - lo] = e + 1;
          }
        }
      }
      suffix[k] = best;
      choice[k] = best_next;
    }
  }

  // Returns boundaries and the total cost including the leading segment.
  std::pair<std::vector<std::int64_t>, double> reconstruct() const {
    const auto k_hat = static_cast<std::size_t>(limits.change_point_count());
    const std::int64_t lo = limits.left[0], hi = limits.right[0];
    double best = kInf;
    std::int64_t first = -1;
    std::vector<double> lead(hi - lo + 1, kInf);
    RunningIntersection lead_inter;
    for (std::int64_t e = 1; e <= hi - 1; ++e) {
      for (std::uint32_t idx : bounds.ending_at(e)) {
        lead_inter.add(bounds.entries()[idx]);
      }
      if (!lead_inter.feasible()) break;
      if (e + 1 < lo) continue;
      lead[e + 1 - lo] = segment_cost(sums, 1, e, lead_inter, nullptr);
    }
    for (std::int64_t c = lo; c <= hi; ++c) {
      if (lead[c - lo] == kInf || suffix[0][c - lo] == kInf) continue;
      const double cost = lead[c - lo] + suffix[0][c - lo];
      if (cost < best) {
        best = cost;
        first = c;
      }
    }
    if (first < 0) throw std::logic_error("dynamic program: no feasible solution");
    std::vector<std::int64_t> cps{first};
    for (std::size_t k = 0; k + 1 < k_hat; ++k) {
      const std::int64_t next = choice[k][cps.back() - limits.left[k]];
      assert(next >= 0);
      cps.push_back(next);
    }
    return {cps, best};
  }
};

}  // namespace

std::vector<std::pair<double, double>> confidence_band(const IntervalBounds& bounds,
                                                       const Limits& limits,
                                                       const StepFn& fitted) {
  const std::int64_t n = bounds.n();
  const auto k_hat = limits.change_point_count();

  // Envelope of segment k over its certain index range [R_k, L_{k+1} - 1]
  // (all feasible solutions agree that those indices belong to segment k).
  std::vector<RunningIntersection> env(k_hat + 1);
  for (std::int64_t k = 0; k <= k_hat; ++k) {
    const std::int64_t lo = k == 0 ? 1 : limits.right[k - 1];
    const std::int64_t hi = k == k_hat ? n : limits.left[k] - 1;
    if (lo <= hi) {
      env[k] = intersect_range(bounds, lo, hi);
    } else {
      // Window overlap: no certain index; fall back to the fitted segment.
      env[k] = intersect_range(bounds, fitted.segment_start(k), fitted.segment_end(k));
    }
  }

  // Index i may belong to segment k iff left[k] <= i <= right[k+1] - 1; the
  // band is the hull of the possible segments' envelopes.
  auto window_lo = [&](std::int64_t k) { return k == 0 ? std::int64_t{1} : limits.left[k - 1]; };
  auto window_hi = [&](std::int64_t k) { return k == k_hat ? n : limits.right[k] - 1; };
  std::vector<std::pair<double, double>> band(n);
  std::int64_t k_first = 0;
  for (std::int64_t i = 1; i <= n; ++i) {
    while (k_first < k_hat && window_hi(k_first) < i) ++k_first;
    double lo = kInf, hi = -kInf;
    for (std::int64_t k = k_first; k <= k_hat && window_lo(k) <= i; ++k) {
      lo = std::min(lo, env[k].lo);
      hi = std::max(hi, env[k].hi);
    }
    band[i - 1] = {lo, hi};
  }
  return band;
}

FitResult fit(std::span<const double> y, const IntervalSystem& system,
              std::span<const double> thresholds) {
  const std::int64_t n = system.n();
  if (static_cast<std::int64_t>(y.size()) != n) {
    throw std::invalid_argument("fit: observation count must match the system");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit: observations must be finite");
  }

  // Center the data; the statistics are shift-invariant and the bounds
  // shift-equivariant, so this only improves the conditioning of the
  // cumulative sums.
  long double acc = 0.0L;
  for (double v : y) acc += v;
  const double center = static_cast<double>(acc / static_cast<long double>(n));
  std::vector<double> centered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - center;

  const PrefixSums sums(centered);
  const IntervalBounds bounds = compute_bounds(sums, system, thresholds);
  Limits limits = left_right_limits(bounds);
  const std::int64_t k_hat = limits.change_point_count();

  FitResult result;
  result.k_hat = k_hat;
  result.limits = limits;
  result.fit.n = n;

  if (k_hat == 0) {
    RunningIntersection inter = intersect_range(bounds, 1, n);
    double value = 0.0;
    result.total_cost = segment_cost(sums, 1, n, inter, &value);
    result.fit.values = {value};
  } else {
    DynamicProgram dp(sums, bounds, limits);
    dp.run();
    auto [cps, total] = dp.reconstruct();
    result.total_cost = total;
    result.fit.boundaries = cps;
    result.fit.values.resize(k_hat + 1);
    for (std::int64_t k = 0; k <= k_hat; ++k) {
      const std::int64_t s = result.fit.segment_start(k);
      const std::int64_t e = result.fit.segment_end(k);
      RunningIntersection inter = intersect_range(bounds, s, e);
      segment_cost(sums, s, e, inter, &result.fit.values[k]);
    }
    // Adjacent segments can clip onto the same bound; nudge by one ulp so the
    // result stays a valid step function with k_hat genuine changes.
    for (std::int64_t k = 1; k <= k_hat; ++k) {
      if (result.fit.values[k] == result.fit.values[k - 1]) {
        const std::int64_t s = result.fit.segment_start(k);
        const std::int64_t e = result.fit.segment_end(k);
        const double mean = sums.sum(s, e) / static_cast<double>(e - s + 1);
        const double dir = mean >= result.fit.values[k] ? kInf : -kInf;
        result.fit.values[k] = std::nextafter(result.fit.values[k], dir);
      }
    }
    result.cis.reserve(k_hat);
    for (std::int64_t k = 0; k < k_hat; ++k) {
      result.cis.emplace_back(static_cast<double>(limits.left[k]) / static_cast<double>(n),
                              static_cast<double>(limits.right[k]) / static_cast<double>(n));
    }
  }

  result.band = confidence_band(bounds, limits, result.fit);
  result.worst_margin = worst_margin_from_bounds(bounds, system, thresholds, result.fit);

  // Undo the centering.
  for (double& v : result.fit.values) v += center;
  for (auto& [lo, hi] : result.band) {
    lo += center;
    hi += center;
  }
  return result;
}

FitResult fit(std::span<const double> y, const IntervalSystem& system,
              const CriticalValues& critical_values) {
  const std::vector<double> thresholds = critical_values.thresholds_for(system);
  return fit(y, system, thresholds);
}

}  // namespace hsmuce
