#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsmuce/estimator.hpp"
#include "hsmuce/philox.hpp"
#include "oracles.hpp"

using namespace hsmuce;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_thresholds(PhiloxStream& stream, std::size_t scales) {
  std::vector<double> q(scales);
  for (double& v : q) v = std::exp(0.3 + 2.5 * stream.next_double());
  return q;
}

// Random piecewise signal with noise; sometimes pure noise.
std::vector<double> random_instance(PhiloxStream& stream, std::int64_t n) {
  std::vector<double> y(n);
  stream.fill_normals(y);
  const int changes = static_cast<int>(stream.next_double() * 3.0);
  std::int64_t pos = 1;
  double level = 0.0;
  for (int c = 0; c < changes; ++c) {
    const auto jump_at = static_cast<std::int64_t>(2 + stream.next_double() * (n - 2));
    const double jump = (stream.next_double() < 0.5 ? -1.0 : 1.0) *
                        (1.0 + 4.0 * stream.next_double());
    for (std::int64_t i = std::max(pos, jump_at); i <= n; ++i) y[i - 1] += jump;
    level += jump;
    pos = jump_at;
  }
  (void)level;
  return y;
}

void check_against_oracle(std::span<const double> y, const IntervalSystem& system,
                          std::span<const double> thresholds) {
  const FitResult result = fit(y, system, thresholds);
  const oracle::ExhaustiveResult ref = oracle::exhaustive_fit(y, system, thresholds);

  REQUIRE(result.k_hat == ref.k_hat);
  for (std::int64_t k = 0; k < result.k_hat; ++k) {
    CHECK(result.limits.left[k] == ref.bracket_lo[k]);
    CHECK(result.limits.right[k] == ref.bracket_hi[k]);
    CHECK(result.fit.boundaries[k] >= result.limits.left[k]);
    CHECK(result.fit.boundaries[k] <= result.limits.right[k]);
  }
  CHECK(result.total_cost == doctest::Approx(ref.best_cost).epsilon(1e-7));
  CHECK(oracle::accepts(y, result.fit, thresholds, system));

  // The band contains every admissible solution value, with equality on the
  // index ranges all solutions assign to the same segment.
  const std::int64_t n = system.n();
  for (std::int64_t i = 1; i <= n; ++i) {
    CHECK(result.band[i - 1].first <= ref.envelope_lo[i - 1] + 1e-9);
    CHECK(result.band[i - 1].second >= ref.envelope_hi[i - 1] - 1e-9);
  }
  for (std::int64_t k = 0; k <= result.k_hat; ++k) {
    const std::int64_t lo = k == 0 ? 1 : result.limits.right[k - 1];
    const std::int64_t hi = k == result.k_hat ? n : result.limits.left[k] - 1;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const auto [blo, bhi] = result.band[i - 1];
      if (std::isfinite(blo) || std::isfinite(ref.envelope_lo[i - 1])) {
        CHECK(blo == doctest::Approx(ref.envelope_lo[i - 1]).epsilon(1e-9));
      }
      if (std::isfinite(bhi) || std::isfinite(ref.envelope_hi[i - 1])) {
        CHECK(bhi == doctest::Approx(ref.envelope_hi[i - 1]).epsilon(1e-9));
      }
    }
  }
}

}  // namespace

TEST_CASE("mean bounds: hand cases") {
  const IntervalSystem sys = IntervalSystem::build(4, SystemKind::kDyadicPartition);
  const std::vector<double> y{0.0, 0.0, 1.0, 1.0};
  const std::vector<double> q{3.0, 3.0};
  const IntervalBounds bounds = compute_bounds(y, sys, q);
  // [1,4]: mean 1/2, variance estimate 1/3, width sqrt(3 * (1/3) / 4) = 1/2.
  bool found = false;
  for (const MeanBound& e : bounds.entries()) {
    if (e.interval.i == 1 && e.interval.j == 4) {
      CHECK(e.lo == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(e.hi == doctest::Approx(1.0).epsilon(1e-12));
      found = true;
    }
  }
  CHECK(found);

  // Zero variance collapses the bound to the mean.
  for (const MeanBound& e : bounds.entries()) {
    if (e.interval.i == 1 && e.interval.j == 2) {
      CHECK(e.lo == 0.0);
      CHECK(e.hi == 0.0);
    }
  }

  // Doubling the threshold scales the half width by sqrt(2).
  const std::vector<double> q2{6.0, 6.0};
  const IntervalBounds doubled = compute_bounds(y, sys, q2);
  for (std::size_t idx = 0; idx < bounds.entries().size(); ++idx) {
    const MeanBound& a = bounds.entries()[idx];
    const MeanBound& b = doubled.entries()[idx];
    const double wa = a.hi - a.lo;
    const double wb = b.hi - b.lo;
    if (wa > 0.0) CHECK(wb == doctest::Approx(wa * std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("limits: unconstrained data has no forced changes") {
  const IntervalBounds bounds = IntervalBounds::from_entries(8, {});
  const Limits limits = left_right_limits(bounds);
  CHECK(limits.change_point_count() == 0);
}

TEST_CASE("limits: one forced break with bracketing window") {
  // Halves allow disjoint value ranges, the full interval binds them.
  std::vector<MeanBound> entries{
      {{1, 4}, 0.0, 0.2},
      {{5, 8}, 0.8, 1.0},
      {{1, 8}, -10.0, 10.0},
  };
  const IntervalBounds bounds = IntervalBounds::from_entries(8, std::move(entries));
  const Limits limits = left_right_limits(bounds);
  REQUIRE(limits.change_point_count() == 1);
  CHECK(limits.left[0] == 2);
  CHECK(limits.right[0] == 8);
  CHECK(limits.left[0] <= 5);
  CHECK(limits.right[0] >= 5);  // the forced break lies in the window
}

TEST_CASE("fit: constant data") {
  const IntervalSystem sys = IntervalSystem::build(8, SystemKind::kDyadicPartition);
  const std::vector<double> y(8, 2.5);
  const std::vector<double> q{3.0, 3.0, 3.0};
  const FitResult result = fit(y, sys, q);
  CHECK(result.k_hat == 0);
  REQUIRE(result.fit.values.size() == 1);
  CHECK(result.fit.values[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(result.cis.empty());
  for (const auto& [lo, hi] : result.band) {
    CHECK(lo == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(hi == doctest::Approx(2.5).epsilon(1e-12));
  }
  CHECK(result.worst_margin <= 0.0);
}

TEST_CASE("fit rejects non-finite input") {
  const IntervalSystem sys = IntervalSystem::build(4, SystemKind::kDyadicPartition);
  const std::vector<double> y{1.0, std::nan(""), 0.0, 0.0};
  const std::vector<double> q{3.0, 3.0};
  CHECK_THROWS_AS(fit(y, sys, q), std::invalid_argument);
}

TEST_CASE("fit: strong two-segment signal at n = 16") {
  const IntervalSystem sys = IntervalSystem::build(16, SystemKind::kDyadicPartition);
  PhiloxStream stream(123, 0);
  std::vector<double> y(16);
  stream.fill_normals(y);
  for (std::int64_t i = 9; i <= 16; ++i) y[i - 1] += 10.0;
  const std::vector<double> q{10.0, 10.0, 10.0, 10.0};

  const FitResult result = fit(y, sys, q);
  REQUIRE(result.k_hat == 1);
  CHECK(result.fit.boundaries[0] >= result.limits.left[0]);
  CHECK(result.fit.boundaries[0] <= result.limits.right[0]);
  CHECK(result.cis[0].first == doctest::Approx(result.limits.left[0] / 16.0));
  CHECK(result.cis[0].second == doctest::Approx(result.limits.right[0] / 16.0));
  CHECK(result.fit.values[1] - result.fit.values[0] > 5.0);
  check_against_oracle(y, sys, q);
}

TEST_CASE("fit equals exhaustive search on random instances") {
  int done = 0;
  for (std::uint64_t seed = 0; done < 40; ++seed) {
    PhiloxStream stream(seed, stream_id::noise_rep(0));
    const std::int64_t n = 6 + static_cast<std::int64_t>(stream.next_double() * 11.0);
    const IntervalSystem sys = IntervalSystem::build(n, SystemKind::kDyadicPartition);
    const std::vector<double> q = random_thresholds(stream, sys.scales().size());
    const std::vector<double> y = random_instance(stream, n);
    check_against_oracle(y, sys, q);
    ++done;
  }
}

TEST_CASE("fit equals exhaustive search on other interval systems") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    PhiloxStream stream(seed, stream_id::noise_rep(0));
    const std::int64_t n = 6 + static_cast<std::int64_t>(stream.next_double() * 7.0);
    for (SystemKind kind : {SystemKind::kDyadicLength, SystemKind::kAllIntervals}) {
      const IntervalSystem sys = IntervalSystem::build(n, kind);
      const std::vector<double> q = random_thresholds(stream, sys.scales().size());
      const std::vector<double> y = random_instance(stream, n);
      check_against_oracle(y, sys, q);
    }
  }
}

TEST_CASE("fit equivariance under affine maps") {
  const IntervalSystem sys = IntervalSystem::build(32, SystemKind::kDyadicPartition);
  PhiloxStream stream(7, 0);
  std::vector<double> y(32);
  stream.fill_normals(y);
  for (std::int64_t i = 17; i <= 32; ++i) y[i - 1] += 6.0;
  const std::vector<double> q{8.0, 8.0, 8.0, 8.0, 8.0};

  const FitResult base = fit(y, sys, q);
  const double a = 2.0, b = 3.0;
  std::vector<double> mapped(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) mapped[i] = a * y[i] + b;
  const FitResult scaled = fit(mapped, sys, q);

  CHECK(scaled.k_hat == base.k_hat);
  CHECK(scaled.fit.boundaries == base.fit.boundaries);
  for (std::size_t k = 0; k < base.fit.values.size(); ++k) {
    CHECK(scaled.fit.values[k] == doctest::Approx(a * base.fit.values[k] + b).epsilon(1e-9));
  }
  CHECK(scaled.limits.left == base.limits.left);
  CHECK(scaled.limits.right == base.limits.right);
}

TEST_CASE("reported worst margin matches the multiscale test") {
  for (std::uint64_t seed : {3ull, 4ull}) {
    PhiloxStream stream(seed, 0);
    const std::int64_t n = 128;
    const IntervalSystem sys = IntervalSystem::build(n, SystemKind::kDyadicPartition);
    std::vector<double> y(n);
    stream.fill_normals(y);
    for (std::int64_t i = 65; i <= n; ++i) y[i - 1] += 5.0;
    const std::vector<double> q{9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 9.0};
    const FitResult result = fit(y, sys, q);
    const TestDecision decision = test_candidate(y, result.fit, q, sys);
    CHECK(result.worst_margin ==
          doctest::Approx(decision.worst_margin).epsilon(1e-6));
    CHECK(decision.accept);
  }
}

TEST_CASE("band contains the fit everywhere") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    PhiloxStream stream(seed, 0);
    const std::int64_t n = 64;
    const IntervalSystem sys = IntervalSystem::build(n, SystemKind::kDyadicPartition);
    std::vector<double> y(n);
    stream.fill_normals(y);
    for (std::int64_t i = 33; i <= n; ++i) y[i - 1] += 4.0;
    const std::vector<double> q{10.0, 10.0, 10.0, 10.0, 10.0, 10.0};
    const FitResult result = fit(y, sys, q);
    for (std::int64_t i = 1; i <= n; ++i) {
      CHECK(result.band[i - 1].first <= result.fit.value_at_index(i) + 1e-12);
      CHECK(result.band[i - 1].second >= result.fit.value_at_index(i) - 1e-12);
    }
    // Window ordering invariant: each window ends before the one after next
    // begins.
    for (std::int64_t k = 0; k + 2 < result.k_hat; ++k) {
      CHECK(result.limits.right[k] < result.limits.left[k + 2]);
    }
  }
}
