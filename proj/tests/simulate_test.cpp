#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace depmark::test {
namespace {

TEST(Random, SplitMixReferenceStream) {
  SplitMix64 sm(0);
  EXPECT_EQ(0xE220A8397B1DCDAFULL, sm.next());
  EXPECT_EQ(0x6E789E6AA1B965F4ULL, sm.next());
  EXPECT_EQ(0x06C45D188009454FULL, sm.next());
}

TEST(Random, CopiesReplayAndJumpsDiverge) {
  Xoshiro256 a(42);
  Xoshiro256 b = a;
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a(), b());
  Xoshiro256 c = a;
  c.jump();
  EXPECT_NE(a, c);
  std::set<std::uint64_t> seen;
  for (int k = 0; k < 1000; ++k) seen.insert(a());
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(0u, seen.count(c()));
}

TEST(Random, UniformRangeAndMean) {
  Xoshiro256 rng(7);
  double total = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    total += u;
  }
  EXPECT_NEAR(0.5, total / n, 0.005);
}

TEST(Random, ExponentialMean) {
  Xoshiro256 rng(9);
  double total = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) total += rng.exponential(4.0);
  EXPECT_NEAR(0.25, total / n, 0.005);
}

TEST(Wilson, ZeroCountHasPositiveUpperBound) {
  auto [lo, hi] = wilson_interval(0, 1000000);
  EXPECT_EQ(0.0, lo);
  EXPECT_GT(hi, 0.0);
  EXPECT_LT(hi, 1e-5);
}

TEST(Wilson, ContainsPointEstimate) {
  auto [lo, hi] = wilson_interval(300, 1000);
  EXPECT_LT(lo, 0.3);
  EXPECT_GT(hi, 0.3);
  EXPECT_NEAR(0.0373, (hi - lo) / 2, 5e-4);
}

TEST(Simulate, ToyMatchesClosedForm) {
  auto m = load("toy_twostate.mdl");
  auto r = simulate(m, 2.0, 1000000, 1);
  const double p = 1.0 - std::exp(-1.0);
  EXPECT_TRUE(r.contains(1, p)) << r.lower[1] << " " << r.upper[1];
  EXPECT_LT(r.half_widths[1], 2e-3);
  EXPECT_EQ(r.trials, r.counts[0] + r.counts[1]);
}

TEST(Simulate, TimeZeroStaysInitial) {
  auto r = simulate(dfwcs(), 0.0, 10000, 5);
  EXPECT_EQ(10000u, r.counts[0]);
  EXPECT_EQ(1.0, r.estimates[0]);
  for (std::size_t i = 1; i < 7; ++i) EXPECT_EQ(0u, r.counts[i]);
}

TEST(Simulate, DeterministicAcrossRunsAndThreads) {
  auto m = dfwcs();
  const std::uint64_t trials = 5 * kTrialsPerBatch + 123;
  auto a = simulate(m, 4380.0, trials, 77, 1);
  auto b = simulate(m, 4380.0, trials, 77, 1);
  auto c = simulate(m, 4380.0, trials, 77, 4);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.counts, c.counts);
  auto d = simulate(m, 4380.0, trials, 78, 4);
  EXPECT_NE(a.counts, d.counts);
}

TEST(Simulate, AllZeroRatesStayPut) {
  auto m = parse(R"(param Z = 0;
state 1 "a" class = operational;
state 2 "b" class = fail_safe;
trans 1 -> 2 rate = Z;
init 1 = 0.25;
init 2 = 0.75;
)");
  auto r = simulate(m, 100.0, 40000, 3);
  EXPECT_EQ(r.trials, r.counts[0] + r.counts[1]);
  EXPECT_TRUE(r.contains(0, 0.25));
  EXPECT_TRUE(r.contains(1, 0.75));
}

TEST(Simulate, RejectsBadArguments) {
  EXPECT_THROW(simulate(dfwcs(), 1.0, 0, 1), DomainError);
  EXPECT_THROW(simulate(dfwcs(), -1.0, 10, 1), DomainError);
}

TEST(Simulate, FeedwaterIntervalsContainOracle) {
  auto m = dfwcs();
  auto exact = oracle_expm(m, 4380.0);
  auto r = simulate(m, 4380.0, 1000000, 2024);
  for (std::size_t i = 0; i < exact.size(); ++i)
    EXPECT_TRUE(r.contains(i, exact[i]))
        << "state " << i + 1 << " exact " << exact[i] << " ci [" << r.lower[i] << ", "
        << r.upper[i] << "]";
}

TEST(SimulateProperty, CoverageOverSeeds) {
  // A 99% interval should miss rarely; allow 10 misses in 200 seeds.
  auto m = load("toy_twostate.mdl");
  const double p = 1.0 - std::exp(-1.0);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
    hits += simulate(m, 2.0, 20000, seed).contains(1, p) ? 1 : 0;
  EXPECT_GE(hits, 190);
}

}  // namespace
}  // namespace depmark::test
