// Monte Carlo trajectory simulation over a MarkovModel.
#ifndef DEPMARK_SIMULATE_HPP
#define DEPMARK_SIMULATE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "random.hpp"
#include "solver.hpp"

namespace depmark {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Trials per stream; batch b draws from the base generator jumped b times.
inline constexpr std::uint64_t kTrialsPerBatch = 1 << 16;

struct SimulationResult {
  double t = 0.0;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> counts;  // state order
  std::vector<double> estimates;      // count / trials
  // 99% Wilson score interval per state; half_width = (upper - lower) / 2.
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> half_widths;

  bool contains(std::size_t state, double p) const {
    return p >= lower[state] && p <= upper[state];
  }
};

/// Wilson score interval for `count` successes in `trials` at quantile z.
inline std::pair<double, double> wilson_interval(std::uint64_t count, std::uint64_t trials,
                                                 double z = kZ99) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(count) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  // at the extremes the bound is exactly 0 or 1, rounding aside
  return {count == 0 ? 0.0 : std::max(0.0, centre - half),
          count == trials ? 1.0 : std::min(1.0, centre + half)};
}

namespace detail {

struct Sampler {
  std::vector<double> exit;               // total exit rate per state
  std::vector<std::vector<double>> cum;   // cumulative off-diagonal rates
  std::vector<double> init_cum;
};

inline std::size_t pick(const std::vector<double>& cum, double u) {
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  auto i = static_cast<std::size_t>(it - cum.begin());
  if (i >= cum.size()) {
    // u landed on the rounding gap at the top; take the last live entry
    i = cum.size() - 1;
    while (i > 0 && cum[i] == cum[i - 1]) --i;
  }
  return i;
}

inline void run_batch(const Sampler& s, double t, std::uint64_t trials, Xoshiro256 rng,
                      std::vector<std::uint64_t>& counts) {
  for (std::uint64_t k = 0; k < trials; ++k) {
    std::size_t state = pick(s.init_cum, rng.uniform() * s.init_cum.back());
    double now = 0.0;
    for (;;) {
      double rate = s.exit[state];
      if (rate <= 0.0) break;
      now += rng.exponential(rate);
      if (now > t) break;
      state = pick(s.cum[state], rng.uniform() * s.cum[state].back());
    }
    ++counts[state];
  }
}

}  // namespace detail

/// Simulates `trials` independent trajectories to time t and records the
/// occupied state. Holding times are exponential in the total exit rate and
/// the successor is drawn proportionally to the competing rates. Counts are
/// bit-identical for a given (model, t, trials, seed) regardless of
/// `threads`.
inline SimulationResult simulate(const MarkovModel& model, double t, std::uint64_t trials,
                                 std::uint64_t seed, unsigned threads = 0) {
  detail::require_valid(model);
  if (trials == 0) throw DomainError("trials must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");

  const GeneratorMatrix gen = build_generator(model);
  const std::size_t n = gen.n();
  detail::Sampler sampler;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> cum;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) acc += gen.q(i, j);
      cum.push_back(acc);
    }
    sampler.exit.push_back(acc);
    sampler.cum.push_back(std::move(cum));
  }
  double acc = 0.0;
  for (double p : model.initial_vector()) sampler.init_cum.push_back(acc += p);

  const std::uint64_t batches = (trials + kTrialsPerBatch - 1) / kTrialsPerBatch;
  std::vector<std::vector<std::uint64_t>> partial(batches, std::vector<std::uint64_t>(n, 0));
  const Xoshiro256 base(seed);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b; (b = next.fetch_add(1)) < batches;) {
      Xoshiro256 rng = base;
      for (std::uint64_t j = 0; j < b; ++j) rng.jump();
      std::uint64_t size = std::min(kTrialsPerBatch, trials - b * kTrialsPerBatch);
      detail::run_batch(sampler, t, size, rng, partial[b]);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, batches));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
  }

  SimulationResult r;
  r.t = t;
  r.trials = trials;
  r.counts.assign(n, 0);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < n; ++i) r.counts[i] += part[i];
  for (std::size_t i = 0; i < n; ++i) {
    r.estimates.push_back(static_cast<double>(r.counts[i]) / static_cast<double>(trials));
    auto [lo, hi] = wilson_interval(r.counts[i], trials);
    r.lower.push_back(lo);
    r.upper.push_back(hi);
    r.half_widths.push_back((hi - lo) / 2);
  }
  return r;
}

}  // namespace depmark

#endif  // DEPMARK_SIMULATE_HPP
