// Transient state-probability solvers.
#ifndef DEPMARK_SOLVER_HPP
#define DEPMARK_SOLVER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "validate.hpp"

namespace depmark {

enum class Method { kUniformization, kMatrixExp, kEuler, kPaperLiteral };

/// Six months, 365 * 24 / 2 hours.
inline constexpr double kSixMonthsHours = 4380.0;

struct SolverConfig {
  Method method = Method::kUniformization;
  double eps = 1e-12;   // Poisson tail truncation
  double dt = 1.0;      // step in hours for Euler and the printed equations
  double horizon = kSixMonthsHours;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> probs;  // one row per time, state order

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Mass leak of the printed update equations. `per_step[k]` is 1 - sum(p)
/// for trajectory row k, so entry 0 is the defect of the start vector and
/// entry k the defect after step k.
struct MassDefectReport {
  std::vector<double> per_step;
  double max_abs = 0.0;
};

struct PaperLiteralResult {
  Trajectory trajectory;
  MassDefectReport defects;
};

/// Hard cap on Poisson terms for a single time point.
inline constexpr std::size_t kMaxPoissonTerms = 10'000'000;

/// Truncated Poisson(mean) weights, normalised to sum to 1.
struct PoissonWindow {
  std::size_t left = 0;
  std::vector<double> weights;  // weights[k - left]
  std::size_t right() const { return left + weights.size() - 1; }
};

/// Weights start at the mode with value 1 and follow the ratio recurrence
/// outwards, so nothing underflows; each side stops once a geometric bound
/// on its remaining tail falls below eps/2 of the accumulated mass.
inline PoissonWindow poisson_window(double mean, double eps) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw NumericFailure("invalid Poisson mean");
  if (mean == 0.0) return {0, {1.0}};
  const auto mode = static_cast<std::size_t>(std::floor(mean));
  std::vector<double> right{1.0};
  double total = 1.0;
  for (std::size_t k = mode;; ++k) {
    double ratio = mean / static_cast<double>(k + 2);
    double w = right.back();
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) <= 0.5 * eps * total) break;
    if (right.size() >= kMaxPoissonTerms)
      throw NumericFailure("uniformization needs more than 1e7 Poisson terms");
    right.push_back(w * mean / static_cast<double>(k + 1));
    total += right.back();
  }
  std::vector<double> left;
  double w = 1.0;
  for (std::size_t k = mode; k > 0; --k) {
    double ratio = static_cast<double>(k) / mean;
    if (ratio < 1.0 && w * ratio / (1.0 - ratio) <= 0.5 * eps * total) break;
    if (left.size() + right.size() >= kMaxPoissonTerms)
      throw NumericFailure("uniformization needs more than 1e7 Poisson terms");
    w *= ratio;
    left.push_back(w);
    total += w;
  }
  PoissonWindow win;
  win.left = mode - left.size();
  win.weights.assign(left.rbegin(), left.rend());
  win.weights.insert(win.weights.end(), right.begin(), right.end());
  for (double& x : win.weights) x /= total;
  return win;
}

namespace detail {

inline void require_valid(const MarkovModel& model) {
  auto report = validate(model);
  for (const auto& f : report.findings)
    if (f.severity == Severity::kFatal) throw DomainError("invalid model: " + f.message);
}

inline void require_grid(const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || !std::isfinite(grid[k]))
      throw DomainError("grid times must be finite and >= 0");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw DomainError("grid times must be strictly ascending");
  }
}

inline void require_config(const SolverConfig& c) {
  if (!(c.eps > 0.0)) throw DomainError("eps must be > 0");
  if (!(c.dt > 0.0)) throw DomainError("dt must be > 0");
  if (!(c.horizon >= 0.0)) throw DomainError("horizon must be >= 0");
}

inline void clamp_rows(Trajectory& t) {
  for (auto& row : t.probs)
    for (double& x : row) x = std::clamp(x, 0.0, 1.0);
}

inline Trajectory uniformization(const MarkovModel& model, const std::vector<double>& grid,
                                 double eps) {
  const GeneratorMatrix gen = build_generator(model);
  const std::size_t n = gen.n();
  const std::vector<double> p0 = model.initial_vector();
  Trajectory out{grid, std::vector<std::vector<double>>(grid.size(), std::vector<double>(n, 0.0))};
  if (grid.empty()) return out;

  const double rate = gen.max_exit_rate();
  if (rate == 0.0) {
    for (auto& row : out.probs) row = p0;
    return out;
  }
  Matrix step = Matrix::identity(n) + gen.q * (1.0 / rate);

  std::vector<PoissonWindow> windows;
  std::size_t last = 0;
  for (double t : grid) {
    windows.push_back(poisson_window(rate * t, eps));
    last = std::max(last, windows.back().right());
  }
  std::vector<double> v = p0;
  for (std::size_t k = 0;; ++k) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto& w = windows[g];
      if (k < w.left || k > w.right()) continue;
      double c = w.weights[k - w.left];
      for (std::size_t i = 0; i < n; ++i) out.probs[g][i] += c * v[i];
    }
    if (k == last) break;
    v = row_times(v, step);
  }
  return out;
}

inline Trajectory matrix_exp(const MarkovModel& model, const std::vector<double>& grid) {
  const GeneratorMatrix gen = build_generator(model);
  const std::vector<double> p0 = model.initial_vector();
  Trajectory out{grid, {}};
  for (double t : grid) out.probs.push_back(row_times(p0, expm(gen.q * t)));
  return out;
}

inline Trajectory euler(const MarkovModel& model, const std::vector<double>& grid, double dt) {
  const GeneratorMatrix gen = build_generator(model);
  if (dt * gen.max_exit_rate() >= 1.0)
    throw StepTooLarge("Euler step dt = " + std::to_string(dt) +
                       " violates dt * max|Q_ii| < 1 (max exit rate " +
                       std::to_string(gen.max_exit_rate()) + ")");
  const std::size_t n = gen.n();
  std::vector<double> p = model.initial_vector();
  Trajectory out{grid, {}};
  double now = 0.0;
  for (double t : grid) {
    double span = t - now;
    if (span > 0.0) {
      auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
      steps = std::max<std::size_t>(steps, 1);
      double h = span / static_cast<double>(steps);
      for (std::size_t s = 0; s < steps; ++s) {
        std::vector<double> flow = row_times(p, gen.q);
        for (std::size_t i = 0; i < n; ++i) p[i] += h * flow[i];
      }
    }
    now = t;
    out.probs.push_back(p);
  }
  return out;
}

// Ids 1..7 with the feed-water classes and its thirteen arcs.
inline void require_feedwater_shape(const MarkovModel& model) {
  static constexpr std::array<StateClass, 7> classes = {
      StateClass::kOperational,     StateClass::kFailOperational, StateClass::kFailOperational,
      StateClass::kOperational,     StateClass::kFailOperational, StateClass::kFailSafe,
      StateClass::kFailUnsafe};
  static const std::set<std::pair<int, int>> arcs = {
      {1, 2}, {1, 7}, {2, 1}, {2, 3}, {2, 7}, {3, 2}, {3, 6},
      {3, 7}, {4, 5}, {4, 7}, {5, 4}, {5, 6}, {5, 7}};
  if (model.size() != 7) throw ShapeMismatch("printed equations need exactly 7 states");
  for (std::size_t i = 0; i < 7; ++i)
    if (model.states[i].id != static_cast<int>(i + 1) || model.states[i].cls != classes[i])
      throw ShapeMismatch("state " + std::to_string(i + 1) +
                          " does not match the feed-water state layout");
  std::set<std::pair<int, int>> seen;
  for (const auto& tr : model.transitions) seen.emplace(tr.from, tr.to);
  if (seen != arcs) throw ShapeMismatch("transition arcs do not match the feed-water diagram");
}

inline double param(const MarkovModel& model, const char* name) {
  auto it = model.params.find(name);
  if (it == model.params.end()) throw UnknownParameter(name);
  return it->second;
}

}  // namespace detail

/// One step of the seven printed update equations, verbatim: no inflow from
/// P1 to P2, (lambda2 + mu) and (2 lambda4 + mu) jointly scaled by C, and no
/// conservation correction.
inline std::array<double, 7> printed_step(const std::array<double, 7>& p, double l1, double l2,
                                          double l3, double l4, double c, double mu,
                                          double dt) {
  const double u = 1.0 - c;
  return {
      (1.0 - l1 * c * dt) * p[0] + mu * dt * p[1],
      (1.0 - (l2 + mu) * c * dt) * p[1] + 2.0 * mu * dt * p[2],
      (l2 * c * dt) * p[1] + (1.0 - (l2 + 2.0 * mu) * c * dt) * p[2],
      (1.0 - 2.0 * l3 * c * dt) * p[3] + mu * dt * p[4],
      2.0 * l3 * c * dt * p[3] + (1.0 - (2.0 * l4 + mu) * c * dt) * p[4],
      l2 * c * dt * p[2] + 2.0 * l4 * c * dt * p[4] + p[5],
      l1 * u * dt * p[0] + l2 * u * dt * p[1] + l2 * u * dt * p[2] + 2.0 * l3 * u * dt * p[3] +
          2.0 * l4 * u * dt * p[4] + p[6],
  };
}

/// Iterates the printed equations from time 0 to config.horizon in steps of
/// config.dt. Needs parameters LAMBDA1..LAMBDA4, C and MU.
inline PaperLiteralResult solve_paper_literal(const MarkovModel& model,
                                              const SolverConfig& config) {
  detail::require_config(config);
  detail::require_feedwater_shape(model);
  const double l1 = detail::param(model, "LAMBDA1");
  const double l2 = detail::param(model, "LAMBDA2");
  const double l3 = detail::param(model, "LAMBDA3");
  const double l4 = detail::param(model, "LAMBDA4");
  const double c = detail::param(model, "C");
  const double mu = detail::param(model, "MU");

  const double exact = config.horizon / config.dt;
  const double steps = std::round(exact);
  if (std::abs(steps - exact) > 1e-9 * std::max(1.0, exact))
    throw DomainError("horizon must be a whole number of dt steps");

  std::array<double, 7> p{};
  auto p0 = model.initial_vector();
  std::copy(p0.begin(), p0.end(), p.begin());

  PaperLiteralResult res;
  auto record = [&](double t) {
    double sum = 0.0;
    for (double x : p) sum += x;
    res.trajectory.times.push_back(t);
    res.trajectory.probs.emplace_back(p.begin(), p.end());
    res.defects.per_step.push_back(1.0 - sum);
    res.defects.max_abs = std::max(res.defects.max_abs, std::abs(1.0 - sum));
  };
  record(0.0);
  const auto count = static_cast<std::size_t>(steps);
  for (std::size_t k = 1; k <= count; ++k) {
    p = printed_step(p, l1, l2, l3, l4, c, mu, config.dt);
    record(static_cast<double>(k) * config.dt);
  }
  return res;
}

/// Printed-equation trajectory sampled at `grid`; every grid time must be a
/// whole number of dt steps.
inline PaperLiteralResult paper_literal_grid(const MarkovModel& model, SolverConfig config,
                                             const std::vector<double>& grid) {
  detail::require_grid(grid);
  PaperLiteralResult out;
  if (grid.empty()) return out;
  config.horizon = grid.back();
  std::vector<std::size_t> rows;
  for (double t : grid) {
    double exact = t / config.dt;
    double k = std::round(exact);
    if (std::abs(k - exact) > 1e-9 * std::max(1.0, exact))
      throw DomainError("grid time " + std::to_string(t) + " is not a multiple of dt");
    rows.push_back(static_cast<std::size_t>(k));
  }
  config.horizon = static_cast<double>(rows.back()) * config.dt;
  PaperLiteralResult full = solve_paper_literal(model, config);
  out.defects.max_abs = full.defects.max_abs;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.trajectory.times.push_back(grid[g]);
    out.trajectory.probs.push_back(full.trajectory.probs[rows[g]]);
    out.defects.per_step.push_back(full.defects.per_step[rows[g]]);
  }
  return out;
}

/// State probabilities at each grid time. Generator-based methods clamp
/// entries to [0, 1]; the printed-equation method returns raw iterates.
inline Trajectory solve_grid(const MarkovModel& model, const SolverConfig& config,
                             const std::vector<double>& grid) {
  detail::require_config(config);
  detail::require_grid(grid);
  if (config.method == Method::kPaperLiteral)
    return paper_literal_grid(model, config, grid).trajectory;
  detail::require_valid(model);
  Trajectory t;
  switch (config.method) {
    case Method::kUniformization: t = detail::uniformization(model, grid, config.eps); break;
    case Method::kMatrixExp: t = detail::matrix_exp(model, grid); break;
    case Method::kEuler: t = detail::euler(model, grid, config.dt); break;
    case Method::kPaperLiteral: break;
  }
  detail::clamp_rows(t);
  return t;
}

inline std::vector<double> solve_at(const MarkovModel& model, const SolverConfig& config,
                                    double t) {
  return solve_grid(model, config, {t}).probs.front();
}

/// Forward Euler on the generator over {0, dt, 2dt, ..., horizon}.
inline Trajectory solve_euler(const MarkovModel& model, const SolverConfig& config) {
  detail::require_config(config);
  detail::require_valid(model);
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    double t = static_cast<double>(k) * config.dt;
    if (t > config.horizon * (1.0 + 1e-12)) break;
    grid.push_back(std::min(t, config.horizon));
  }
  if (grid.back() < config.horizon) grid.push_back(config.horizon);
  Trajectory t = detail::euler(model, grid, config.dt);
  detail::clamp_rows(t);
  return t;
}

}  // namespace depmark

#endif  // DEPMARK_SOLVER_HPP
