// Dependability metrics, coverage sweeps, requirement checks and table audits.
#ifndef DEPMARK_ANALYSIS_HPP
#define DEPMARK_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "solver.hpp"

namespace depmark {

/// R sums the up classes, Pfs the fail-safe states, Pfu the fail-unsafe
/// states, and S = R + Pfs.
struct DependabilityMetrics {
  double t = 0.0;
  double R = 1.0;
  double S = 1.0;
  double Pfs = 0.0;
  double Pfu = 0.0;
};

inline DependabilityMetrics metrics(std::span<const double> dist, const MarkovModel& model,
                                    double t) {
  if (dist.size() != model.size())
    throw LengthMismatch("distribution has " + std::to_string(dist.size()) +
                         " entries, model has " + std::to_string(model.size()) + " states");
  DependabilityMetrics m{t, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < dist.size(); ++i) {
    switch (model.states[i].cls) {
      case StateClass::kOperational:
      case StateClass::kFailOperational: m.R += dist[i]; break;
      case StateClass::kFailSafe: m.Pfs += dist[i]; break;
      case StateClass::kFailUnsafe: m.Pfu += dist[i]; break;
    }
  }
  m.S = m.R + m.Pfs;
  return m;
}

struct SweepRow {
  double value = 0.0;
  DependabilityMetrics metrics;
};

/// Solves the model once per value of `param` at time `t`. Rows come back
/// sorted by value; each row is an independent solve run on its own task.
inline std::vector<SweepRow> sweep(const MarkovModel& model, const std::string& param,
                                   std::vector<double> values, double t,
                                   const SolverConfig& config) {
  if (!model.params.count(param)) throw UnknownParameter(param);
  const bool coverage = model.coverage_params.count(param) > 0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0 || (coverage && v > 1.0)) {
      std::ostringstream os;
      os << "value " << v << " for " << param << " is outside its domain"
         << (coverage ? " [0,1]" : " [0,inf)");
      throw DomainError(os.str());
    }
  }
  std::sort(values.begin(), values.end());

  auto solve_one = [&model, &param, &config, t](double v) {
    MarkovModel m = model.with_params({{param, v}});
    try {
      return SweepRow{v, metrics(solve_at(m, config, t), m, t)};
    } catch (const NumericFailure& e) {
      std::ostringstream os;
      os << param << " = " << v << ": " << e.what();
      throw NumericFailure(os.str());
    } catch (const Error& e) {
      std::ostringstream os;
      os << param << " = " << v << ": " << e.what();
      throw DomainError(os.str());
    }
  };
  std::vector<std::future<SweepRow>> jobs;
  for (double v : values) jobs.push_back(std::async(std::launch::async, solve_one, v));
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

inline constexpr double kReliabilityTarget = 0.99;
inline constexpr double kUnsafeLimit = 1e-3;

struct RequirementVerdict {
  bool reliability_ok = false;  // R >= 0.99
  bool unsafe_ok = false;       // Pfu <= 1e-3
  double horizon = 0.0;
};

/// Both thresholds are inclusive.
inline RequirementVerdict check_requirements(const DependabilityMetrics& m) {
  return {m.R >= kReliabilityTarget, m.Pfu <= kUnsafeLimit, m.t};
}

/// A row of a metrics table, computed or transcribed.
struct AuditRow {
  double param = 0.0;
  double R = 0.0;
  double S = 0.0;
  double Pfs = 0.0;
  double Pfu = 0.0;
};

inline AuditRow to_audit_row(const SweepRow& r) {
  return {r.value, r.metrics.R, r.metrics.S, r.metrics.Pfs, r.metrics.Pfu};
}

inline constexpr double kSafetyIdentityBand = 1e-6;
inline constexpr double kTotalMassBand = 1e-3;

struct AuditFinding {
  AuditRow row;
  double safety_defect = 0.0;  // R + Pfs - S
  double total_defect = 0.0;   // S + Pfu - 1
  bool safety_flagged = false;
  bool total_flagged = false;
  bool flagged() const { return safety_flagged || total_flagged; }
};

struct AuditReport {
  std::vector<AuditFinding> rows;
  std::size_t flagged_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const AuditFinding& f) { return f.flagged(); }));
  }
};

/// Checks S = R + Pfs (band 1e-6) and S + Pfu = 1 (band 1e-3) on each row.
/// The loose second band tolerates rounding in transcribed tables.
inline AuditReport audit_table(std::span<const AuditRow> rows) {
  AuditReport report;
  for (const auto& r : rows) {
    AuditFinding f{r, r.R + r.Pfs - r.S, r.S + r.Pfu - 1.0, false, false};
    f.safety_flagged = !(std::abs(f.safety_defect) <= kSafetyIdentityBand);
    f.total_flagged = !(std::abs(f.total_defect) <= kTotalMassBand);
    report.rows.push_back(f);
  }
  return report;
}

/// Joint metrics of two independent subsystems that must both stay up.
inline DependabilityMetrics compose_independent(const DependabilityMetrics& a,
                                                const DependabilityMetrics& b) {
  if (a.t != b.t) throw TimeMismatch("cannot compose metrics at different times");
  DependabilityMetrics m;
  m.t = a.t;
  m.R = a.R * b.R;
  m.Pfu = a.Pfu + b.Pfu - a.Pfu * b.Pfu;
  m.S = 1.0 - m.Pfu;
  m.Pfs = m.S - m.R;
  return m;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// time_hours, one column per state label, then R, S, Pfs, Pfu.
inline Table export_timeseries(const Trajectory& traj, const MarkovModel& model) {
  Table table;
  table.columns.push_back("time_hours");
  for (const auto& s : model.states) table.columns.push_back(s.label);
  for (const char* c : {"R", "S", "Pfs", "Pfu"}) table.columns.emplace_back(c);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& p = traj.probs[k];
    auto m = metrics(p, model, traj.times[k]);
    std::vector<double> row{traj.times[k]};
    row.insert(row.end(), p.begin(), p.end());
    row.insert(row.end(), {m.R, m.S, m.Pfs, m.Pfu});
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace depmark

#endif  // DEPMARK_ANALYSIS_HPP
