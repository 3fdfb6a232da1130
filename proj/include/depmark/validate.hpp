// Structural checks over a MarkovModel.
#ifndef DEPMARK_VALIDATE_HPP
#define DEPMARK_VALIDATE_HPP

#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "model.hpp"

namespace depmark {

enum class Severity { kWarning, kFatal };

enum class FindingKind {
  kDanglingReference,
  kSelfLoop,
  kDuplicateState,
  kEmptyLabel,
  kInitialSumDefect,
  kInitialOutOfRange,
  kUnresolvedParameter,
  kInvalidParameter,
  kCoverageOutOfRange,
  kUnreachableState,
  kTransitionFromFailure,
};

/// One finding. `subject` names what it is about ("trans:3", "param:C",
/// "init:2", "state:4", "init") so callers can map it back to source.
struct Finding {
  Severity severity;
  FindingKind kind;
  std::string message;
  std::string subject;
};

struct ValidationReport {
  std::vector<Finding> findings;
  double initial_defect = 0.0;  // 1 - sum of initial probabilities

  bool has_fatal() const {
    for (const auto& f : findings)
      if (f.severity == Severity::kFatal) return true;
    return false;
  }
  std::vector<Finding> of_kind(FindingKind kind) const {
    std::vector<Finding> out;
    for (const auto& f : findings)
      if (f.kind == kind) out.push_back(f);
    return out;
  }
};

/// Ids reachable from the support of the initial distribution.
inline std::set<int> reachable_states(const MarkovModel& model) {
  std::map<int, std::vector<int>> succ;
  for (const auto& tr : model.transitions) succ[tr.from].push_back(tr.to);
  std::set<int> seen;
  std::deque<int> queue;
  for (const auto& [id, p] : model.initial)
    if (p > 0.0 && seen.insert(id).second) queue.push_back(id);
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int t : succ[s])
      if (seen.insert(t).second) queue.push_back(t);
  }
  return seen;
}

inline ValidationReport validate(const MarkovModel& model) {
  ValidationReport report;
  auto add = [&](Severity sev, FindingKind kind, std::string msg, std::string subject) {
    report.findings.push_back({sev, kind, std::move(msg), std::move(subject)});
  };

  std::set<int> ids;
  std::map<int, StateClass> cls;
  for (const auto& s : model.states) {
    std::string subj = "state:" + std::to_string(s.id);
    if (!ids.insert(s.id).second)
      add(Severity::kFatal, FindingKind::kDuplicateState,
          "duplicate state id " + std::to_string(s.id), subj);
    if (s.label.empty())
      add(Severity::kFatal, FindingKind::kEmptyLabel,
          "state " + std::to_string(s.id) + " has an empty label", subj);
    cls[s.id] = s.cls;
  }

  for (const auto& [name, value] : model.params) {
    std::string subj = "param:" + name;
    if (!std::isfinite(value) || value < 0.0) {
      add(Severity::kFatal, FindingKind::kInvalidParameter,
          "parameter " + name + " must be finite and >= 0", subj);
    } else if (model.coverage_params.count(name) && value > 1.0) {
      std::ostringstream os;
      os << "coverage parameter " << name << " = " << value << " outside [0,1]";
      add(Severity::kFatal, FindingKind::kCoverageOutOfRange, os.str(), subj);
    }
  }
  for (const auto& name : model.coverage_params)
    if (!model.params.count(name))
      add(Severity::kFatal, FindingKind::kUnresolvedParameter,
          "coverage designation for undeclared parameter " + name, "param:" + name);

  std::set<std::string> reported_params;
  for (std::size_t k = 0; k < model.transitions.size(); ++k) {
    const auto& tr = model.transitions[k];
    std::string subj = "trans:" + std::to_string(k);
    std::string arc = std::to_string(tr.from) + " -> " + std::to_string(tr.to);
    for (int end : {tr.from, tr.to})
      if (!ids.count(end))
        add(Severity::kFatal, FindingKind::kDanglingReference,
            "transition " + arc + " references undeclared state " + std::to_string(end), subj);
    if (tr.from == tr.to)
      add(Severity::kFatal, FindingKind::kSelfLoop, "self-loop transition " + arc, subj);
    tr.rate.for_each_param([&](const std::string& name) {
      if (!model.params.count(name) && reported_params.insert(name).second)
        add(Severity::kFatal, FindingKind::kUnresolvedParameter,
            "transition " + arc + " uses undeclared parameter " + name, subj);
    });
    auto it = cls.find(tr.from);
    if (it != cls.end() &&
        (it->second == StateClass::kFailSafe || it->second == StateClass::kFailUnsafe))
      add(Severity::kWarning, FindingKind::kTransitionFromFailure,
          "transition " + arc + " leaves failure state " + std::to_string(tr.from), subj);
  }

  double sum = 0.0;
  for (const auto& [id, p] : model.initial) {
    std::string subj = "init:" + std::to_string(id);
    if (!ids.count(id))
      add(Severity::kFatal, FindingKind::kDanglingReference,
          "initial distribution references undeclared state " + std::to_string(id), subj);
    if (!(p >= 0.0 && p <= 1.0))
      add(Severity::kFatal, FindingKind::kInitialOutOfRange,
          "initial probability of state " + std::to_string(id) + " outside [0,1]", subj);
    sum += p;
  }
  report.initial_defect = 1.0 - sum;
  if (!(std::abs(1.0 - sum) <= 1e-12)) {
    std::ostringstream os;
    os << "initial distribution sums to " << sum << " (defect " << 1.0 - sum << ")";
    add(Severity::kFatal, FindingKind::kInitialSumDefect, os.str(), "init");
  }

  if (!report.has_fatal()) {
    auto reach = reachable_states(model);
    for (const auto& s : model.states)
      if (!reach.count(s.id))
        add(Severity::kWarning, FindingKind::kUnreachableState,
            "state " + std::to_string(s.id) + " (" + s.label +
                ") is unreachable from the initial distribution",
            "state:" + std::to_string(s.id));
  }
  return report;
}

}  // namespace depmark

#endif  // DEPMARK_VALIDATE_HPP
