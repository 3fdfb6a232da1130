// Classified Markov reliability models and their generator matrices.
#ifndef DEPMARK_MODEL_HPP
#define DEPMARK_MODEL_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "rate_expr.hpp"

namespace depmark {

/// Failure-mode class of a state. Operational and FailOperational count as
/// "up"; FailSafe and FailUnsafe are failures.
enum class StateClass { kOperational, kFailOperational, kFailSafe, kFailUnsafe };

inline std::string_view to_string(StateClass c) {
  switch (c) {
    case StateClass::kOperational: return "operational";
    case StateClass::kFailOperational: return "fail_operational";
    case StateClass::kFailSafe: return "fail_safe";
    case StateClass::kFailUnsafe: return "fail_unsafe";
  }
  return "?";
}

inline std::optional<StateClass> state_class_from(std::string_view s) {
  if (s == "operational") return StateClass::kOperational;
  if (s == "fail_operational") return StateClass::kFailOperational;
  if (s == "fail_safe") return StateClass::kFailSafe;
  if (s == "fail_unsafe") return StateClass::kFailUnsafe;
  return std::nullopt;
}

inline bool is_up(StateClass c) {
  return c == StateClass::kOperational || c == StateClass::kFailOperational;
}

struct State {
  int id = 0;
  std::string label;
  StateClass cls = StateClass::kOperational;

  friend bool operator==(const State&, const State&) = default;
};

enum class TransitionKind { kFailure, kRepair };

struct Transition {
  int from = 0;
  int to = 0;
  RateExpr rate;
  TransitionKind kind = TransitionKind::kFailure;  // annotation only

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct MarkovModel {
  std::vector<State> states;
  std::vector<Transition> transitions;
  ParameterSet params;
  std::map<int, double> initial;
  std::set<std::string> coverage_params;
  std::optional<double> horizon;  // hours, from `option horizon`

  std::size_t size() const { return states.size(); }

  /// Position of state `id` in `states`, or nullopt.
  std::optional<std::size_t> index_of(int id) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].id == id) return i;
    return std::nullopt;
  }

  std::size_t require_index(int id) const {
    auto i = index_of(id);
    if (!i) throw DomainError("unknown state " + std::to_string(id));
    return *i;
  }

  /// Initial distribution laid out in state order.
  std::vector<double> initial_vector() const {
    std::vector<double> p(states.size(), 0.0);
    for (const auto& [id, prob] : initial) p[require_index(id)] += prob;
    return p;
  }

  /// Copy with parameter values replaced; the names must already exist.
  MarkovModel with_params(const ParameterSet& overrides) const {
    MarkovModel m = *this;
    for (const auto& [name, value] : overrides) {
      auto it = m.params.find(name);
      if (it == m.params.end()) throw UnknownParameter(name);
      it->second = value;
    }
    return m;
  }
};

/// Equality that ignores declaration order of states and transitions.
inline bool structurally_equal(const MarkovModel& a, const MarkovModel& b) {
  auto states = [](const MarkovModel& m) {
    auto s = m.states;
    std::sort(s.begin(), s.end(), [](const State& x, const State& y) { return x.id < y.id; });
    return s;
  };
  auto transitions = [](const MarkovModel& m) {
    std::vector<std::tuple<int, int, std::string, TransitionKind>> t;
    for (const auto& tr : m.transitions) t.emplace_back(tr.from, tr.to, tr.rate.to_string(), tr.kind);
    std::sort(t.begin(), t.end());
    return t;
  };
  return states(a) == states(b) && transitions(a) == transitions(b) && a.params == b.params &&
         a.initial == b.initial && a.coverage_params == b.coverage_params &&
         a.horizon == b.horizon;
}

/// Dense CTMC generator Q in per-hour units, rows in model state order.
struct GeneratorMatrix {
  Matrix q;

  std::size_t n() const { return q.rows(); }

  /// Largest exit rate, max |Q_ii|.
  double max_exit_rate() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n(); ++i) m = std::max(m, -q(i, i));
    return m;
  }
};

/// Off-diagonals sum the evaluated rates of every i->j transition; the
/// diagonal is minus the off-diagonal row sum so rows conserve probability.
inline GeneratorMatrix build_generator(const MarkovModel& model) {
  const std::size_t n = model.size();
  GeneratorMatrix g{Matrix(n, n)};
  for (const auto& tr : model.transitions) {
    if (tr.from == tr.to)
      throw DomainError("self-loop on state " + std::to_string(tr.from));
    std::size_t i = model.require_index(tr.from);
    std::size_t j = model.require_index(tr.to);
    g.q(i, j) += evaluate_rate(tr.rate, model.params);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) out += g.q(i, j);
    g.q(i, i) = -out;
  }
  return g;
}

/// States with no outgoing transitions.
inline std::set<int> absorbing_states(const MarkovModel& model) {
  std::set<int> ids;
  for (const auto& s : model.states) ids.insert(s.id);
  for (const auto& tr : model.transitions) ids.erase(tr.from);
  return ids;
}

}  // namespace depmark

#endif  // DEPMARK_MODEL_HPP
