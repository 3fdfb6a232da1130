// Symbolic transition rates over named parameters.
#ifndef DEPMARK_RATE_EXPR_HPP
#define DEPMARK_RATE_EXPR_HPP

#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "error.hpp"

namespace depmark {

/// Parameter values: rates per hour, coverages dimensionless.
using ParameterSet = std::map<std::string, double>;

/// Immutable expression tree: Constant | ParamRef | Sum | Difference | Product.
///
/// Nodes are shared, so copies are cheap and the tree can be read from
/// several threads at once.
class RateExpr {
 public:
  enum class Op { kSum, kDifference, kProduct };

  struct Constant {
    double value;
  };
  struct ParamRef {
    std::string name;
  };
  struct Binary;
  using Node = std::variant<Constant, ParamRef, Binary>;

  RateExpr();

  static RateExpr constant(double value);
  static RateExpr param(std::string name);
  static RateExpr binary(Op op, RateExpr lhs, RateExpr rhs);

  const Node& node() const;

  /// Arithmetic value; throws UnknownParameter on an unresolved name.
  double evaluate(const ParameterSet& params) const;

  /// Calls `fn(name)` for every parameter reference in the tree.
  template <typename Fn>
  void for_each_param(Fn&& fn) const;

  /// Source form accepted by the model parser; parenthesised only where
  /// needed to reproduce the same tree.
  std::string to_string() const { return render(0); }

  friend bool operator==(const RateExpr& a, const RateExpr& b);

 private:
  explicit RateExpr(Node node);

  static int precedence(Op op) { return op == Op::kProduct ? 2 : 1; }

  // `min_prec` is the binding strength the surrounding context requires.
  std::string render(int min_prec) const;

  std::shared_ptr<const Node> node_;
};

struct RateExpr::Binary {
  Op op;
  RateExpr lhs;
  RateExpr rhs;
};

inline RateExpr::RateExpr(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}
inline const RateExpr::Node& RateExpr::node() const { return *node_; }
inline RateExpr::RateExpr() : RateExpr(Constant{0.0}) {}
inline RateExpr RateExpr::constant(double value) { return RateExpr(Constant{value}); }
inline RateExpr RateExpr::param(std::string name) { return RateExpr(ParamRef{std::move(name)}); }
inline RateExpr RateExpr::binary(Op op, RateExpr lhs, RateExpr rhs) {
  return RateExpr(Binary{op, std::move(lhs), std::move(rhs)});
}

inline double RateExpr::evaluate(const ParameterSet& params) const {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ParamRef>) {
          auto it = params.find(n.name);
          if (it == params.end()) throw UnknownParameter(n.name);
          return it->second;
        } else {
          double a = n.lhs.evaluate(params);
          double b = n.rhs.evaluate(params);
          switch (n.op) {
            case Op::kSum: return a + b;
            case Op::kDifference: return a - b;
            case Op::kProduct: return a * b;
          }
          return 0.0;
        }
      },
      *node_);
}

template <typename Fn>
void RateExpr::for_each_param(Fn&& fn) const {
  if (const auto* p = std::get_if<ParamRef>(node_.get())) {
    fn(p->name);
  } else if (const auto* b = std::get_if<Binary>(node_.get())) {
    b->lhs.for_each_param(fn);
    b->rhs.for_each_param(fn);
  }
}

inline bool operator==(const RateExpr& a, const RateExpr& b) {
  if (a.node_ == b.node_) return true;
  const RateExpr::Node& x = *a.node_;
  const RateExpr::Node& y = *b.node_;
  if (x.index() != y.index()) return false;
  if (const auto* c = std::get_if<RateExpr::Constant>(&x))
    return c->value == std::get<RateExpr::Constant>(y).value;
  if (const auto* p = std::get_if<RateExpr::ParamRef>(&x))
    return p->name == std::get<RateExpr::ParamRef>(y).name;
  const auto& bx = std::get<RateExpr::Binary>(x);
  const auto& by = std::get<RateExpr::Binary>(y);
  return bx.op == by.op && bx.lhs == by.lhs && bx.rhs == by.rhs;
}

inline std::string RateExpr::render(int min_prec) const {
  if (const auto* c = std::get_if<Constant>(node_.get())) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, c->value);
    return std::string(buf, res.ptr);
  }
  if (const auto* p = std::get_if<ParamRef>(node_.get())) return p->name;
  const auto& b = std::get<Binary>(*node_);
  int prec = precedence(b.op);
  const char* sym = b.op == Op::kSum ? " + " : b.op == Op::kDifference ? " - " : " * ";
  // Left-associative grammar: the right operand needs one level more.
  std::string s = b.lhs.render(prec) + sym + b.rhs.render(prec + 1);
  return prec < min_prec ? "(" + s + ")" : s;
}

inline RateExpr operator+(RateExpr a, RateExpr b) {
  return RateExpr::binary(RateExpr::Op::kSum, std::move(a), std::move(b));
}
inline RateExpr operator-(RateExpr a, RateExpr b) {
  return RateExpr::binary(RateExpr::Op::kDifference, std::move(a), std::move(b));
}
inline RateExpr operator*(RateExpr a, RateExpr b) {
  return RateExpr::binary(RateExpr::Op::kProduct, std::move(a), std::move(b));
}

/// Evaluates a transition rate: must be finite and nonnegative.
inline double evaluate_rate(const RateExpr& expr, const ParameterSet& params) {
  double v = expr.evaluate(params);
  if (!std::isfinite(v) || v < 0.0) throw NegativeRate(v);
  return v;
}

}  // namespace depmark

#endif  // DEPMARK_RATE_EXPR_HPP
