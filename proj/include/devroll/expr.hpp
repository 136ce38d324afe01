// devroll - scalar expression language with forward-mode differentiation
//
// Grammar (EBNF, whitespace ignored):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary { "^" [ "-" ] integer } ;
//   primary = number | variable | "pi" | function "(" expr ")" | "(" expr ")" ;
//   variable = "x" digits | "t" | "u" ;
//   function = "sin" | "cos" | "exp" | "log" | "sqrt" | "tanh" | "atan" ;
//
// "^" binds tighter than unary minus, so "-x0^2" is "-(x0^2)". Binary operators
// are left associative. "u" is only accepted when the parse enables it (variation
// families). Exponents are integer literals.
//
// Predicates (chart domains) are conjunctions of comparisons:
//
//   predicate = comparison { "&&" comparison } ;
//   comparison = expr ("<" | "<=" | ">" | ">=") expr ;

#ifndef DEVROLL_EXPR_HPP
#define DEVROLL_EXPR_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "devroll/core.hpp"

namespace devroll::expr {

// Coordinates x0..x7 plus t and u.
inline constexpr int kMaxCoords = 8;
inline constexpr int kMaxVars = kMaxCoords + 2;

// Value together with partial derivatives with respect to every active variable.
struct DualValue {
  double value = 0.0;
  std::array<double, kMaxVars> partials{};

  static DualValue constant(double v) { return DualValue{v, {}}; }
  static DualValue variable(double v, int slot) {
    DualValue d{v, {}};
    d.partials[static_cast<std::size_t>(slot)] = 1.0;
    return d;
  }
};

DualValue operator+(const DualValue& a, const DualValue& b);
DualValue operator-(const DualValue& a, const DualValue& b);
DualValue operator*(const DualValue& a, const DualValue& b);
DualValue operator/(const DualValue& a, const DualValue& b);
DualValue operator-(const DualValue& a);

enum class Op : std::uint8_t {
  constant, variable, add, sub, mul, div, neg, pow,
  sin, cos, exp, log, sqrt, tanh, atan,
};

struct Node {
  Op op = Op::constant;
  double value = 0.0;  // constant
  int slot = -1;       // variable slot
  int lhs = -1;        // operand (unary) or left operand
  int rhs = -1;        // right operand
  int exponent = 0;    // pow
};

// Immutable expression tree. Cheap to copy (shared node storage).
class Expr {
 public:
  Expr() = default;

  // Parses source over n_vars coordinates x0..x{n_vars-1} and t (and u when allow_u).
  static Expr parse(std::string_view source, int n_vars, bool allow_u = false);
  static Expr constant(double v, int n_vars);

  int n_vars() const noexcept { return n_vars_; }
  bool allows_u() const noexcept { return allow_u_; }
  bool empty() const noexcept { return !nodes_; }
  const Node& root() const { return (*nodes_)[static_cast<std::size_t>(root_)]; }
  const Node& node(int i) const { return (*nodes_)[static_cast<std::size_t>(i)]; }

  double eval(std::span<const double> point, double t, double u = 0.0) const;

  // Derivatives with respect to all slots: [x0..x{n-1}, t, u] at indices [0..n-1, n, n+1].
  DualValue eval_dual(std::span<const double> point, double t, double u = 0.0) const;

  // Value and gradient with respect to the coordinates only.
  std::pair<double, Vec> eval_with_grad(std::span<const double> point, double t) const;

  // Fully parenthesised source that parses back to the same tree.
  std::string print() const;

  bool structurally_equal(const Expr& other) const;

  static constexpr int t_slot(int n_vars) { return n_vars; }
  static constexpr int u_slot(int n_vars) { return n_vars + 1; }

 private:
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;
  int n_vars_ = 0;
  bool allow_u_ = false;
};

inline Expr parse(std::string_view source, int n_vars) { return Expr::parse(source, n_vars); }
inline double eval(const Expr& e, std::span<const double> point, double t) { return e.eval(point, t); }
inline std::pair<double, Vec> eval_with_grad(const Expr& e, std::span<const double> point, double t) {
  return e.eval_with_grad(point, t);
}

enum class Comparison : std::uint8_t { less, less_equal, greater, greater_equal };

// Conjunction of comparisons between expressions; an empty predicate is always true.
class Predicate {
 public:
  struct Clause {
    Expr lhs;
    Expr rhs;
    Comparison cmp;
  };

  Predicate() = default;
  static Predicate parse(std::string_view source, int n_vars);

  // Evaluation errors count as "not satisfied".
  bool holds(std::span<const double> point) const;
  const std::vector<Clause>& clauses() const noexcept { return clauses_; }

 private:
  std::vector<Clause> clauses_;
};

}  // namespace devroll::expr

#endif  // DEVROLL_EXPR_HPP
