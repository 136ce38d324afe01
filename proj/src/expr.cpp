#include "devroll/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace devroll::expr {

DualValue operator+(const DualValue& a, const DualValue& b) {
  DualValue r{a.value + b.value, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = a.partials[i] + b.partials[i];
  return r;
}

DualValue operator-(const DualValue& a, const DualValue& b) {
  DualValue r{a.value - b.value, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = a.partials[i] - b.partials[i];
  return r;
}

DualValue operator*(const DualValue& a, const DualValue& b) {
  DualValue r{a.value * b.value, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = a.partials[i] * b.value + a.value * b.partials[i];
  return r;
}

DualValue operator/(const DualValue& a, const DualValue& b) {
  const double q = a.value / b.value;
  DualValue r{q, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = (a.partials[i] - q * b.partials[i]) / b.value;
  return r;
}

DualValue operator-(const DualValue& a) {
  DualValue r{-a.value, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = -a.partials[i];
  return r;
}

namespace {

constexpr int kMaxDepth = 200;

// Applies f with derivative df to a dual number (chain rule).
DualValue chain(const DualValue& a, double f, double df) {
  DualValue r{f, {}};
  for (int i = 0; i < kMaxVars; ++i) r.partials[i] = df * a.partials[i];
  return r;
}

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"log", Op::log},
    {"sqrt", Op::sqrt}, {"tanh", Op::tanh}, {"atan", Op::atan},
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view src, int n_vars, bool allow_u)
      : src_(src), n_vars_(n_vars), allow_u_(allow_u) {}

  std::vector<Node> run(int& root) {
    if (src_.find_first_not_of(" \t\r\n") == std::string_view::npos)
      throw ParseError("empty expression", 0);
    root = parse_expr(0);
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return std::move(nodes_);
  }

  // Parses a single expression starting at pos and stops before an unconsumed token.
  int parse_prefix(std::size_t start) {
    pos_ = start;
    return parse_expr(0);
  }

  std::size_t position() {
    skip_ws();
    return pos_;
  }
  std::vector<Node> take_nodes() { return std::move(nodes_); }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int l, int r) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return add(n);
  }

  int parse_expr(int depth) {
    check_depth(depth);
    int lhs = parse_term(depth + 1);
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::add, lhs, parse_term(depth + 1));
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, parse_term(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  int parse_term(int depth) {
    int lhs = parse_unary(depth + 1);
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, parse_unary(depth + 1));
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, parse_unary(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  int parse_unary(int depth) {
    check_depth(depth);
    if (accept('-')) {
      Node n;
      n.op = Op::neg;
      n.lhs = parse_unary(depth + 1);
      return add(n);
    }
    return parse_power(depth + 1);
  }

  int parse_power(int depth) {
    int base = parse_primary(depth + 1);
    while (accept('^')) {
      skip_ws();
      const std::size_t at = pos_;
      bool negative = false;
      if (accept('-')) negative = true;
      skip_ws();
      const std::size_t digits = pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      if (digits == pos_) throw ParseError("expected integer exponent", at);
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
        throw ParseError("exponent must be an integer", at);
      int k = 0;
      auto [p, ec] = std::from_chars(src_.data() + digits, src_.data() + pos_, k);
      if (ec != std::errc{} || k > 1000) throw ParseError("exponent out of range", at);
      (void)p;
      Node n;
      n.op = Op::pow;
      n.lhs = base;
      n.exponent = negative ? -k : k;
      base = add(n);
    }
    return base;
  }

  int parse_primary(int depth) {
    check_depth(depth);
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    const std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr(depth + 1);
      if (!accept(')')) throw ParseError("expected ')'", position());
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
      const std::string_view name = src_.substr(at, pos_ - at);
      for (const auto& f : kFunctions) {
        if (f.name == name) return parse_call(f.op, at, depth);
      }
      if (name == "pi") {
        Node n;
        n.value = std::numbers::pi;
        return add(n);
      }
      Node n;
      n.op = Op::variable;
      n.slot = variable_slot(name, at);
      return add(n);
    }
    throw ParseError(std::string("unexpected '") + c + "'", at);
  }

  int parse_call(Op op, std::size_t at, int depth) {
    if (!accept('(')) throw ParseError("expected '(' after function name", position());
    std::vector<int> args;
    if (!accept(')')) {
      args.push_back(parse_expr(depth + 1));
      while (accept(',')) args.push_back(parse_expr(depth + 1));
      if (!accept(')')) throw ParseError("expected ')'", position());
    }
    if (args.size() != 1)
      throw ParseError("arity mismatch: function takes 1 argument, got " + std::to_string(args.size()), at);
    Node n;
    n.op = op;
    n.lhs = args.front();
    return add(n);
  }

  int parse_number() {
    const std::size_t at = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < src_.size() && is_digit(src_[q])) {
        pos_ = q;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(src_.data() + at, src_.data() + pos_, v);
    if (ec != std::errc{} || p != src_.data() + pos_) throw ParseError("malformed number", at);
    Node n;
    n.value = v;
    return add(n);
  }

  int variable_slot(std::string_view name, std::size_t at) const {
    if (name == "t") return Expr::t_slot(n_vars_);
    if (name == "u") {
      if (!allow_u_) throw ParseError("unknown identifier 'u'", at);
      return Expr::u_slot(n_vars_);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = -1;
      auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc{} && p == name.data() + name.size() && idx >= 0 && idx < n_vars_ &&
          (name.size() == 2 || name[1] != '0'))
        return idx;
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", at);
  }

  void check_depth(int depth) const {
    if (depth > kMaxDepth) throw ParseError("expression nested too deeply", pos_);
  }

  std::string_view src_;
  int n_vars_;
  bool allow_u_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

struct Evaluator {
  const std::vector<Node>& nodes;
  std::span<const double> point;
  double t;
  double u;
  int n_vars;

  double value(int i) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::constant:
        return n.value;
      case Op::variable:
        if (n.slot < n_vars) return point[static_cast<std::size_t>(n.slot)];
        return n.slot == n_vars ? t : u;
      case Op::add:
        return checked(value(n.lhs) + value(n.rhs), "+");
      case Op::sub:
        return checked(value(n.lhs) - value(n.rhs), "-");
      case Op::mul:
        return checked(value(n.lhs) * value(n.rhs), "*");
      case Op::div: {
        const double den = value(n.rhs);
        if (den == 0.0) throw DomainError("division by zero");
        return checked(value(n.lhs) / den, "/");
      }
      case Op::neg:
        return -value(n.lhs);
      case Op::pow: {
        const double b = value(n.lhs);
        if (b == 0.0 && n.exponent < 0) throw DomainError("division by zero in negative power");
        return checked(std::pow(b, n.exponent), "^");
      }
      case Op::sin:
        return std::sin(value(n.lhs));
      case Op::cos:
        return std::cos(value(n.lhs));
      case Op::exp:
        return checked(std::exp(value(n.lhs)), "exp");
      case Op::log: {
        const double a = value(n.lhs);
        if (!(a > 0.0)) throw DomainError("log of non-positive value");
        return std::log(a);
      }
      case Op::sqrt: {
        const double a = value(n.lhs);
        if (a < 0.0) throw DomainError("sqrt of negative value");
        return std::sqrt(a);
      }
      case Op::tanh:
        return std::tanh(value(n.lhs));
      case Op::atan:
        return std::atan(value(n.lhs));
    }
    return 0.0;
  }

  DualValue dual(int i) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::constant:
        return DualValue::constant(n.value);
      case Op::variable: {
        const double v = n.slot < n_vars ? point[static_cast<std::size_t>(n.slot)] : (n.slot == n_vars ? t : u);
        return DualValue::variable(v, n.slot);
      }
      case Op::add:
        return check(dual(n.lhs) + dual(n.rhs), "+");
      case Op::sub:
        return check(dual(n.lhs) - dual(n.rhs), "-");
      case Op::mul:
        return check(dual(n.lhs) * dual(n.rhs), "*");
      case Op::div: {
        const DualValue den = dual(n.rhs);
        if (den.value == 0.0) throw DomainError("division by zero");
        return check(dual(n.lhs) / den, "/");
      }
      case Op::neg:
        return -dual(n.lhs);
      case Op::pow: {
        const DualValue b = dual(n.lhs);
        if (n.exponent == 0) return DualValue::constant(1.0);
        if (b.value == 0.0 && n.exponent < 0) throw DomainError("division by zero in negative power");
        const double f = std::pow(b.value, n.exponent);
        const double df = n.exponent * std::pow(b.value, n.exponent - 1);
        return check(chain(b, f, df), "^");
      }
      case Op::sin: {
        const DualValue a = dual(n.lhs);
        return chain(a, std::sin(a.value), std::cos(a.value));
      }
      case Op::cos: {
        const DualValue a = dual(n.lhs);
        return chain(a, std::cos(a.value), -std::sin(a.value));
      }
      case Op::exp: {
        const DualValue a = dual(n.lhs);
        const double e = std::exp(a.value);
        return check(chain(a, e, e), "exp");
      }
      case Op::log: {
        const DualValue a = dual(n.lhs);
        if (!(a.value > 0.0)) throw DomainError("log of non-positive value");
        return chain(a, std::log(a.value), 1.0 / a.value);
      }
      case Op::sqrt: {
        const DualValue a = dual(n.lhs);
        if (a.value < 0.0) throw DomainError("sqrt of negative value");
        if (a.value == 0.0) throw DomainError("sqrt derivative undefined at zero");
        const double s = std::sqrt(a.value);
        return chain(a, s, 0.5 / s);
      }
      case Op::tanh: {
        const DualValue a = dual(n.lhs);
        const double th = std::tanh(a.value);
        return chain(a, th, 1.0 - th * th);
      }
      case Op::atan: {
        const DualValue a = dual(n.lhs);
        return chain(a, std::atan(a.value), 1.0 / (1.0 + a.value * a.value));
      }
    }
    return {};
  }

  static DualValue check(DualValue d, const char* what) {
    checked(d.value, what);
    for (double p : d.partials) checked(p, what);
    return d;
  }
};

const char* op_symbol(Op op) {
  switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::tanh: return "tanh";
    case Op::atan: return "atan";
    default: return "?";
  }
}

void print_node(const std::vector<Node>& nodes, int i, int n_vars, std::string& out) {
  const Node& n = nodes[static_cast<std::size_t>(i)];
  switch (n.op) {
    case Op::constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::variable:
      if (n.slot < n_vars) {
        out += "x" + std::to_string(n.slot);
      } else {
        out += n.slot == n_vars ? "t" : "u";
      }
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      out += '(';
      print_node(nodes, n.lhs, n_vars, out);
      out += op_symbol(n.op);
      print_node(nodes, n.rhs, n_vars, out);
      out += ')';
      return;
    case Op::neg:
      out += "(-";
      print_node(nodes, n.lhs, n_vars, out);
      out += ')';
      return;
    case Op::pow:
      out += '(';
      print_node(nodes, n.lhs, n_vars, out);
      out += '^';
      out += std::to_string(n.exponent);
      out += ')';
      return;
    default:
      out += op_symbol(n.op);
      out += '(';
      print_node(nodes, n.lhs, n_vars, out);
      out += ')';
      return;
  }
}

bool equal_nodes(const Expr& a, int i, const Expr& b, int j) {
  const Node& x = a.node(i);
  const Node& y = b.node(j);
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::constant:
      return x.value == y.value;
    case Op::variable:
      return x.slot == y.slot;
    case Op::pow:
      return x.exponent == y.exponent && equal_nodes(a, x.lhs, b, y.lhs);
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return equal_nodes(a, x.lhs, b, y.lhs) && equal_nodes(a, x.rhs, b, y.rhs);
    default:
      return equal_nodes(a, x.lhs, b, y.lhs);
  }
}

void check_args(int n_vars, bool allow_u) {
  if (n_vars < 0 || n_vars > kMaxCoords)
    throw InvalidArgument("expressions support at most " + std::to_string(kMaxCoords) + " coordinates");
  (void)allow_u;
}

}  // namespace

Expr Expr::parse(std::string_view source, int n_vars, bool allow_u) {
  check_args(n_vars, allow_u);
  Parser parser(source, n_vars, allow_u);
  Expr e;
  int root = -1;
  e.nodes_ = std::make_shared<const std::vector<Node>>(parser.run(root));
  e.root_ = root;
  e.n_vars_ = n_vars;
  e.allow_u_ = allow_u;
  return e;
}

Expr Expr::constant(double v, int n_vars) {
  check_args(n_vars, false);
  Node n;
  n.value = v;
  Expr e;
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{n});
  e.root_ = 0;
  e.n_vars_ = n_vars;
  return e;
}

double Expr::eval(std::span<const double> point, double t, double u) const {
  if (empty()) throw InvalidArgument("evaluating an empty expression");
  if (point.size() != static_cast<std::size_t>(n_vars_))
    throw InvalidArgument("point has " + std::to_string(point.size()) + " entries, expected " +
                          std::to_string(n_vars_));
  return Evaluator{*nodes_, point, t, u, n_vars_}.value(root_);
}

DualValue Expr::eval_dual(std::span<const double> point, double t, double u) const {
  if (empty()) throw InvalidArgument("evaluating an empty expression");
  if (point.size() != static_cast<std::size_t>(n_vars_))
    throw InvalidArgument("point has " + std::to_string(point.size()) + " entries, expected " +
                          std::to_string(n_vars_));
  return Evaluator{*nodes_, point, t, u, n_vars_}.dual(root_);
}

std::pair<double, Vec> Expr::eval_with_grad(std::span<const double> point, double t) const {
  const DualValue d = eval_dual(point, t);
  Vec g(n_vars_);
  for (int i = 0; i < n_vars_; ++i) g[i] = d.partials[static_cast<std::size_t>(i)];
  return {d.value, g};
}

std::string Expr::print() const {
  std::string out;
  if (!empty()) print_node(*nodes_, root_, n_vars_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const {
  if (empty() || other.empty()) return empty() == other.empty();
  return n_vars_ == other.n_vars_ && equal_nodes(*this, root_, other, other.root_);
}

Predicate Predicate::parse(std::string_view source, int n_vars) {
  Predicate pred;
  if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) return pred;
  std::size_t start = 0;
  for (;;) {
    const std::size_t amp = source.find("&&", start);
    const std::string_view clause = source.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
    // Locate the single comparison operator of the clause.
    std::size_t op_at = std::string_view::npos;
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (clause[i] == '<' || clause[i] == '>') {
        if (op_at != std::string_view::npos) throw ParseError("more than one comparison in clause", start + i);
        op_at = i;
      }
    }
    if (op_at == std::string_view::npos) throw ParseError("expected comparison operator", start);
    const bool inclusive = op_at + 1 < clause.size() && clause[op_at + 1] == '=';
    Comparison cmp;
    if (clause[op_at] == '<') {
      cmp = inclusive ? Comparison::less_equal : Comparison::less;
    } else {
      cmp = inclusive ? Comparison::greater_equal : Comparison::greater;
    }
    const std::size_t rhs_at = op_at + (inclusive ? 2 : 1);
    Clause c{};
    try {
      c.lhs = Expr::parse(clause.substr(0, op_at), n_vars);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in predicate: ") + e.what(), start + e.offset());
    }
    try {
      c.rhs = Expr::parse(clause.substr(rhs_at), n_vars);
    } catch (const ParseError& e) {
      throw ParseError(std::string("in predicate: ") + e.what(), start + rhs_at + e.offset());
    }
    c.cmp = cmp;
    pred.clauses_.push_back(std::move(c));
    if (amp == std::string_view::npos) break;
    start = amp + 2;
  }
  return pred;
}

bool Predicate::holds(std::span<const double> point) const {
  for (const auto& c : clauses_) {
    double l = 0.0;
    double r = 0.0;
    try {
      l = c.lhs.eval(point, 0.0);
      r = c.rhs.eval(point, 0.0);
    } catch (const DomainError&) {
      return false;
    }
    bool ok = false;
    switch (c.cmp) {
      case Comparison::less: ok = l < r; break;
      case Comparison::less_equal: ok = l <= r; break;
      case Comparison::greater: ok = l > r; break;
      case Comparison::greater_equal: ok = l >= r; break;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace devroll::expr
