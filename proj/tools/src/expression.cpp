#include "gheat/cli/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>

namespace gheat::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) s += ", ";
    s += items[k];
  }
  return s;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": expected " +
                         join(expected) + ", found " + found),
      offset_(offset),
      expected_(std::move(expected)) {}

class Parser {
public:
  Parser(std::string_view src, Expression& expr) : src_(src), expr_(expr) {}

  int parse_all() {
    const int root = parse_expr();
    skip_space();
    if (pos_ != src_.size()) fail({"operator", "end of input"});
    return root;
  }

private:
  using Kind = Expression::Kind;

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw ParseError(pos_, std::move(expected), found);
  }

  int binary(Kind kind, int lhs, int rhs) { return expr_.add({kind, 0.0, 0, lhs, rhs}); }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = binary(Kind::add, lhs, parse_term());
      else if (accept('-')) lhs = binary(Kind::sub, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = binary(Kind::mul, lhs, parse_unary());
      else if (accept('/')) lhs = binary(Kind::div, lhs, parse_unary());
      else return lhs;
    }
  }

  int parse_unary() {
    if (accept('-')) return expr_.add({Kind::neg, 0.0, 0, parse_unary(), -1});
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    while (accept('^')) {
      skip_space();
      const bool negative = accept('-');
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ == start) fail({"integer exponent"});
      if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
        pos_ = start;
        fail({"integer exponent"});
      }
      int value = 0;
      const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
      if (ec != std::errc() || end != src_.data() + pos_) {
        pos_ = start;
        fail({"integer exponent"});
      }
      base = expr_.add({Kind::pow, 0.0, negative ? -value : value, base, -1});
    }
    return base;
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      pos_ = start;
      fail({"number"});
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = mark + 1;
        fail({"exponent digits"});
      }
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || end != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      fail({"finite number"});
    }
    return expr_.add({Kind::number, value, 0, -1, -1});
  }

  int parse_atom() {
    skip_space();
    if (pos_ >= src_.size()) fail(atom_expected());
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) fail({"')'", "operator"});
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string_view word = src_.substr(start, pos_ - start);
      if (word == "x") return expr_.add({Kind::var_x});
      if (word == "y") return expr_.add({Kind::var_y});
      if (word == "t") return expr_.add({Kind::var_t});
      Kind fn;
      if (word == "sin") fn = Kind::sin;
      else if (word == "cos") fn = Kind::cos;
      else if (word == "exp") fn = Kind::exp;
      else {
        pos_ = start;
        fail(atom_expected());
      }
      if (!accept('(')) fail({"'('"});
      const int arg = parse_expr();
      if (!accept(')')) fail({"')'", "operator"});
      return expr_.add({fn, 0.0, 0, arg, -1});
    }
    fail(atom_expected());
  }

  static std::vector<std::string> atom_expected() {
    return {"number", "'x'", "'y'", "'t'", "'sin'", "'cos'", "'exp'", "'('", "'-'"};
  }

  std::string_view src_;
  Expression& expr_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view source) {
  Expression expr;
  Parser parser(source, expr);
  expr.root_ = parser.parse_all();
  return expr;
}

int Expression::add(Node node) {
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

double Expression::evaluate(double t, double x, double y) const {
  if (root_ < 0) throw EvalError("empty expression");
  return eval(root_, t, x, y);
}

double Expression::eval(int id, double t, double x, double y) const {
  const Node& n = nodes_[id];
  switch (n.kind) {
    case Kind::number: return n.value;
    case Kind::var_x: return x;
    case Kind::var_y: return y;
    case Kind::var_t: return t;
    case Kind::add: return eval(n.lhs, t, x, y) + eval(n.rhs, t, x, y);
    case Kind::sub: return eval(n.lhs, t, x, y) - eval(n.rhs, t, x, y);
    case Kind::mul: return eval(n.lhs, t, x, y) * eval(n.rhs, t, x, y);
    case Kind::div: {
      const double d = eval(n.rhs, t, x, y);
      if (d == 0.0) throw EvalError("division by zero");
      return eval(n.lhs, t, x, y) / d;
    }
    case Kind::neg: return -eval(n.lhs, t, x, y);
    case Kind::pow: {
      const double b = eval(n.lhs, t, x, y);
      if (b == 0.0 && n.exponent < 0) throw EvalError("division by zero in negative power");
      double r = 1.0;
      for (int k = 0; k < std::abs(n.exponent); ++k) r *= b;
      return n.exponent < 0 ? 1.0 / r : r;
    }
    case Kind::sin: return std::sin(eval(n.lhs, t, x, y));
    case Kind::cos: return std::cos(eval(n.lhs, t, x, y));
    case Kind::exp: return std::exp(eval(n.lhs, t, x, y));
  }
  throw EvalError("corrupt expression");
}

namespace {

int precedence(Expression::Kind k) {
  using K = Expression::Kind;
  switch (k) {
    case K::add:
    case K::sub: return 1;
    case K::mul:
    case K::div: return 2;
    case K::neg: return 3;
    case K::pow: return 4;
    default: return 5;
  }
}

}  // namespace

void Expression::print(int id, std::string& out) const {
  const Node& n = nodes_[id];
  auto child = [&](int c, bool paren) {
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  };
  const int p = precedence(n.kind);
  switch (n.kind) {
    case Kind::number: {
      char buf[32];
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, end);
      return;
    }
    case Kind::var_x: out += 'x'; return;
    case Kind::var_y: out += 'y'; return;
    case Kind::var_t: out += 't'; return;
    case Kind::add:
    case Kind::sub:
    case Kind::mul:
    case Kind::div: {
      static constexpr char ops[] = "+-*/";
      child(n.lhs, precedence(nodes_[n.lhs].kind) < p);
      out += ops[static_cast<int>(n.kind) - static_cast<int>(Kind::add)];
      child(n.rhs, precedence(nodes_[n.rhs].kind) <= p);
      return;
    }
    case Kind::neg:
      out += '-';
      child(n.lhs, precedence(nodes_[n.lhs].kind) < p);
      return;
    case Kind::pow:
      child(n.lhs, precedence(nodes_[n.lhs].kind) < 5);
      out += '^';
      out += std::to_string(n.exponent);
      return;
    case Kind::sin: out += "sin"; break;
    case Kind::cos: out += "cos"; break;
    case Kind::exp: out += "exp"; break;
  }
  child(n.lhs, true);
}

std::string Expression::print() const {
  std::string out;
  if (root_ >= 0) print(root_, out);
  return out;
}

bool Expression::uses_time() const {
  for (const auto& n : nodes_)
    if (n.kind == Kind::var_t) return true;
  return false;
}

SpatialFunction Expression::spatial() const {
  auto self = std::make_shared<const Expression>(*this);
  return [self](double x, double y) { return self->evaluate(0.0, x, y); };
}

SpaceTimeFunction Expression::space_time() const {
  auto self = std::make_shared<const Expression>(*this);
  return [self](double t, double x, double y) { return self->evaluate(t, x, y); };
}

namespace {

bool same(const Expression& a, int i, const Expression& b, int j) {
  if ((i < 0) != (j < 0)) return false;
  if (i < 0) return true;
  const auto& p = a.nodes()[i];
  const auto& q = b.nodes()[j];
  if (p.kind != q.kind) return false;
  if (p.kind == Expression::Kind::number && p.value != q.value) return false;
  if (p.kind == Expression::Kind::pow && p.exponent != q.exponent) return false;
  return same(a, p.lhs, b, q.lhs) && same(a, p.rhs, b, q.rhs);
}

}  // namespace

bool operator==(const Expression& a, const Expression& b) { return same(a, a.root(), b, b.root()); }

}  // namespace gheat::cli
