#pragma once

// A small arithmetic language for payoffs and problem data:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' ['-'] integer)*
//   atom   := number | 'x' | 'y' | 't' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp'

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gheat/core.hpp"

namespace gheat::cli {

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
  /// Byte offset of the offending token.
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Expression {
public:
  enum class Kind { number, var_x, var_y, var_t, add, sub, mul, div, neg, pow, sin, cos, exp };

  struct Node {
    Kind kind = Kind::number;
    double value = 0.0;  // number
    int exponent = 0;    // pow
    int lhs = -1;        // operand of unary nodes, left operand of binary ones
    int rhs = -1;
  };

  static Expression parse(std::string_view source);

  double evaluate(double t, double x, double y) const;
  /// Text that parses back to the same tree.
  std::string print() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  bool uses_time() const;

  SpatialFunction spatial() const;
  SpaceTimeFunction space_time() const;

  /// Structural equality of the trees.
  friend bool operator==(const Expression& a, const Expression& b);

private:
  friend class Parser;
  int add(Node node);
  double eval(int id, double t, double x, double y) const;
  void print(int id, std::string& out) const;

  std::vector<Node> nodes_;
  int root_ = -1;
};

inline Expression parse_expression(std::string_view source) { return Expression::parse(source); }

}  // namespace gheat::cli
