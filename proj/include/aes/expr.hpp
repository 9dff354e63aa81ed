#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aes::expr {

/// Malformed expression text. `position()` is the 0-based offset of the
/// offending character in the source.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Division by zero, domain failure, or a non-finite intermediate result.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node;

/*!
 * A scalar closed-form function of the time variable `t`.
 *
 * Grammar (whitespace insignificant, function names case-sensitive):
 *
 *     sum     := product (('+' | '-') product)*
 *     product := unary (('*' | '/') unary)*
 *     unary   := ('-' | '+') unary | power
 *     power   := primary ('^' unary)?          right-associative
 *     primary := number | 't' | func '(' sum ')' | '(' sum ')'
 *     func    := sin | cos | exp | abs
 *
 * so `-2^2` is `-(2^2)` and `2^3^2` is `2^(3^2)`. Implicit multiplication
 * ("2t") is rejected. Expressions are immutable and cheap to copy; the tree
 * is shared between copies.
 */
class Expression {
 public:
  /// Parses `source`. Throws ParseError; never returns a partial tree.
  static Expression parse(std::string_view source);

  /// Evaluates at time `t`. Throws EvalError on division by zero or any
  /// non-finite intermediate value.
  double eval(double t) const;

  /// True when the tree does not reference `t`.
  bool is_constant() const;

  const std::string& source() const { return source_; }

  /// Canonical, fully parenthesized rendering that parses back to an
  /// equivalent tree.
  std::string print() const;

 private:
  Expression(std::string source, std::shared_ptr<const Node> root);

  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace aes::expr
