#include "aes/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace aes::expr {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)),
      position_(position) {}

enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Abs };

struct Node {
  Kind kind;
  double value = 0.0;
  std::unique_ptr<const Node> lhs;
  std::unique_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::unique_ptr<const Node>;

NodePtr make_leaf(Kind kind, double value = 0.0) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

NodePtr make_node(Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    auto root = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return root;
  }

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

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size())
        throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = make_node(Kind::Add, std::move(lhs), parse_product());
      else if (accept('-'))
        lhs = make_node(Kind::Sub, std::move(lhs), parse_product());
      else
        return lhs;
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = make_node(Kind::Mul, std::move(lhs), parse_unary());
      else if (accept('/'))
        lhs = make_node(Kind::Div, std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(Kind::Negate, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make_node(Kind::Pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", start);
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) throw ParseError("number out of range", start);
    // Reject implicit multiplication such as "2t" or "3(t)".
    if (pos_ < src_.size() &&
        (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
         src_[pos_] == '('))
      throw ParseError("implicit multiplication is not supported", pos_);
    return make_leaf(Kind::Constant, v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return make_leaf(Kind::Variable);

    Kind fn;
    if (name == "sin")
      fn = Kind::Sin;
    else if (name == "cos")
      fn = Kind::Cos;
    else if (name == "exp")
      fn = Kind::Exp;
    else if (name == "abs")
      fn = Kind::Abs;
    else
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);

    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '(')
      throw ParseError("expected '(' after function '" + std::string(name) + "'", pos_);
    ++pos_;
    auto arg = parse_sum();
    expect(')');
    return make_node(fn, std::move(arg));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const Node& n, double t) {
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Variable:
      return t;
    case Kind::Negate:
      return -eval_node(*n.lhs, t);
    case Kind::Add:
      return checked(eval_node(*n.lhs, t) + eval_node(*n.rhs, t), "addition");
    case Kind::Sub:
      return checked(eval_node(*n.lhs, t) - eval_node(*n.rhs, t), "subtraction");
    case Kind::Mul:
      return checked(eval_node(*n.lhs, t) * eval_node(*n.rhs, t), "multiplication");
    case Kind::Div: {
      const double num = eval_node(*n.lhs, t);
      const double den = eval_node(*n.rhs, t);
      if (den == 0.0) throw EvalError("division by zero");
      return checked(num / den, "division");
    }
    case Kind::Pow:
      return checked(std::pow(eval_node(*n.lhs, t), eval_node(*n.rhs, t)), "power");
    case Kind::Sin:
      return checked(std::sin(eval_node(*n.lhs, t)), "sin");
    case Kind::Cos:
      return checked(std::cos(eval_node(*n.lhs, t)), "cos");
    case Kind::Exp:
      return checked(std::exp(eval_node(*n.lhs, t)), "exp");
    case Kind::Abs:
      return std::abs(eval_node(*n.lhs, t));
  }
  throw EvalError("corrupt expression tree");
}

bool references_t(const Node& n) {
  if (n.kind == Kind::Variable) return true;
  return (n.lhs && references_t(*n.lhs)) || (n.rhs && references_t(*n.rhs));
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* fn) {
    out += fn;
    out += '(';
    print_node(*n.lhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::Constant:
      out += format_number(n.value);
      return;
    case Kind::Variable:
      out += 't';
      return;
    case Kind::Negate:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Kind::Add: return binary(" + ");
    case Kind::Sub: return binary(" - ");
    case Kind::Mul: return binary(" * ");
    case Kind::Div: return binary(" / ");
    case Kind::Pow: return binary("^");
    case Kind::Sin: return call("sin");
    case Kind::Cos: return call("cos");
    case Kind::Exp: return call("exp");
    case Kind::Abs: return call("abs");
  }
}

}  // namespace

Expression::Expression(std::string source, std::shared_ptr<const Node> root)
    : source_(std::move(source)), root_(std::move(root)) {}

Expression Expression::parse(std::string_view source) {
  Parser parser(source);
  std::shared_ptr<const Node> root = parser.parse_all();
  return Expression(std::string(source), std::move(root));
}

double Expression::eval(double t) const {
  if (!std::isfinite(t)) throw EvalError("evaluation time must be finite");
  return eval_node(*root_, t);
}

bool Expression::is_constant() const { return !references_t(*root_); }

std::string Expression::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

}  // namespace aes::expr
