#include "nplap/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace nplap {

struct Expression::Node {
  enum class Op { Const, Coord, Norm, Neg, Abs, Add, Sub, Mul, Div, Pow };
  Op op = Op::Const;
  double value = 0.0;
  int axis = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Op op, double value = 0.0, int axis = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->axis = axis;
  return n;
}

NodePtr unary(Node::Op op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, int dim) : s_(s), dim_(dim) {}

  NodePtr run() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression \"" + s_ + "\": " + msg + " at column " +
                         std::to_string(pos_ + 1),
                     pos_ + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_word(const char* w) {
    skip();
    const std::string word(w);
    if (s_.compare(pos_, word.size(), word) == 0) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) lhs = binary(Node::Op::Add, lhs, term());
      else if (accept('-')) lhs = binary(Node::Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = signed_factor();
    while (true) {
      if (accept('*')) lhs = binary(Node::Op::Mul, lhs, signed_factor());
      else if (accept('/')) lhs = binary(Node::Op::Div, lhs, signed_factor());
      else return lhs;
    }
  }

  NodePtr signed_factor() {
    if (accept('-')) return unary(Node::Op::Neg, signed_factor());
    if (accept('+')) return signed_factor();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Node::Op::Pow, base, signed_factor());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (accept_word("|x|")) return leaf(Node::Op::Norm);
    if (accept_word("abs")) {
      if (!accept('(')) fail("expected '(' after abs");
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return unary(Node::Op::Abs, e);
    }
    const char c = s_[pos_];
    if (c == 'x') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected coordinate index after 'x'");
      const int k = std::stoi(s_.substr(start, pos_ - start));
      if (k < 1 || k > dim_)
        fail("coordinate x" + std::to_string(k) + " out of range for dimension " +
             std::to_string(dim_));
      return leaf(Node::Op::Coord, 0.0, k - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = s_.data() + pos_;
      const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("malformed number");
      pos_ += static_cast<std::size_t>(ptr - first);
      return leaf(Node::Op::Const, v);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  int dim_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const Vec& x) {
  switch (n.op) {
    case Node::Op::Const:
      return n.value;
    case Node::Op::Coord:
      return x[n.axis];
    case Node::Op::Norm:
      return x.norm();
    case Node::Op::Neg:
      return -eval(*n.a, x);
    case Node::Op::Abs:
      return std::abs(eval(*n.a, x));
    case Node::Op::Add:
      return eval(*n.a, x) + eval(*n.b, x);
    case Node::Op::Sub:
      return eval(*n.a, x) - eval(*n.b, x);
    case Node::Op::Mul:
      return eval(*n.a, x) * eval(*n.b, x);
    case Node::Op::Div:
      return eval(*n.a, x) / eval(*n.b, x);
    case Node::Op::Pow:
      return std::pow(eval(*n.a, x), eval(*n.b, x));
  }
  return 0.0;
}

bool constant(const Node& n) {
  switch (n.op) {
    case Node::Op::Const:
      return true;
    case Node::Op::Coord:
    case Node::Op::Norm:
      return false;
    default:
      return constant(*n.a) && (!n.b || constant(*n.b));
  }
}

}  // namespace

Expression Expression::parse(const std::string& text, int dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("expression: dimension out of range");
  Expression e;
  e.text_ = text;
  e.root_ = Parser(e.text_, dim).run();
  return e;
}

double Expression::operator()(const Vec& x) const { return eval(*root_, x); }

bool Expression::is_constant() const { return constant(*root_); }

}  // namespace nplap
