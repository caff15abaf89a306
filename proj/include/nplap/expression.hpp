#pragma once

#include "nplap/types.hpp"

#include <memory>
#include <string>

namespace nplap {

/// Raised for malformed expressions; `column` is 1-based.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, std::size_t column)
      : InvalidArgument(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Arithmetic over coordinates: numbers, + - * / ^, abs(...), parentheses,
/// x1..xn and |x|. ^ binds tighter than unary minus and is right associative.
class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text, int dim);

  double operator()(const Vec& x) const;
  const std::string& text() const { return text_; }
  bool is_constant() const;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace nplap
