#pragma once

#include <memory>
#include <string>

namespace glmeissner {

// Arithmetic over x, y, z: numbers, + - * / ^, parentheses, unary minus, pi,
// and sin cos tan sinh cosh tanh exp log sqrt abs. `^` is right-associative
// and binds tighter than unary minus (-x^2 = -(x^2)).
class Expression {
 public:
  // Throws ParseError naming the 1-based column of the offending token.
  static Expression parse(const std::string& text);

  double operator()(double x, double y, double z) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace glmeissner
