#include "glmeissner/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "glmeissner/error.hpp"

namespace glmeissner {

struct Expression::Node {
  enum Kind { kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall } kind = kConst;
  double value = 0.0;
  int var = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const double* xyz) const {
    switch (kind) {
      case kConst: return value;
      case kVar: return xyz[var];
      case kNeg: return -a->eval(xyz);
      case kAdd: return a->eval(xyz) + b->eval(xyz);
      case kSub: return a->eval(xyz) - b->eval(xyz);
      case kMul: return a->eval(xyz) * b->eval(xyz);
      case kDiv: return a->eval(xyz) / b->eval(xyz);
      case kPow: return std::pow(a->eval(xyz), b->eval(xyz));
      case kCall: return fn(a->eval(xyz));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"sinh", [](double v) { return std::sinh(v); }},
    {"cosh", [](double v) { return std::cosh(v); }}, {"tanh", [](double v) { return std::tanh(v); }},
    {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
    {"sqrt", [](double v) { return std::sqrt(v); }}, {"abs", [](double v) { return std::abs(v); }},
};

// Recursive descent:
//   sum    := product (('+' | '-') product)*
//   product:= unary (('*' | '/') unary)*
//   unary  := '-' unary | '+' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' sum ')' | '(' sum ')'
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError, "expression column " + std::to_string(pos_ + 1) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr make(Expression::Node::Kind k, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(Expression::Node::kAdd, n, product());
      else if (eat('-')) n = make(Expression::Node::kSub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Expression::Node::kMul, n, unary());
      else if (eat('/')) n = make(Expression::Node::kDiv, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Expression::Node::kNeg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr n = atom();
    if (eat('^')) return make(Expression::Node::kPow, n, unary());
    return n;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += size_t(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      auto n = std::make_shared<Expression::Node>();
      if (name == "x" || name == "y" || name == "z") {
        n->kind = Expression::Node::kVar;
        n->var = name[0] - 'x';
        return n;
      }
      if (name == "pi") {
        n->value = M_PI;
        return n;
      }
      for (const Function& f : kFunctions) {
        if (name != f.name) continue;
        if (!eat('(')) fail("expected '(' after " + name);
        n->kind = Expression::Node::kCall;
        n->fn = f.fn;
        n->a = sum();
        if (!eat(')')) fail("expected ')'");
        return n;
      }
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(double x, double y, double z) const {
  const double xyz[3] = {x, y, z};
  return root_->eval(xyz);
}

}  // namespace glmeissner
