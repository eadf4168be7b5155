#pragma once

// Small arithmetic expression evaluator for user-supplied initial data.
// Grammar: + - * / ^, unary minus, parentheses, numbers, the variables
// x, y, t, the constant pi and the functions sin cos tan exp log sqrt abs.

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "dgtd/errors.hpp"

namespace dgtd {

struct ExprVars {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(std::string text) : text_(std::move(text)) {
    Parser p{text_, 0};
    eval_ = p.parse_sum();
    p.skip_ws();
    if (p.pos != text_.size()) p.fail("unexpected '" + std::string(1, text_[p.pos]) + "'");
  }

  const std::string& text() const { return text_; }
  bool empty() const { return !eval_; }
  double operator()(const ExprVars& v) const { return eval_ ? eval_(v) : 0.0; }
  double operator()(double x, double y, double t = 0.0) const { return (*this)({x, y, t}); }

 private:
  using Fn = std::function<double(const ExprVars&)>;

  struct Parser {
    std::string_view src;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("expression '" + std::string(src) + "' at column " + std::to_string(pos + 1) + ": " + what);
    }
    void skip_ws() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < src.size() && src[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Fn parse_sum() {
      Fn lhs = parse_product();
      for (;;) {
        if (accept('+')) {
          lhs = [a = lhs, b = parse_product()](const ExprVars& v) { return a(v) + b(v); };
        } else if (accept('-')) {
          lhs = [a = lhs, b = parse_product()](const ExprVars& v) { return a(v) - b(v); };
        } else {
          return lhs;
        }
      }
    }

    Fn parse_product() {
      Fn lhs = parse_unary();
      for (;;) {
        if (accept('*')) {
          lhs = [a = lhs, b = parse_unary()](const ExprVars& v) { return a(v) * b(v); };
        } else if (accept('/')) {
          lhs = [a = lhs, b = parse_unary()](const ExprVars& v) { return a(v) / b(v); };
        } else {
          return lhs;
        }
      }
    }

    Fn parse_unary() {
      if (accept('-')) return [a = parse_unary()](const ExprVars& v) { return -a(v); };
      if (accept('+')) return parse_unary();
      return parse_power();
    }

    Fn parse_power() {
      Fn base = parse_atom();
      if (accept('^')) {
        return [a = base, b = parse_unary()](const ExprVars& v) { return std::pow(a(v), b(v)); };
      }
      return base;
    }

    Fn parse_atom() {
      skip_ws();
      if (pos >= src.size()) fail("unexpected end of expression");
      if (accept('(')) {
        Fn inner = parse_sum();
        if (!accept(')')) fail("missing ')'");
        return inner;
      }
      const char c = src[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(std::string(src.substr(pos)), &used);
        } catch (const std::exception&) {
          fail("bad number");
        }
        pos += used;
        return [value](const ExprVars&) { return value; };
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) ++pos;
        const std::string_view name = src.substr(start, pos - start);
        if (name == "x") return [](const ExprVars& v) { return v.x; };
        if (name == "y") return [](const ExprVars& v) { return v.y; };
        if (name == "t") return [](const ExprVars& v) { return v.t; };
        if (name == "pi") return [](const ExprVars&) { return std::numbers::pi; };
        double (*fn)(double) = nullptr;
        if (name == "sin") fn = [](double a) { return std::sin(a); };
        else if (name == "cos") fn = [](double a) { return std::cos(a); };
        else if (name == "tan") fn = [](double a) { return std::tan(a); };
        else if (name == "exp") fn = [](double a) { return std::exp(a); };
        else if (name == "log") fn = [](double a) { return std::log(a); };
        else if (name == "sqrt") fn = [](double a) { return std::sqrt(a); };
        else if (name == "abs") fn = [](double a) { return std::abs(a); };
        else fail("unknown identifier '" + std::string(name) + "'");
        if (!accept('(')) fail("expected '(' after function name");
        Fn arg = parse_sum();
        if (!accept(')')) fail("missing ')'");
        return [fn, arg](const ExprVars& v) { return fn(arg(v)); };
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  std::string text_;
  Fn eval_;
};

}  // namespace dgtd
