#pragma once

// Minimal arithmetic expressions over the coordinates x and y.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := atom ('^' unary)?          right associative
//   atom   := number | 'x' | 'y' | func '(' expr (',' expr)* ')' | '(' expr ')'
//   func   := abs | exp | sin | min | max

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dpobs/errors.hpp"

namespace dpobs {

class Expression {
 public:
  Expression() : Expression(std::string("0")) {}

  explicit Expression(std::string source) : source_(std::move(source)) {
    Parser parser{source_, 0};
    root_ = parser.parse_expr();
    parser.skip_ws();
    if (parser.pos != source_.size()) {
      parser.fail("unexpected trailing input");
    }
  }

  static Expression constant(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return Expression(buf);
  }

  double operator()(double x, double y = 0.0) const { return root_->eval(x, y); }

  const std::string& source() const { return source_; }

  bool operator==(const Expression& other) const { return source_ == other.source_; }

 private:
  enum class Kind { number, var_x, var_y, add, sub, mul, div, pow, neg, abs, exp, sin, min, max };

  struct Node {
    Kind kind = Kind::number;
    double value = 0.0;
    std::vector<std::unique_ptr<Node>> args;

    double eval(double x, double y) const {
      switch (kind) {
        case Kind::number: return value;
        case Kind::var_x: return x;
        case Kind::var_y: return y;
        case Kind::add: return args[0]->eval(x, y) + args[1]->eval(x, y);
        case Kind::sub: return args[0]->eval(x, y) - args[1]->eval(x, y);
        case Kind::mul: return args[0]->eval(x, y) * args[1]->eval(x, y);
        case Kind::div: return args[0]->eval(x, y) / args[1]->eval(x, y);
        case Kind::pow: return std::pow(args[0]->eval(x, y), args[1]->eval(x, y));
        case Kind::neg: return -args[0]->eval(x, y);
        case Kind::abs: return std::abs(args[0]->eval(x, y));
        case Kind::exp: return std::exp(args[0]->eval(x, y));
        case Kind::sin: return std::sin(args[0]->eval(x, y));
        case Kind::min: {
          double r = args[0]->eval(x, y);
          for (std::size_t i = 1; i < args.size(); ++i) r = std::min(r, args[i]->eval(x, y));
          return r;
        }
        case Kind::max: {
          double r = args[0]->eval(x, y);
          for (std::size_t i = 1; i < args.size(); ++i) r = std::max(r, args[i]->eval(x, y));
          return r;
        }
      }
      return 0.0;
    }
  };

  using NodePtr = std::unique_ptr<Node>;

  struct Parser {
    const std::string& src;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigurationError("expression '" + src + "': " + what + " at column " +
                               std::to_string(pos + 1));
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

    static NodePtr make(Kind kind, NodePtr a, NodePtr b = nullptr) {
      auto n = std::make_unique<Node>();
      n->kind = kind;
      n->args.push_back(std::move(a));
      if (b) n->args.push_back(std::move(b));
      return n;
    }

    NodePtr parse_expr() {
      NodePtr lhs = parse_term();
      for (;;) {
        if (accept('+')) {
          lhs = make(Kind::add, std::move(lhs), parse_term());
        } else if (accept('-')) {
          lhs = make(Kind::sub, std::move(lhs), parse_term());
        } else {
          return lhs;
        }
      }
    }

    NodePtr parse_term() {
      NodePtr lhs = parse_unary();
      for (;;) {
        if (accept('*')) {
          lhs = make(Kind::mul, std::move(lhs), parse_unary());
        } else if (accept('/')) {
          lhs = make(Kind::div, std::move(lhs), parse_unary());
        } else {
          return lhs;
        }
      }
    }

    NodePtr parse_unary() {
      if (accept('-')) return make(Kind::neg, parse_unary());
      if (accept('+')) return parse_unary();
      return parse_power();
    }

    NodePtr parse_power() {
      NodePtr base = parse_atom();
      if (accept('^')) return make(Kind::pow, std::move(base), parse_unary());
      return base;
    }

    NodePtr parse_atom() {
      skip_ws();
      if (pos >= src.size()) fail("unexpected end of input");
      const char c = src[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = src.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos += static_cast<std::size_t>(end - begin);
        auto n = std::make_unique<Node>();
        n->value = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) ++pos;
        const std::string name = src.substr(start, pos - start);
        if (name == "x" || name == "y") {
          auto n = std::make_unique<Node>();
          n->kind = name == "x" ? Kind::var_x : Kind::var_y;
          return n;
        }
        Kind kind;
        if (name == "abs") {
          kind = Kind::abs;
        } else if (name == "exp") {
          kind = Kind::exp;
        } else if (name == "sin") {
          kind = Kind::sin;
        } else if (name == "min") {
          kind = Kind::min;
        } else if (name == "max") {
          kind = Kind::max;
        } else {
          pos = start;
          fail("unknown identifier '" + name + "'");
        }
        if (!accept('(')) fail("expected '(' after " + name);
        auto n = std::make_unique<Node>();
        n->kind = kind;
        n->args.push_back(parse_expr());
        while (accept(',')) n->args.push_back(parse_expr());
        if (!accept(')')) fail("expected ')'");
        const bool variadic = kind == Kind::min || kind == Kind::max;
        if (variadic ? n->args.size() < 2 : n->args.size() != 1) {
          fail("wrong number of arguments to " + name);
        }
        return n;
      }
      if (accept('(')) {
        NodePtr inner = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dpobs
