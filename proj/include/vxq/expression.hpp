#pragma once

// Arithmetic expressions in x and y used to define exponent maps.
//
// Grammar (binary operators associate to the left):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' operand)*
//   operand := '-' operand | primary
//   primary := number | 'x' | 'y' | 'pi' | func '(' expr [',' expr] ')' | '(' expr ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "vxq/core.hpp"

namespace vxq {

enum class Func { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Abs: return "abs";
    case Func::Sqrt: return "sqrt";
    case Func::Min: return "min";
    case Func::Max: return "max";
  }
  return "?";
}

inline int func_arity(Func f) { return (f == Func::Min || f == Func::Max) ? 2 : 1; }

struct Expr {
  enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  Func func = Func::Sin;
  std::vector<std::shared_ptr<const Expr>> args;

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::VarX: return x;
      case Kind::VarY: return y;
      case Kind::Neg: return -args[0]->eval(x, y);
      case Kind::Add: return args[0]->eval(x, y) + args[1]->eval(x, y);
      case Kind::Sub: return args[0]->eval(x, y) - args[1]->eval(x, y);
      case Kind::Mul: return args[0]->eval(x, y) * args[1]->eval(x, y);
      case Kind::Div: return args[0]->eval(x, y) / args[1]->eval(x, y);
      case Kind::Pow: return std::pow(args[0]->eval(x, y), args[1]->eval(x, y));
      case Kind::Call: {
        const double a = args[0]->eval(x, y);
        switch (func) {
          case Func::Sin: return std::sin(a);
          case Func::Cos: return std::cos(a);
          case Func::Exp: return std::exp(a);
          case Func::Log: return std::log(a);
          case Func::Abs: return std::abs(a);
          case Func::Sqrt: return std::sqrt(a);
          case Func::Min: return std::min(a, args[1]->eval(x, y));
          case Func::Max: return std::max(a, args[1]->eval(x, y));
        }
      }
    }
    return std::nan("");
  }
  double eval(Vec2 p) const { return eval(p.x, p.y); }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    if (a.kind == Kind::Number && a.number != b.number) return false;
    if (a.kind == Kind::Call && a.func != b.func) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!(*a.args[i] == *b.args[i])) return false;
    return true;
  }
};

using ExprPtr = std::shared_ptr<const Expr>;

/// Canonical printed form: every binary operation parenthesized, numbers in
/// shortest round-trip notation.
inline std::string to_string(const Expr& e) {
  using K = Expr::Kind;
  auto bin = [&](const char* op) {
    return "(" + to_string(*e.args[0]) + " " + op + " " + to_string(*e.args[1]) + ")";
  };
  switch (e.kind) {
    case K::Number: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, e.number);
      return std::string(buf, res.ptr);
    }
    case K::VarX: return "x";
    case K::VarY: return "y";
    case K::Neg: return "(-" + to_string(*e.args[0]) + ")";
    case K::Add: return bin("+");
    case K::Sub: return bin("-");
    case K::Mul: return bin("*");
    case K::Div: return bin("/");
    case K::Pow: return bin("^");
    case K::Call: {
      std::string s = std::string(func_name(e.func)) + "(" + to_string(*e.args[0]);
      if (e.args.size() > 1) s += ", " + to_string(*e.args[1]);
      return s + ")";
    }
  }
  return "?";
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    auto e = expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  static std::shared_ptr<Expr> node(Expr::Kind k, std::vector<ExprPtr> args = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->args = std::move(args);
    return e;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  ExprPtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = node(Expr::Kind::Add, {lhs, term()});
      else if (accept('-')) lhs = node(Expr::Kind::Sub, {lhs, term()});
      else return lhs;
    }
  }
  ExprPtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = node(Expr::Kind::Mul, {lhs, unary()});
      else if (accept('/')) lhs = node(Expr::Kind::Div, {lhs, unary()});
      else return lhs;
    }
  }
  ExprPtr unary() {
    if (accept('-')) return node(Expr::Kind::Neg, {unary()});
    return power();
  }
  ExprPtr power() {
    auto lhs = primary();
    while (accept('^')) lhs = node(Expr::Kind::Pow, {lhs, operand()});
    return lhs;
  }
  ExprPtr operand() {
    if (accept('-')) return node(Expr::Kind::Neg, {operand()});
    return primary();
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (res.ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Number;
    e->number = value;
    return e;
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    if (id == "x") return node(Expr::Kind::VarX);
    if (id == "y") return node(Expr::Kind::VarY);
    if (id == "pi") {
      auto e = std::make_shared<Expr>();
      e->number = std::numbers::pi;
      return e;
    }
    static constexpr Func kFuncs[] = {Func::Sin, Func::Cos, Func::Exp, Func::Log,
                                      Func::Abs, Func::Sqrt, Func::Min, Func::Max};
    for (Func f : kFuncs) {
      if (id != func_name(f)) continue;
      expect('(');
      std::vector<ExprPtr> args{expr()};
      for (int k = 1; k < func_arity(f); ++k) {
        expect(',');
        args.push_back(expr());
      }
      expect(')');
      auto e = node(Expr::Kind::Call, std::move(args));
      e->func = f;
      return e;
    }
    throw ParseError("unknown identifier '" + std::string(id) + "'", start);
  }
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) { return detail::ExprParser(text).parse(); }

}  // namespace vxq
