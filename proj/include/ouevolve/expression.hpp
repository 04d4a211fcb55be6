// SPDX-License-Identifier: MIT
#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace ouevolve {

/// A closed-form scalar function of time parsed from text, e.g. "1 + 0.5*sin(t)".
///
/// Grammar: numbers, the variable `t`, the constants `pi` and `e`, the binary
/// operators + - * / ^ (right associative), unary minus, parentheses and the
/// functions sin, cos, tan, exp, log, sqrt, abs, tanh, sinh, cosh.
/// Parsing errors raise ConfigError carrying the offending position.
class Expression {
public:
    Expression();  // the constant 0

    static Expression parse(std::string_view text);
    static Expression constant(double value);

    double operator()(double t) const;

    const std::string& text() const { return text_; }
    bool depends_on_time() const;

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, std::string text);

    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace ouevolve
