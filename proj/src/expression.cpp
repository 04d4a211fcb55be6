// SPDX-License-Identifier: MIT
#include "ouevolve/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>
#include <vector>

#include "ouevolve/errors.hpp"

namespace ouevolve {

struct Expression::Node {
    enum class Kind { constant, time, negate, add, sub, mul, div, pow, call };

    Kind kind = Kind::constant;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;

    double eval(double t) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::time: return t;
            case Kind::negate: return -lhs->eval(t);
            case Kind::add: return lhs->eval(t) + rhs->eval(t);
            case Kind::sub: return lhs->eval(t) - rhs->eval(t);
            case Kind::mul: return lhs->eval(t) * rhs->eval(t);
            case Kind::div: return lhs->eval(t) / rhs->eval(t);
            case Kind::pow: return std::pow(lhs->eval(t), rhs->eval(t));
            case Kind::call: return fn(lhs->eval(t));
        }
        return 0.0;
    }

    bool uses_time() const {
        if (kind == Kind::time) return true;
        return (lhs && lhs->uses_time()) || (rhs && rhs->uses_time());
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_binary(Node::Kind kind, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

struct FunctionEntry {
    std::string_view name;
    double (*fn)(double);
};

double fabs_wrap(double x) { return std::fabs(x); }
double sin_wrap(double x) { return std::sin(x); }
double cos_wrap(double x) { return std::cos(x); }
double tan_wrap(double x) { return std::tan(x); }
double exp_wrap(double x) { return std::exp(x); }
double log_wrap(double x) { return std::log(x); }
double sqrt_wrap(double x) { return std::sqrt(x); }
double tanh_wrap(double x) { return std::tanh(x); }
double sinh_wrap(double x) { return std::sinh(x); }
double cosh_wrap(double x) { return std::cosh(x); }

constexpr FunctionEntry kFunctions[] = {
    {"sin", sin_wrap},   {"cos", cos_wrap},   {"tan", tan_wrap},   {"exp", exp_wrap},
    {"log", log_wrap},   {"sqrt", sqrt_wrap}, {"abs", fabs_wrap},  {"tanh", tanh_wrap},
    {"sinh", sinh_wrap}, {"cosh", cosh_wrap},
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        auto n = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("expression \"" + std::string(src_) + "\": " + why + " at position " +
                          std::to_string(pos_));
    }

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

    NodePtr parse_sum() {
        auto lhs = parse_product();
        while (true) {
            if (accept('+')) {
                lhs = make_binary(Node::Kind::add, lhs, parse_product());
            } else if (accept('-')) {
                lhs = make_binary(Node::Kind::sub, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        while (true) {
            if (accept('*')) {
                lhs = make_binary(Node::Kind::mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = make_binary(Node::Kind::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::negate;
            n->lhs = parse_unary();
            return n;
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (accept('^')) return make_binary(Node::Kind::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        fail("unexpected character");
    }

    NodePtr parse_number() {
        const std::string rest(src_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        return make_constant(v);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "t") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::time;
            return n;
        }
        if (name == "pi") return make_constant(std::numbers::pi);
        if (name == "e") return make_constant(std::numbers::e);
        for (const auto& entry : kFunctions) {
            if (entry.name == name) {
                if (!accept('(')) fail("expected '(' after " + std::string(name));
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::call;
                n->fn = entry.fn;
                n->lhs = parse_sum();
                if (!accept(')')) fail("expected ')'");
                return n;
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make_constant(0.0)), text_("0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expression Expression::parse(std::string_view text) {
    Parser parser(text);
    return Expression(parser.parse(), std::string(text));
}

Expression Expression::constant(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return Expression(make_constant(value), buf);
}

double Expression::operator()(double t) const { return root_->eval(t); }

bool Expression::depends_on_time() const { return root_->uses_time(); }

}  // namespace ouevolve
