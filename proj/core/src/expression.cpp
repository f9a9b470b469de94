#include "evostab/expression.hpp"

#include "evostab/errors.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace evostab {

struct Expression::Node {
    enum class Kind { number, variable, neg, add, sub, mul, div, pow, call } kind;
    double number = 0.0;
    std::size_t index = 0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_exp(double x) { return std::exp(x); }
double f_atan(double x) { return std::atan(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_abs(double x) { return std::abs(x); }
double f_log(double x) { return std::log(x); }

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    NodePtr parse() {
        auto n = expr();
        skip();
        if (pos_ != src_.size()) fail(fmt::format("unexpected '{}'", src_[pos_]));
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError({fmt::format("expression '{}': {} at offset {}", src_, msg, pos_)});
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Expression::Node>();
        n->kind = k;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }

    NodePtr expr() {
        auto n = term();
        while (true) {
            if (eat('+')) n = make(Kind::add, n, term());
            else if (eat('-')) n = make(Kind::sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        auto n = unary();
        while (true) {
            if (eat('*')) n = make(Kind::mul, n, unary());
            else if (eat('/')) n = make(Kind::div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, unary());
        if (eat('+')) return unary();
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (eat('^')) return make(Kind::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        if (eat('(')) {
            auto n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(fmt::format("unexpected '{}'", c));
    }

    NodePtr number() {
        double value = 0.0;
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::number;
        n->number = value;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);
        skip();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            double (*fn)(double) = nullptr;
            if (name == "sin") fn = f_sin;
            else if (name == "cos") fn = f_cos;
            else if (name == "exp") fn = f_exp;
            else if (name == "atan") fn = f_atan;
            else if (name == "sqrt") fn = f_sqrt;
            else if (name == "abs") fn = f_abs;
            else if (name == "log") fn = f_log;
            else fail(fmt::format("unknown function '{}'", name));
            eat('(');
            auto arg = expr();
            if (!eat(')')) fail("expected ')' after function argument");
            auto n = make(Kind::call, arg);
            std::const_pointer_cast<Expression::Node>(n)->fn = fn;
            return n;
        }
        auto n = std::make_shared<Expression::Node>();
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                n->kind = Kind::variable;
                n->index = i;
                return n;
            }
        }
        n->kind = Kind::number;
        if (name == "pi") n->number = std::numbers::pi;
        else if (name == "e") n->number = std::numbers::e;
        else fail(fmt::format("unknown identifier '{}'", name));
        return n;
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, std::span<const double> v) {
    switch (n.kind) {
    case Kind::number: return n.number;
    case Kind::variable: return v[n.index];
    case Kind::neg: return -eval(*n.lhs, v);
    case Kind::add: return eval(*n.lhs, v) + eval(*n.rhs, v);
    case Kind::sub: return eval(*n.lhs, v) - eval(*n.rhs, v);
    case Kind::mul: return eval(*n.lhs, v) * eval(*n.rhs, v);
    case Kind::div: return eval(*n.lhs, v) / eval(*n.rhs, v);
    case Kind::pow: return std::pow(eval(*n.lhs, v), eval(*n.rhs, v));
    case Kind::call: return n.fn(eval(*n.lhs, v));
    }
    return 0.0;
}

bool references(const Expression::Node& n, std::size_t index) {
    if (n.kind == Kind::variable) return n.index == index;
    return (n.lhs && references(*n.lhs, index)) || (n.rhs && references(*n.rhs, index));
}

} // namespace

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
    Expression e;
    e.source_ = std::string(source);
    e.variables_ = std::move(variables);
    e.root_ = Parser(e.source_, e.variables_).parse();
    return e;
}

double Expression::operator()(std::span<const double> values) const {
    if (values.size() < variables_.size()) {
        throw ValidationError({fmt::format("expression '{}' needs {} variables, got {}", source_,
                                           variables_.size(), values.size())});
    }
    return eval(*root_, values);
}

bool Expression::uses(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == name) return references(*root_, i);
    }
    return false;
}

} // namespace evostab
