#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evostab {

/// Compiled arithmetic expression over a fixed list of variable names.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numeric
/// literals, the constants `pi` and `e`, and the functions sin, cos, exp, atan,
/// sqrt, abs and log.
class Expression {
public:
    static Expression parse(std::string_view source, std::vector<std::string> variables);

    /// `values` must follow the variable order given to parse().
    double operator()(std::span<const double> values) const;
    double operator()(double a) const { return (*this)(std::span<const double>(&a, 1)); }
    double operator()(double a, double b) const {
        const double v[2] = {a, b};
        return (*this)(std::span<const double>(v, 2));
    }

    const std::string& source() const { return source_; }
    const std::vector<std::string>& variables() const { return variables_; }
    /// True if the expression references variable `name`.
    bool uses(std::string_view name) const;

    struct Node;

private:
    std::string source_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

} // namespace evostab
