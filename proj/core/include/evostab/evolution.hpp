#pragma once

#include "evostab/calculus.hpp"
#include "evostab/operators.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace evostab {

/// Coefficient A of the linear equation x' = A(t) x. Piecewise continuous
/// between breakpoints and bounded on compacts.
struct CoefficientPath {
    std::function<Matrix(double)> eval;
    std::vector<double> breakpoints;
    Interval domain = Interval::real_line();
    VectorSpace space;

    Matrix operator()(double t) const { return eval(t); }

    static CoefficientPath constant(const Matrix& a, VectorSpace space,
                                    Interval domain = Interval::real_line());
    static CoefficientPath zero(VectorSpace space, Interval domain = Interval::real_line());
};

struct SolverOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    /// 0 means unlimited.
    double max_step = 0.0;
    long max_steps = 50'000'000;
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

/// X(t, s): the value at t of the operator solution that is the identity at s.
/// For t < s the equation is integrated backwards in time.
Operator evolve(const CoefficientPath& A, double s, double t, const SolverOptions& opts = {},
                StepStats* stats = nullptr);

/// X(t, s) v, integrating the vector equation directly.
Vector propagate_vector(const CoefficientPath& A, double s, double t, const Vector& v,
                        const SolverOptions& opts = {}, StepStats* stats = nullptr);

/// Solution of x' = A x + g with x(s) = x_s, evaluated at t.
Vector variation_of_parameters(const CoefficientPath& A,
                               const std::function<ColumnVector(double)>& g, double s, double t,
                               const Vector& x_s, const SolverOptions& opts = {},
                               std::span<const double> g_breakpoints = {});

/// Two-parameter propagator of a coefficient path on a compact window.
///
/// Transfer operators between consecutive checkpoints (breakpoints plus a
/// uniform grid) are computed lazily in both time directions and memoized, so
/// a query costs two partial integrations and a product of cached factors.
/// Concurrent queries are safe and return the same values as sequential ones.
class EvolutionOperator {
public:
    EvolutionOperator(CoefficientPath A, Interval window, SolverOptions opts = {},
                      std::size_t checkpoints = 256);

    Operator operator()(double t, double s) const;

    const CoefficientPath& source() const { return A_; }
    const Interval& window() const { return window_; }
    const SolverOptions& options() const { return opts_; }
    StepStats step_stats() const;

private:
    Matrix transfer(std::size_t i, bool forward) const;
    Matrix direct(double from, double to) const;

    CoefficientPath A_;
    Interval window_;
    SolverOptions opts_;
    std::vector<double> nodes_;
    mutable std::mutex mutex_;
    mutable std::vector<std::optional<Matrix>> forward_;
    mutable std::vector<std::optional<Matrix>> backward_;
    mutable StepStats stats_;
};

struct ComparisonInput {
    CoefficientPath A1;
    CoefficientPath A2;
    /// Caller-asserted constants of ||X_1(t,s)^eps|| <= N exp(-nu1 (t - s)).
    double N = 1.0;
    double nu1 = 0.0;
    int epsilon = 1;
};

struct ComparisonBounds {
    double growth_bound = 0.0;
    double difference_bound = 0.0;
    double integral = 0.0;
};

/// Perturbation estimates for X_2 given a growth hypothesis on X_1.
ComparisonBounds comparison_bounds(const ComparisonInput& c, double s, double t,
                                   QuadratureOptions qopts = {});

/// A(x, v) for the parameter-dependent equation D_2 X = A X.
using ParamCoefficient = std::function<Matrix(double x, double v)>;

struct ParamEvolution {
    std::vector<double> x_grid;
    std::vector<double> v_targets;
    /// values[i][k] = X(x_grid[i], v_targets[k]) with X(x, v0) = id.
    std::vector<std::vector<Operator>> values;
    /// Largest ||X(x_{i+1}, v) - X(x_i, v)|| over neighbouring columns.
    double max_column_discrepancy = 0.0;
};

ParamEvolution param_evolution(const ParamCoefficient& A, VectorSpace space,
                               const std::vector<double>& x_grid, double v0,
                               const std::vector<double>& v_targets,
                               const SolverOptions& opts = {});

/// Solves one column x -> X(x, .) at the given targets (any order).
std::vector<Operator> param_column(const ParamCoefficient& A, VectorSpace space, double x,
                                   double v0, const std::vector<double>& v_targets,
                                   const SolverOptions& opts = {});

} // namespace evostab
