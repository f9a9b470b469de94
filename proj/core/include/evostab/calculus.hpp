#pragma once

#include "evostab/operators.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace evostab {

/// A real interval. Endpoints may be infinite; finite endpoints are always
/// treated as belonging to the interval.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo, double hi);

    static Interval real_line() {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }

    double length() const { return hi - lo; }
    bool is_finite() const;
    bool contains(double t) const { return t >= lo && t <= hi; }
    bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Step for central differences at `t`.
inline double fd_step(double t) { return 1e-6 * std::max(1.0, std::abs(t)); }

/// Second-order finite-difference derivative of `g` at `t` that never samples
/// across a breakpoint or outside `domain`.
template <class F>
auto safe_difference(const F& g, double t, std::span<const double> breakpoints,
                     const Interval& domain) -> decltype(g(t)) {
    const double h = fd_step(t);
    bool left_ok = t - 2 * h >= domain.lo;
    bool right_ok = t + 2 * h <= domain.hi;
    for (double b : breakpoints) {
        if (b < t && b > t - 2 * h) left_ok = false;
        if (b > t && b < t + 2 * h) right_ok = false;
    }
    if (left_ok && right_ok) return (g(t + h) - g(t - h)) / (2 * h);
    if (right_ok) return (-3.0 * g(t) + 4.0 * g(t + h) - g(t + 2 * h)) / (2 * h);
    if (left_ok) return (3.0 * g(t) - 4.0 * g(t - h) + g(t - 2 * h)) / (2 * h);
    // Both sides blocked within 2h: fall back to the shortest one-sided quotient.
    return (g(std::min(t + h, domain.hi)) - g(std::max(t - h, domain.lo))) /
           (std::min(t + h, domain.hi) - std::max(t - h, domain.lo));
}

/// Piecewise C^1 real function of one variable.
///
/// `derivative` follows the convention f'(t) = 0 at declared breakpoints; away
/// from them it uses the analytic derivative when supplied and a
/// breakpoint-aware finite difference otherwise.
class ScalarPath {
public:
    using Fn = std::function<double(double)>;

    ScalarPath(Fn eval, std::optional<Fn> deriv, std::vector<double> breakpoints,
               Interval domain = Interval::real_line());

    static ScalarPath constant(double c, Interval domain = Interval::real_line());
    /// t -> slope * t + offset
    static ScalarPath affine(double slope, double offset, Interval domain = Interval::real_line());
    static ScalarPath identity(Interval domain = Interval::real_line()) {
        return affine(1.0, 0.0, domain);
    }

    double operator()(double t) const { return eval_(t); }
    double derivative(double t) const;
    bool has_analytic_derivative() const { return deriv_.has_value(); }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const Interval& domain() const { return domain_; }

private:
    Fn eval_;
    std::optional<Fn> deriv_;
    std::vector<double> breakpoints_;
    Interval domain_;
};

/// Operator-valued function of (t, u), the field G~ of a separable system.
class OperatorField {
public:
    using Fn = std::function<Matrix(double t, double u)>;

    OperatorField(int dim, Fn eval, std::optional<Fn> partial_t = std::nullopt,
                  std::vector<double> t_breakpoints = {}, Interval t_domain = Interval::real_line());

    /// Marks the field as independent of u, enabling the lambda(J) V_F route.
    OperatorField& set_u_independent(bool flag = true) {
        u_independent_ = flag;
        return *this;
    }

    Matrix operator()(double t, double u) const { return eval_(t, u); }
    Matrix partial_t(double t, double u) const;

    int dim() const { return dim_; }
    bool u_independent() const { return u_independent_; }
    bool has_analytic_partial() const { return partial_.has_value(); }
    const std::vector<double>& t_breakpoints() const { return t_breakpoints_; }
    const Interval& t_domain() const { return t_domain_; }

private:
    int dim_;
    Fn eval_;
    std::optional<Fn> partial_;
    std::vector<double> t_breakpoints_;
    Interval t_domain_;
    bool u_independent_ = false;
};

/// Strictly increasing points a_0 < ... < a_n.
class Partition {
public:
    explicit Partition(std::vector<double> points);

    /// Uniform partition of [lo, hi] whose mesh does not exceed `max_mesh`.
    static Partition with_mesh(double lo, double hi, double max_mesh);
    static Partition uniform(double lo, double hi, std::size_t segments);

    const std::vector<double>& points() const { return points_; }
    std::size_t segments() const { return points_.empty() ? 0 : points_.size() - 1; }
    double mesh() const;
    /// Index i with t in [a_i, a_{i+1}); the last point maps to the last segment.
    std::size_t segment_of(double t) const;

private:
    std::vector<double> points_;
};

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_subdivisions = 20000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of g over the finite
/// interval K, pre-split at every breakpoint inside K. Throws
/// QuadratureFailure carrying the best estimate if the error bound cannot be
/// met within `max_subdivisions`.
QuadratureResult integrate(const std::function<double(double)>& g, Interval K,
                           std::span<const double> breakpoints = {},
                           QuadratureOptions opts = {});

struct VectorQuadratureResult {
    ColumnVector value;
    double error = 0.0;
};

/// Componentwise (Bochner) integral of a vector-valued function. The error
/// bound is measured in the max norm.
VectorQuadratureResult integrate_vector(const std::function<ColumnVector(double)>& g, Interval K,
                                        std::span<const double> breakpoints = {},
                                        QuadratureOptions opts = {});

/// Signed integral from s to t (negated when t < s).
double integrate_between(const std::function<double(double)>& g, double s, double t,
                         std::span<const double> breakpoints = {}, QuadratureOptions opts = {});

/// L^1(J; End(E)) norm of G(t, .).
double l1_norm_in_u(const OperatorField& G, double t, Interval J, NormKind norm,
                    QuadratureOptions opts = {});

/// L^1(J; End(E)) distance between G(t1, .) and G(t2, .).
double l1_distance_in_u(const OperatorField& G, double t1, double t2, Interval J, NormKind norm,
                        QuadratureOptions opts = {});

enum class VariationMode { derivative, refinement };

struct VariationResult {
    double value = 0.0;
    VariationMode mode = VariationMode::derivative;
    bool converged = true;
    /// Refinement mode only: the last two partition sums and the final
    /// number of segments.
    double previous = 0.0;
    std::size_t segments = 0;
};

struct OperatorPath {
    std::function<Matrix(double)> eval;
    std::optional<std::function<Matrix(double)>> deriv;
    std::vector<double> breakpoints;
};

/// Total variation of t -> G(t) on the finite interval I. With a derivative
/// available this is the integral of ||G'||; otherwise partition sums over
/// dyadic refinements are taken until the relative change drops below 1e-4.
VariationResult total_variation_path(const OperatorPath& G, Interval I, NormKind norm,
                                     QuadratureOptions opts = {});

/// Same, forcing the partition-refinement route.
VariationResult total_variation_refinement(const std::function<double(double, double)>& distance,
                                           Interval I, std::span<const double> breakpoints,
                                           double rel_change = 1e-4, int max_level = 18,
                                           int initial_level = 4);

/// Sum of distances along the given points.
double partition_sum(const std::function<double(double, double)>& distance,
                     std::span<const double> points);

/// Upper bound of the total variation of t -> G(t, .) in L^1(J): the double
/// integral of ||D_1 G~|| over I x J.
double tv_l1_upper_bound(const OperatorField& G, Interval I, Interval J, NormKind norm,
                         QuadratureOptions opts = {});

/// Arc length of a piecewise C^1 scalar path on [a, b].
double arc_length(const ScalarPath& path, double a, double b, QuadratureOptions opts = {});

/// Arc length of a vector path in R^r measured in `norm`, from its derivative.
double arc_length(const std::function<ColumnVector(double)>& derivative, double a, double b,
                  std::span<const double> breakpoints, NormKind norm,
                  QuadratureOptions opts = {});

struct CovCheck {
    ColumnVector lhs;
    ColumnVector rhs;
    double defect = 0.0;
    bool passed = false;
};

/// Evaluates both sides of the substitution rule
///   int_s^t f'(tau) y(f(tau)) dtau  =  int_{f(s)}^{f(t)} y(u) du
/// by adaptive quadrature. `y_breakpoints` are points in J where y may jump.
CovCheck cov_check(const std::function<ColumnVector(double)>& y, const ScalarPath& f, double s,
                   double t, double tol = 1e-10, std::span<const double> y_breakpoints = {});

} // namespace evostab
