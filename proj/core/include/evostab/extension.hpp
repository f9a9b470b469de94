#pragma once

#include "evostab/calculus.hpp"
#include "evostab/evolution.hpp"
#include "evostab/operators.hpp"
#include "evostab/transport.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evostab {

/// Extension data: a connection on M x J, the graph of f over x > a with
/// v0 < f < v1, and the value of a parallel section at a reference point of
/// U = (M x J) minus the closure of the graph.
struct ExtensionProblem {
    ConnectionForm omega;
    ScalarPath f;
    double a = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    Vector sigma_seed;
    /// Reference point; must satisfy x_ref < a. Defaults to (domain.x.lo, v0).
    std::optional<double> x_ref;
};

/// Tensor grid. values[i][k] belongs to (x[i], v[k]).
struct ExtensionGrid {
    std::vector<double> x;
    std::vector<double> v;

    /// Uniform grid on [x_lo, x_hi] x [v_lo, v_hi], dropping the x-values in
    /// (a, a + floor).
    static ExtensionGrid uniform(double x_lo, double x_hi, std::size_t nx, double v_lo,
                                 double v_hi, std::size_t nv, double a, double floor = 1e-3);

    double spacing() const;
};

struct GridMap {
    std::vector<double> x;
    std::vector<double> v;
    /// Absent entries are points outside the map's domain.
    std::vector<std::vector<std::optional<ColumnVector>>> values;
};

enum class Region { left, below, above, graph };

struct SigmaMap {
    GridMap sigma;
    std::vector<std::vector<Region>> region;
    /// sigma(x[i], v0) and sigma(x[i], v1).
    std::vector<ColumnVector> at_v0;
    std::vector<ColumnVector> at_v1;
    /// Largest disagreement between the two transport routes on x < a.
    double loop_defect = 0.0;
};

/// Parallel section on U obtained by transporting the seed along grid paths
/// that avoid the graph: horizontally along v0 then vertically for points
/// below the graph and for x < a, via v1 for points above it.
SigmaMap build_sigma(const ExtensionProblem& p, const ExtensionGrid& grid,
                     const SolverOptions& opts = {});

struct ExtensionResult {
    GridMap xi0;
    GridMap xi1;
    double max_gap = 0.0;
    /// Largest ||xi1 - xi0|| at each grid point, values[i][k].
    std::vector<std::vector<double>> gap;
    /// Accepted when max_gap <= 100 tol.
    bool accepted = false;
    double tol = 0.0;
};

/// xi_j(x, v) = Y_j(x, v) sigma(x, v_j) where D_2 Y_j = -omega_2 Y_j and
/// Y_j(x, v_j) = id.
ExtensionResult extend_section(const ExtensionProblem& p, const SigmaMap& sigma,
                               const ExtensionGrid& grid, double tol = 1e-10);

struct ResidualGrid {
    std::vector<double> x;
    std::vector<double> v;
    /// ||D_i xi + omega_i xi|| per grid point; absent where masked or where a
    /// difference stencil is unavailable.
    std::vector<std::vector<std::optional<double>>> values;
    double spacing = 0.0;
    std::optional<std::string> warning;

    double max() const;
};

/// Covariant-derivative residual in direction 1 or 2 by central differences
/// on the grid. Points for which `skip` returns true are masked.
ResidualGrid parallel_residual(const ConnectionForm& w, const GridMap& xi, int direction,
                               const std::function<bool(double, double)>& skip = {});

/// Mask of grid points within two spacings of the graph of f over x > a.
std::function<bool(double, double)> near_graph_mask(const ScalarPath& f, double a,
                                                    double spacing);

/// g = (f(b) - p(b)) + p with p the Bernstein polynomial of f on [lo, hi].
struct GraphApproximation {
    double lo = 0.0;
    double hi = 1.0;
    int degree = 0;
    /// f at the Bernstein nodes lo + k (hi - lo) / degree.
    std::vector<double> samples;
    double shift = 0.0;
    /// sup |p - f| on the selection grid.
    double achieved = 0.0;

    /// Bernstein coefficients of g.
    std::vector<double> coefficients() const;
    double p(double t) const;
    double operator()(double t) const { return shift + p(t); }
};

/// Least dyadic degree (starting at 0) with sup |p - f| < tube / 2 on a dense
/// grid. Throws ApproximationFailure beyond `max_degree`.
GraphApproximation polynomial_graph_approx(const std::function<double(double)>& f, double lo,
                                           double hi, double b, double tube,
                                           int max_degree = 1 << 14);

/// Bernstein polynomial of the given samples at t in [lo, hi].
double bernstein_eval(const std::vector<double>& samples, double lo, double hi, double t);

} // namespace evostab
