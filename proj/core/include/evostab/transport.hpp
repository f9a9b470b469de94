#pragma once

#include "evostab/calculus.hpp"
#include "evostab/evolution.hpp"
#include "evostab/operators.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace evostab {

/// Closed rectangle M x J in the plane.
struct Rectangle {
    Interval x;
    Interval u;

    bool contains(double px, double pu) const { return x.contains(px) && u.contains(pu); }
};

/// Connection form omega = (omega_1, omega_2) on the trivial bundle over a
/// planar rectangle, each component already evaluated at the unit tangent.
struct ConnectionForm {
    using Field = std::function<Matrix(double x, double u)>;

    Field omega1;
    Field omega2;
    std::optional<Field> d1_omega2;
    Rectangle domain;
    VectorSpace space;

    /// D_1 omega_2, analytic if supplied, else a central difference in x.
    Matrix d1_omega2_at(double x, double u) const;

    static ConnectionForm zero(VectorSpace space, Rectangle domain);

    /// Flat connection omega = -(Dg) g^{-1} of a gauge g; its transports are
    /// g(end) g(start)^{-1}.
    static ConnectionForm gauge(Field g, Field dg_dx, Field dg_du, VectorSpace space,
                                Rectangle domain);
};

/// Piecewise C^1 curve t -> (gamma1(t), gamma2(t)), t in [a, b].
struct Curve {
    ScalarPath gamma1;
    ScalarPath gamma2;
    double a = 0.0;
    double b = 1.0;

    std::vector<double> breakpoints() const;
    /// Same image traversed backwards on the same parameter interval.
    Curve reversed() const;

    /// Straight segment from (x0, u0) to (x1, u1) on [0, 1].
    static Curve segment(double x0, double u0, double x1, double u1);
};

/// The topologist's sine curve t -> (t, sin(1/t)) restricted to [a, b] with
/// a < b < 0, parametrized by sigma = -1/t so the oscillation has unit
/// frequency. The image and hence the transport are those of the original.
Curve sine_curve(double a, double b);

/// P_gamma = X(b, a) for the coefficient
/// A(t) = -(omega_1(gamma(t)) gamma1'(t) + omega_2(gamma(t)) gamma2'(t)).
Operator parallel_transport(const ConnectionForm& w, const Curve& curve,
                            const SolverOptions& opts = {});

enum class BoundsProvenance { user_supplied, grid_sampled };

struct ConnectionBounds {
    double B1 = 0.0;
    double B2 = 0.0;
    double B12 = 0.0;
    double lambda_J = 1.0;
    BoundsProvenance provenance = BoundsProvenance::user_supplied;
    /// Final grid resolution (cells per side) when sampled.
    std::size_t resolution = 0;
    bool converged = true;
};

struct BetaValue {
    double beta = 1.0;
    double N = 1.0;
    double C = 1.0;
    double log_beta = 0.0;
    /// True when beta overflowed and was saturated to +inf.
    bool saturated = false;
};

/// beta(L) = C(L) exp(C(L) B1 L) with C(L) = N^2 exp(N^{3+2N} lambda(J) B12 L)
/// and N = exp(lambda(J) B2).
BetaValue beta_bound(const ConnectionBounds& b, double L);

/// Grid sup norms of omega_1, omega_2 and D_1 omega_2, refined dyadically
/// until each changes by less than 1e-2 relative, then inflated by 5%.
ConnectionBounds sample_connection_bounds(const ConnectionForm& w, std::size_t resolution = 32,
                                          std::size_t max_resolution = 1024);

struct SineCurveOptions {
    /// Closest admissible approach to 0.
    double b_floor = -1e-4;
    SolverOptions solver;
};

struct SineCurveRow {
    double b = 0.0;
    /// ||P_{gamma_b}(v)||.
    double norm_P = 0.0;
    /// C = beta(-a).
    double beta = 0.0;
    /// beta(b - a), nondecreasing in b.
    double beta_b = 0.0;
    double ratio = 0.0;
    double reverse_norm = 0.0;
    double roundtrip_defect = 0.0;
    bool passed = false;
    std::optional<std::string> error;
};

struct SineCurveReport {
    std::vector<SineCurveRow> rows;
    ConnectionBounds bounds;
    double C = 0.0;
    bool passed = true;
};

/// Transports v along the sine curve from a to each b and checks
/// ||v|| / C <= ||P_{gamma_b} v|| <= C ||v||, the lower bound coming from the
/// reversed path.
SineCurveReport sine_curve_scenario(const ConnectionForm& w, double a,
                                    const std::vector<double>& b_list, const Vector& v,
                                    std::optional<ConnectionBounds> bounds = std::nullopt,
                                    const SineCurveOptions& opts = {});

} // namespace evostab
