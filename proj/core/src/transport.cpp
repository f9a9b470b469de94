#include "evostab/transport.hpp"

#include "evostab/errors.hpp"
#include "evostab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace evostab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_inside(const Rectangle& r, double x, double u) {
    const double sx = 1e-12 * std::max(1.0, std::abs(x));
    const double su = 1e-12 * std::max(1.0, std::abs(u));
    if (!(x >= r.x.lo - sx && x <= r.x.hi + sx && u >= r.u.lo - su && u <= r.u.hi + su)) {
        throw DomainViolation(fmt::format("curve point ({}, {}) leaves [{}, {}] x [{}, {}]", x, u,
                                          r.x.lo, r.x.hi, r.u.lo, r.u.hi));
    }
}

double relative_change(double before, double after) {
    if (after == 0.0) return before == 0.0 ? 0.0 : kInf;
    return std::abs(after - before) / std::abs(after);
}

struct GridSups {
    double b1 = 0.0;
    double b2 = 0.0;
    double b12 = 0.0;
};

GridSups grid_sups(const ConnectionForm& w, std::size_t n) {
    const NormKind norm = w.space.norm;
    std::vector<GridSups> rows(n + 1);
    parallel_for(n + 1, [&](std::size_t i) {
        const double x = w.domain.x.lo + w.domain.x.length() * static_cast<double>(i) /
                                             static_cast<double>(n);
        GridSups s;
        for (std::size_t k = 0; k <= n; ++k) {
            const double u = w.domain.u.lo + w.domain.u.length() * static_cast<double>(k) /
                                                 static_cast<double>(n);
            s.b1 = std::max(s.b1, matrix_norm(w.omega1(x, u), norm));
            s.b2 = std::max(s.b2, matrix_norm(w.omega2(x, u), norm));
            s.b12 = std::max(s.b12, matrix_norm(w.d1_omega2_at(x, u), norm));
        }
        rows[i] = s;
    });
    GridSups out;
    for (const auto& s : rows) {
        out.b1 = std::max(out.b1, s.b1);
        out.b2 = std::max(out.b2, s.b2);
        out.b12 = std::max(out.b12, s.b12);
    }
    return out;
}

} // namespace

Matrix ConnectionForm::d1_omega2_at(double x, double u) const {
    if (d1_omega2) return (*d1_omega2)(x, u);
    return safe_difference([&](double xx) -> Matrix { return omega2(xx, u); }, x, {}, domain.x);
}

ConnectionForm ConnectionForm::zero(VectorSpace space, Rectangle domain) {
    const int r = space.dim;
    auto z = [r](double, double) -> Matrix { return Matrix::Zero(r, r); };
    return {z, z, Field(z), domain, space};
}

ConnectionForm ConnectionForm::gauge(Field g, Field dg_dx, Field dg_du, VectorSpace space,
                                     Rectangle domain) {
    ConnectionForm w;
    w.omega1 = [g, dg_dx](double x, double u) -> Matrix {
        return -dg_dx(x, u) * g(x, u).inverse();
    };
    w.omega2 = [g, dg_du](double x, double u) -> Matrix {
        return -dg_du(x, u) * g(x, u).inverse();
    };
    w.domain = domain;
    w.space = space;
    return w;
}

std::vector<double> Curve::breakpoints() const {
    std::vector<double> out = gamma1.breakpoints();
    out.insert(out.end(), gamma2.breakpoints().begin(), gamma2.breakpoints().end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Curve Curve::reversed() const {
    const double sum = a + b;
    auto flip = [sum](const ScalarPath& p) {
        std::vector<double> bps;
        for (double t : p.breakpoints()) bps.push_back(sum - t);
        std::sort(bps.begin(), bps.end());
        return ScalarPath([p, sum](double t) { return p(sum - t); },
                          ScalarPath::Fn([p, sum](double t) { return -p.derivative(sum - t); }),
                          std::move(bps));
    };
    return {flip(gamma1), flip(gamma2), a, b};
}

Curve Curve::segment(double x0, double u0, double x1, double u1) {
    return {ScalarPath::affine(x1 - x0, x0), ScalarPath::affine(u1 - u0, u0), 0.0, 1.0};
}

Curve sine_curve(double a, double b) {
    if (!(a < b && b < 0.0)) {
        throw DomainViolation(fmt::format("sine curve needs a < b < 0, got [{}, {}]", a, b));
    }
    ScalarPath g1([](double s) { return -1.0 / s; },
                  ScalarPath::Fn([](double s) { return 1.0 / (s * s); }), {});
    ScalarPath g2([](double s) { return -std::sin(s); },
                  ScalarPath::Fn([](double s) { return -std::cos(s); }), {});
    return {std::move(g1), std::move(g2), -1.0 / a, -1.0 / b};
}

Operator parallel_transport(const ConnectionForm& w, const Curve& curve,
                            const SolverOptions& opts) {
    if (!(curve.a <= curve.b)) {
        throw DomainViolation(fmt::format("curve interval [{}, {}] is empty", curve.a, curve.b));
    }
    constexpr int probes = 256;
    for (int i = 0; i <= probes; ++i) {
        const double t = curve.a + (curve.b - curve.a) * i / probes;
        require_inside(w.domain, curve.gamma1(t), curve.gamma2(t));
    }
    for (double t : curve.breakpoints()) {
        if (t >= curve.a && t <= curve.b) {
            require_inside(w.domain, curve.gamma1(t), curve.gamma2(t));
        }
    }
    CoefficientPath A;
    A.space = w.space;
    A.domain = Interval(curve.a, curve.b);
    A.breakpoints = curve.breakpoints();
    A.eval = [&w, &curve](double t) -> Matrix {
        const double x = curve.gamma1(t);
        const double u = curve.gamma2(t);
        require_inside(w.domain, x, u);
        return -(w.omega1(x, u) * curve.gamma1.derivative(t) +
                 w.omega2(x, u) * curve.gamma2.derivative(t));
    };
    return evolve(A, curve.a, curve.b, opts);
}

BetaValue beta_bound(const ConnectionBounds& b, double L) {
    for (double v : {b.B1, b.B2, b.B12, b.lambda_J, L}) {
        if (!std::isfinite(v)) throw DomainViolation("beta_bound needs finite inputs");
    }
    if (b.B1 < 0 || b.B2 < 0 || b.B12 < 0 || L < 0) {
        throw DomainViolation("beta_bound needs nonnegative bounds and length");
    }
    if (!(b.lambda_J > 0)) throw DomainViolation("beta_bound needs lambda(J) > 0");

    BetaValue out;
    const double log_n = b.lambda_J * b.B2;
    out.N = std::exp(log_n);
    const double rate = b.lambda_J * b.B12 * L;
    double exponent = 0.0;
    if (rate > 0.0) exponent = std::exp((3.0 + 2.0 * out.N) * log_n + std::log(rate));
    const double log_c = 2.0 * log_n + exponent;
    out.C = std::exp(log_c);
    double growth = 0.0;
    if (b.B1 * L > 0.0) growth = std::exp(log_c + std::log(b.B1 * L));
    out.log_beta = log_c + growth;
    out.beta = std::exp(out.log_beta);
    out.saturated = !std::isfinite(out.beta);
    if (out.saturated) out.beta = kInf;
    return out;
}

ConnectionBounds sample_connection_bounds(const ConnectionForm& w, std::size_t resolution,
                                          std::size_t max_resolution) {
    if (!w.domain.x.is_finite() || !w.domain.u.is_finite()) {
        throw DomainViolation("sampling connection bounds needs a finite rectangle");
    }
    std::size_t n = std::max<std::size_t>(resolution, 1);
    GridSups cur = grid_sups(w, n);
    bool converged = false;
    while (2 * n <= max_resolution) {
        const GridSups next = grid_sups(w, 2 * n);
        n *= 2;
        converged = relative_change(cur.b1, next.b1) < 1e-2 &&
                    relative_change(cur.b2, next.b2) < 1e-2 &&
                    relative_change(cur.b12, next.b12) < 1e-2;
        cur = next;
        if (converged) break;
    }
    ConnectionBounds out;
    out.B1 = 1.05 * cur.b1;
    out.B2 = 1.05 * cur.b2;
    out.B12 = 1.05 * cur.b12;
    out.lambda_J = w.domain.u.length();
    out.provenance = BoundsProvenance::grid_sampled;
    out.resolution = n;
    out.converged = converged;
    return out;
}

SineCurveReport sine_curve_scenario(const ConnectionForm& w, double a,
                                    const std::vector<double>& b_list, const Vector& v,
                                    std::optional<ConnectionBounds> bounds,
                                    const SineCurveOptions& opts) {
    if (!(a < 0.0)) throw DomainViolation(fmt::format("sine curve needs a < 0, got {}", a));
    if (!(w.domain.x.lo <= a && w.domain.x.hi >= 0.0 && w.domain.u.lo <= -1.0 &&
          w.domain.u.hi >= 1.0)) {
        throw DomainViolation("connection rectangle must contain [a, 0) x [-1, 1]");
    }
    SineCurveReport report;
    report.bounds = bounds ? *bounds : sample_connection_bounds(w);
    report.C = beta_bound(report.bounds, -a).beta;
    const double C = report.C;
    const double upper = C * (1.0 + 1e-6);
    const double lower = std::isfinite(C) ? (1.0 - 1e-6) / C : 0.0;
    const double v_norm = v.norm();
    const Operator id = Operator::identity(w.space);

    report.rows.resize(b_list.size());
    parallel_for(b_list.size(), [&](std::size_t i) {
        SineCurveRow row;
        row.b = b_list[i];
        row.beta = C;
        try {
            if (!(row.b > a && row.b < 0.0)) {
                throw DomainViolation(fmt::format("b = {} outside ({}, 0)", row.b, a));
            }
            if (row.b > opts.b_floor) {
                throw DomainViolation(
                    fmt::format("b = {} is closer to 0 than the floor {}", row.b, opts.b_floor));
            }
            row.beta_b = beta_bound(report.bounds, row.b - a).beta;
            const Curve curve = sine_curve(a, row.b);
            const Operator P = parallel_transport(w, curve, opts.solver);
            const Operator R = parallel_transport(w, curve.reversed(), opts.solver);
            row.norm_P = (P * v).norm();
            row.ratio = v_norm > 0.0 ? row.norm_P / v_norm : 1.0;
            row.reverse_norm = op_norm(R);
            row.roundtrip_defect = op_norm(R * P - id);
            row.passed = row.norm_P <= upper * v_norm && row.norm_P >= lower * v_norm &&
                         op_norm(P) <= upper && row.reverse_norm <= upper;
        } catch (const Error& e) {
            row.error = e.what();
            row.passed = false;
        }
        report.rows[i] = row;
    });
    for (const auto& row : report.rows) report.passed = report.passed && row.passed;
    return report;
}

} // namespace evostab
