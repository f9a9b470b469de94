#include "evostab/extension.hpp"

#include "evostab/errors.hpp"
#include "evostab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace evostab {

namespace {

double max_spacing(const std::vector<double>& pts) {
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) h = std::max(h, pts[i + 1] - pts[i]);
    return h;
}

void require_sorted(const std::vector<double>& pts, const char* name) {
    if (pts.empty()) throw DomainViolation(fmt::format("grid {} is empty", name));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i] < pts[i + 1])) {
            throw DomainViolation(fmt::format("grid {} must be strictly increasing", name));
        }
    }
}

double reference_x(const ExtensionProblem& p) {
    return p.x_ref ? *p.x_ref : p.omega.domain.x.lo;
}

void validate(const ExtensionProblem& p, const ExtensionGrid& grid) {
    const Rectangle& dom = p.omega.domain;
    if (!(p.v0 < p.v1)) throw DomainViolation("extension needs v0 < v1");
    if (!dom.u.contains(p.v0) || !dom.u.contains(p.v1)) {
        throw DomainViolation("v0 and v1 must lie in J");
    }
    if (!dom.x.contains(p.a)) throw DomainViolation("a must lie in M");
    const double xr = reference_x(p);
    if (!(xr < p.a) || !dom.x.contains(xr)) {
        throw DomainViolation(fmt::format("reference point x = {} must satisfy x < a in M", xr));
    }
    if (p.sigma_seed.space() != p.omega.space) {
        throw DomainViolation("seed and connection live on different spaces");
    }
    require_sorted(grid.x, "x");
    require_sorted(grid.v, "v");
    if (!dom.contains(grid.x.front(), grid.v.front()) ||
        !dom.contains(grid.x.back(), grid.v.back())) {
        throw DomainViolation("grid leaves the connection rectangle");
    }
    for (double x : grid.x) {
        if (x <= p.a) continue;
        const double y = p.f(x);
        if (!(y > p.v0 && y < p.v1)) {
            throw DomainViolation(
                fmt::format("f({}) = {} leaves ({}, {})", x, y, p.v0, p.v1));
        }
    }
}

Region classify(const ExtensionProblem& p, double x, double v) {
    if (x < p.a) return Region::left;
    if (x == p.a) {
        if (v <= p.v0) return Region::below;
        if (v >= p.v1) return Region::above;
        return Region::graph;
    }
    const double y = p.f(x);
    if (v < y) return Region::below;
    if (v > y) return Region::above;
    return Region::graph;
}

ParamCoefficient minus_omega2(const ConnectionForm& w) {
    return [&w](double x, double v) -> Matrix { return -w.omega2(x, v); };
}

/// Transport in x along the horizontal line v = level.
ParamCoefficient minus_omega1_at(const ConnectionForm& w) {
    return [&w](double level, double x) -> Matrix { return -w.omega1(x, level); };
}

} // namespace

ExtensionGrid ExtensionGrid::uniform(double x_lo, double x_hi, std::size_t nx, double v_lo,
                                     double v_hi, std::size_t nv, double a, double floor) {
    if (nx < 1 || nv < 1) throw DomainViolation("grid needs at least one cell per side");
    ExtensionGrid g;
    for (std::size_t i = 0; i <= nx; ++i) {
        const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx);
        if (x > a && x < a + floor) continue;
        g.x.push_back(x);
    }
    for (std::size_t k = 0; k <= nv; ++k) {
        g.v.push_back(v_lo + (v_hi - v_lo) * static_cast<double>(k) / static_cast<double>(nv));
    }
    return g;
}

double ExtensionGrid::spacing() const { return std::max(max_spacing(x), max_spacing(v)); }

SigmaMap build_sigma(const ExtensionProblem& p, const ExtensionGrid& grid,
                     const SolverOptions& opts) {
    validate(p, grid);
    const ConnectionForm& w = p.omega;
    const VectorSpace space = w.space;
    const double xr = reference_x(p);
    const ColumnVector& seed = p.sigma_seed.entries();

    const auto h0 = param_column(minus_omega1_at(w), space, p.v0, xr, grid.x, opts);
    const auto h1 = param_column(minus_omega1_at(w), space, p.v1, xr, grid.x, opts);
    const Operator vref = param_column(minus_omega2(w), space, xr, p.v0, {p.v1}, opts).front();
    const ColumnVector seed_v1 = vref.matrix() * seed;

    SigmaMap out;
    out.sigma.x = grid.x;
    out.sigma.v = grid.v;
    const std::size_t nx = grid.x.size();
    const std::size_t nv = grid.v.size();
    out.sigma.values.assign(nx, std::vector<std::optional<ColumnVector>>(nv));
    out.region.assign(nx, std::vector<Region>(nv, Region::graph));
    out.at_v0.resize(nx);
    out.at_v1.resize(nx);
    std::vector<double> loop(nx, 0.0);

    parallel_for(nx, [&](std::size_t i) {
        const double x = grid.x[i];
        out.at_v0[i] = h0[i].matrix() * seed;
        out.at_v1[i] = h1[i].matrix() * seed_v1;
        const auto down = param_column(minus_omega2(w), space, x, p.v0, grid.v, opts);
        const auto up = param_column(minus_omega2(w), space, x, p.v1, grid.v, opts);
        for (std::size_t k = 0; k < nv; ++k) {
            const Region r = classify(p, x, grid.v[k]);
            out.region[i][k] = r;
            const ColumnVector via_v0 = down[k].matrix() * out.at_v0[i];
            const ColumnVector via_v1 = up[k].matrix() * out.at_v1[i];
            switch (r) {
            case Region::left:
                out.sigma.values[i][k] = via_v0;
                loop[i] = std::max(loop[i], vector_norm(via_v1 - via_v0, space.norm));
                break;
            case Region::below: out.sigma.values[i][k] = via_v0; break;
            case Region::above: out.sigma.values[i][k] = via_v1; break;
            case Region::graph: break;
            }
        }
    });
    out.loop_defect = *std::max_element(loop.begin(), loop.end());
    return out;
}

ExtensionResult extend_section(const ExtensionProblem& p, const SigmaMap& sigma,
                               const ExtensionGrid& grid, double tol) {
    validate(p, grid);
    if (sigma.at_v0.size() != grid.x.size() || sigma.at_v1.size() != grid.x.size()) {
        throw DomainViolation("sigma boundary data does not match the grid");
    }
    SolverOptions opts;
    opts.rtol = tol;
    opts.atol = tol;
    const VectorSpace space = p.omega.space;
    const auto y0 = param_evolution(minus_omega2(p.omega), space, grid.x, p.v0, grid.v, opts);
    const auto y1 = param_evolution(minus_omega2(p.omega), space, grid.x, p.v1, grid.v, opts);

    ExtensionResult out;
    out.tol = tol;
    const std::size_t nx = grid.x.size();
    const std::size_t nv = grid.v.size();
    for (GridMap* m : {&out.xi0, &out.xi1}) {
        m->x = grid.x;
        m->v = grid.v;
        m->values.assign(nx, std::vector<std::optional<ColumnVector>>(nv));
    }
    out.gap.assign(nx, std::vector<double>(nv, 0.0));
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t k = 0; k < nv; ++k) {
            ColumnVector a = y0.values[i][k].matrix() * sigma.at_v0[i];
            ColumnVector b = y1.values[i][k].matrix() * sigma.at_v1[i];
            out.gap[i][k] = vector_norm(b - a, space.norm);
            out.max_gap = std::max(out.max_gap, out.gap[i][k]);
            out.xi0.values[i][k] = std::move(a);
            out.xi1.values[i][k] = std::move(b);
        }
    }
    out.accepted = out.max_gap <= 100.0 * tol;
    return out;
}

double ResidualGrid::max() const {
    double m = 0.0;
    for (const auto& row : values) {
        for (const auto& r : row) {
            if (r) m = std::max(m, *r);
        }
    }
    return m;
}

ResidualGrid parallel_residual(const ConnectionForm& w, const GridMap& xi, int direction,
                               const std::function<bool(double, double)>& skip) {
    if (direction != 1 && direction != 2) {
        throw DomainViolation(fmt::format("direction must be 1 or 2, got {}", direction));
    }
    const std::size_t nx = xi.x.size();
    const std::size_t nv = xi.v.size();
    ResidualGrid out;
    out.x = xi.x;
    out.v = xi.v;
    out.values.assign(nx, std::vector<std::optional<double>>(nv));
    const auto& axis = direction == 1 ? xi.x : xi.v;
    out.spacing = max_spacing(axis);
    if (out.spacing > 0.1) {
        out.warning = fmt::format("grid spacing {} exceeds 0.1; differences are unreliable",
                                  out.spacing);
    }
    auto masked = [&](std::size_t i, std::size_t k) {
        return !xi.values[i][k] || (skip && skip(xi.x[i], xi.v[k]));
    };
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t k = 0; k < nv; ++k) {
            const std::size_t idx = direction == 1 ? i : k;
            if (idx == 0 || idx + 1 >= axis.size()) continue;
            std::size_t im = i, ip = i, km = k, kp = k;
            if (direction == 1) {
                im = i - 1;
                ip = i + 1;
            } else {
                km = k - 1;
                kp = k + 1;
            }
            if (masked(i, k) || masked(im, km) || masked(ip, kp)) continue;
            const double h1 = axis[idx] - axis[idx - 1];
            const double h2 = axis[idx + 1] - axis[idx];
            const ColumnVector& fm = *xi.values[im][km];
            const ColumnVector& f0 = *xi.values[i][k];
            const ColumnVector& fp = *xi.values[ip][kp];
            const ColumnVector d = (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 +
                                   (h1 / (h2 * (h1 + h2))) * fp;
            const Matrix om = direction == 1 ? w.omega1(xi.x[i], xi.v[k])
                                             : w.omega2(xi.x[i], xi.v[k]);
            out.values[i][k] = vector_norm(d + om * f0, w.space.norm);
        }
    }
    return out;
}

std::function<bool(double, double)> near_graph_mask(const ScalarPath& f, double a,
                                                    double spacing) {
    return [f, a, spacing](double x, double v) {
        return x > a && std::abs(v - f(x)) < 2.0 * spacing;
    };
}

double bernstein_eval(const std::vector<double>& samples, double lo, double hi, double t) {
    const int n = static_cast<int>(samples.size()) - 1;
    if (n < 0) throw DomainViolation("Bernstein polynomial needs at least one sample");
    if (n == 0) return samples[0];
    const double y = std::clamp((t - lo) / (hi - lo), 0.0, 1.0);
    if (y == 0.0) return samples.front();
    if (y == 1.0) return samples.back();
    const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * y)), 0, n);
    const double log_pm = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                          std::lgamma(n - mode + 1.0) + mode * std::log(y) +
                          (n - mode) * std::log1p(-y);
    const double pm = std::exp(log_pm);
    const double odds = y / (1.0 - y);
    constexpr double cutoff = 1e-18;
    double sum = pm * samples[mode];
    double weight = pm;
    double w = pm;
    for (int k = mode; k < n; ++k) {
        w *= odds * (n - k) / (k + 1.0);
        sum += w * samples[k + 1];
        weight += w;
        if (w < cutoff * pm) break;
    }
    w = pm;
    for (int k = mode; k > 0; --k) {
        w *= k / ((n - k + 1.0) * odds);
        sum += w * samples[k - 1];
        weight += w;
        if (w < cutoff * pm) break;
    }
    return sum / weight;
}

std::vector<double> GraphApproximation::coefficients() const {
    std::vector<double> c = samples;
    for (double& v : c) v += shift;
    return c;
}

double GraphApproximation::p(double t) const { return bernstein_eval(samples, lo, hi, t); }

GraphApproximation polynomial_graph_approx(const std::function<double(double)>& f, double lo,
                                           double hi, double b, double tube, int max_degree) {
    if (!(lo < hi)) throw DomainViolation("graph approximation needs lo < hi");
    if (!(b >= lo && b <= hi)) throw DomainViolation("b must lie in [lo, hi]");
    if (!(tube > 0.0)) throw DomainViolation("tube must be positive");

    constexpr std::size_t checks = 40000;
    std::vector<double> ts(checks + 1);
    std::vector<double> fs(checks + 1);
    for (std::size_t i = 0; i <= checks; ++i) {
        ts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(checks);
        fs[i] = f(ts[i]);
    }

    GraphApproximation g;
    g.lo = lo;
    g.hi = hi;
    double achieved = 0.0;
    for (int n = 0; n <= max_degree; n = n == 0 ? 1 : 2 * n) {
        g.degree = n;
        g.samples.resize(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            g.samples[k] = n == 0 ? f(lo) : f(lo + (hi - lo) * k / n);
        }
        std::vector<double> errs(ts.size());
        parallel_for(ts.size(), [&](std::size_t i) { errs[i] = std::abs(g.p(ts[i]) - fs[i]); });
        achieved = *std::max_element(errs.begin(), errs.end());
        if (achieved < tube / 2.0) {
            g.achieved = achieved;
            g.shift = f(b) - g.p(b);
            return g;
        }
    }
    throw ApproximationFailure(
        fmt::format("Bernstein degree {} reaches sup error {} but needs < {}", max_degree,
                    achieved, tube / 2.0),
        max_degree, achieved);
}

} // namespace evostab
