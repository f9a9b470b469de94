#include "evostab/calculus.hpp"

#include "evostab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <queue>

namespace evostab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_breakpoint(double t, const std::vector<double>& bps) {
    return std::binary_search(bps.begin(), bps.end(), t);
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// Points lo = p_0 < ... < p_k = hi, split at breakpoints strictly inside.
std::vector<double> split_points(double lo, double hi, std::span<const double> breakpoints) {
    std::vector<double> pts{lo};
    std::vector<double> inner;
    for (double b : breakpoints) {
        if (b > lo && b < hi) inner.push_back(b);
    }
    std::sort(inner.begin(), inner.end());
    for (double b : inner) {
        if (b > pts.back()) pts.push_back(b);
    }
    if (hi > pts.back()) pts.push_back(hi);
    return pts;
}

struct ScalarTraits {
    using Value = double;
    static double zero(const Value&) { return 0.0; }
    static double size(const Value& v) { return std::abs(v); }
};

struct VectorTraits {
    using Value = ColumnVector;
    static Value zero(const Value& like) { return ColumnVector::Zero(like.size()); }
    static double size(const Value& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }
};

template <class Traits>
struct Panel {
    double a;
    double b;
    typename Traits::Value value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

/// One Gauss-Kronrod 7/15 panel; the error estimate is |K15 - G7|.
template <class Traits, class F>
Panel<Traits> gk15(const F& g, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    auto center = g(c);
    typename Traits::Value kron = center * wk[0];
    typename Traits::Value gauss = center * wg[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const typename Traits::Value pair = g(c + h * x[i]) + g(c - h * x[i]);
        kron += pair * wk[i];
        if (i % 2 == 0) gauss += pair * wg[i / 2];
    }
    kron *= h;
    gauss *= h;
    const double err = Traits::size(kron - gauss);
    return {a, b, std::move(kron), err};
}

template <class Traits, class F>
std::pair<typename Traits::Value, double> adaptive(const F& g, Interval K,
                                                   std::span<const double> breakpoints,
                                                   const QuadratureOptions& opts) {
    if (!K.is_finite()) {
        throw QuadratureFailure("quadrature over an unbounded interval", 0.0, kInf);
    }
    std::vector<Panel<Traits>> done; // panels too narrow to bisect
    std::priority_queue<Panel<Traits>> queue;
    const auto pts = split_points(K.lo, K.hi, breakpoints);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) queue.push(gk15<Traits>(g, pts[i], pts[i + 1]));
    if (queue.empty()) {
        auto probe = g(K.lo);
        return {Traits::zero(probe), 0.0};
    }

    // Exact re-summation over all panels; the running error sum only steers.
    auto collect = [&] {
        auto copy = queue;
        typename Traits::Value sum = Traits::zero(copy.top().value);
        double err = 0.0;
        for (; !copy.empty(); copy.pop()) {
            sum += copy.top().value;
            err += copy.top().error;
        }
        for (const auto& p : done) {
            sum += p.value;
            err += p.error;
        }
        return std::pair{sum, err};
    };

    auto [value, err] = collect();
    double running_err = err;
    int subdivisions = 0;
    while (true) {
        const double target = std::max(opts.abs_tol, opts.rel_tol * Traits::size(value));
        if (running_err <= target || queue.empty() || subdivisions >= opts.max_subdivisions) {
            std::tie(value, err) = collect();
            const double exact_target = std::max(opts.abs_tol, opts.rel_tol * Traits::size(value));
            if (err <= exact_target) return {value, err};
            if (queue.empty() || subdivisions >= opts.max_subdivisions) {
                throw QuadratureFailure(
                    fmt::format("quadrature did not converge on [{}, {}] after {} subdivisions "
                                "(error bound {:.3e} > {:.3e})",
                                K.lo, K.hi, subdivisions, err, exact_target),
                    Traits::size(value), err);
            }
            running_err = err;
            continue;
        }
        Panel<Traits> worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            done.push_back(std::move(worst));
            continue;
        }
        auto left = gk15<Traits>(g, worst.a, mid);
        auto right = gk15<Traits>(g, mid, worst.b);
        running_err += left.error + right.error - worst.error;
        value += left.value + right.value - worst.value;
        queue.push(std::move(left));
        queue.push(std::move(right));
        ++subdivisions;
    }
}

} // namespace

Interval::Interval(double l, double h) : lo(l), hi(h) {
    if (std::isnan(l) || std::isnan(h) || l > h) {
        throw DomainViolation(fmt::format("invalid interval [{}, {}]", l, h));
    }
}

bool Interval::is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }

ScalarPath::ScalarPath(Fn eval, std::optional<Fn> deriv, std::vector<double> breakpoints,
                       Interval domain)
    : eval_(std::move(eval)), deriv_(std::move(deriv)),
      breakpoints_(sorted_unique(std::move(breakpoints))), domain_(domain) {}

ScalarPath ScalarPath::constant(double c, Interval domain) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, {}, domain};
}

ScalarPath ScalarPath::affine(double slope, double offset, Interval domain) {
    return {[=](double t) { return slope * t + offset; }, [slope](double) { return slope; }, {},
            domain};
}

double ScalarPath::derivative(double t) const {
    if (is_breakpoint(t, breakpoints_)) return 0.0;
    if (deriv_) return (*deriv_)(t);
    return safe_difference(eval_, t, breakpoints_, domain_);
}

OperatorField::OperatorField(int dim, Fn eval, std::optional<Fn> partial_t,
                             std::vector<double> t_breakpoints, Interval t_domain)
    : dim_(dim), eval_(std::move(eval)), partial_(std::move(partial_t)),
      t_breakpoints_(sorted_unique(std::move(t_breakpoints))), t_domain_(t_domain) {}

Matrix OperatorField::partial_t(double t, double u) const {
    if (is_breakpoint(t, t_breakpoints_)) return Matrix::Zero(dim_, dim_);
    if (partial_) return (*partial_)(t, u);
    auto slice = [&](double tau) -> Matrix { return eval_(tau, u); };
    return safe_difference(slice, t, t_breakpoints_, t_domain_);
}

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainViolation("partition needs at least one point");
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (!(points_[i] < points_[i + 1])) {
            throw DomainViolation("partition points must be strictly increasing");
        }
    }
}

Partition Partition::uniform(double lo, double hi, std::size_t segments) {
    if (segments == 0 || !(lo < hi)) return Partition({lo});
    std::vector<double> pts(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
        pts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(segments);
    }
    pts.back() = hi;
    return Partition(std::move(pts));
}

Partition Partition::with_mesh(double lo, double hi, double max_mesh) {
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / max_mesh - 1e-12));
    return uniform(lo, hi, std::max<std::size_t>(n, 1));
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) m = std::max(m, points_[i + 1] - points_[i]);
    return m;
}

std::size_t Partition::segment_of(double t) const {
    if (segments() == 0) return 0;
    auto it = std::upper_bound(points_.begin(), points_.end(), t);
    auto idx = static_cast<std::size_t>(std::distance(points_.begin(), it));
    if (idx == 0) return 0;
    return std::min(idx - 1, segments() - 1);
}

QuadratureResult integrate(const std::function<double(double)>& g, Interval K,
                           std::span<const double> breakpoints, QuadratureOptions opts) {
    auto [value, err] = adaptive<ScalarTraits>(g, K, breakpoints, opts);
    return {value, err, 0};
}

VectorQuadratureResult integrate_vector(const std::function<ColumnVector(double)>& g, Interval K,
                                        std::span<const double> breakpoints,
                                        QuadratureOptions opts) {
    auto [value, err] = adaptive<VectorTraits>(g, K, breakpoints, opts);
    return {std::move(value), err};
}

double integrate_between(const std::function<double(double)>& g, double s, double t,
                         std::span<const double> breakpoints, QuadratureOptions opts) {
    if (s == t) return 0.0;
    if (s < t) return integrate(g, {s, t}, breakpoints, opts).value;
    return -integrate(g, {t, s}, breakpoints, opts).value;
}

double l1_norm_in_u(const OperatorField& G, double t, Interval J, NormKind norm,
                    QuadratureOptions opts) {
    return integrate([&](double u) { return matrix_norm(G(t, u), norm); }, J, {}, opts).value;
}

double l1_distance_in_u(const OperatorField& G, double t1, double t2, Interval J, NormKind norm,
                        QuadratureOptions opts) {
    if (G.u_independent()) {
        const double u = std::isfinite(J.lo) ? J.lo : 0.0;
        return J.length() * matrix_norm(G(t1, u) - G(t2, u), norm);
    }
    return integrate([&](double u) { return matrix_norm(G(t1, u) - G(t2, u), norm); }, J, {}, opts)
        .value;
}

double partition_sum(const std::function<double(double, double)>& distance,
                     std::span<const double> points) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) sum += distance(points[i], points[i + 1]);
    return sum;
}

VariationResult total_variation_refinement(const std::function<double(double, double)>& distance,
                                           Interval I, std::span<const double> breakpoints,
                                           double rel_change, int max_level, int initial_level) {
    if (!I.is_finite()) throw DomainViolation("total variation needs a finite interval");
    VariationResult out;
    out.mode = VariationMode::refinement;
    if (I.length() == 0.0) return out;

    auto points_at = [&](int level) {
        const std::size_t n = std::size_t{1} << level;
        std::vector<double> pts = Partition::uniform(I.lo, I.hi, n).points();
        for (double b : breakpoints) {
            if (b > I.lo && b < I.hi) pts.push_back(b);
        }
        return sorted_unique(std::move(pts));
    };

    auto pts = points_at(initial_level);
    double prev = partition_sum(distance, pts);
    for (int level = initial_level + 1; level <= max_level; ++level) {
        pts = points_at(level);
        const double cur = partition_sum(distance, pts);
        out.previous = prev;
        out.value = cur;
        out.segments = pts.size() - 1;
        if (std::abs(cur - prev) <= rel_change * std::abs(cur)) {
            out.converged = true;
            return out;
        }
        prev = cur;
    }
    out.converged = false;
    return out;
}

VariationResult total_variation_path(const OperatorPath& G, Interval I, NormKind norm,
                                     QuadratureOptions opts) {
    if (!G.deriv) {
        auto dist = [&](double a, double b) { return matrix_norm(G.eval(b) - G.eval(a), norm); };
        return total_variation_refinement(dist, I, G.breakpoints);
    }
    const auto& dG = *G.deriv;
    const auto bps = sorted_unique(G.breakpoints);
    VariationResult out;
    out.mode = VariationMode::derivative;
    out.value = integrate(
                    [&](double t) {
                        if (is_breakpoint(t, bps)) return 0.0;
                        return matrix_norm(dG(t), norm);
                    },
                    I, bps, opts)
                    .value;
    return out;
}

double tv_l1_upper_bound(const OperatorField& G, Interval I, Interval J, NormKind norm,
                         QuadratureOptions opts) {
    if (!I.is_finite() || !J.is_finite()) {
        throw DomainViolation("tv_l1_upper_bound needs finite I and J");
    }
    const auto& bps = G.t_breakpoints();
    if (!G.has_analytic_partial()) opts.abs_tol = std::max(opts.abs_tol, 1e-8);
    if (G.u_independent()) {
        const double u = J.lo;
        return J.length() *
               integrate([&](double t) { return matrix_norm(G.partial_t(t, u), norm); }, I, bps,
                         opts)
                   .value;
    }
    QuadratureOptions inner = opts;
    inner.abs_tol = opts.abs_tol / std::max(1.0, 4.0 * I.length());
    auto outer = [&](double t) {
        return integrate([&](double u) { return matrix_norm(G.partial_t(t, u), norm); }, J, {},
                         inner)
            .value;
    };
    return integrate(outer, I, bps, opts).value;
}

double arc_length(const ScalarPath& path, double a, double b, QuadratureOptions opts) {
    if (a == b) return 0.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return integrate([&](double t) { return std::abs(path.derivative(t)); }, {lo, hi},
                     path.breakpoints(), opts)
        .value;
}

double arc_length(const std::function<ColumnVector(double)>& derivative, double a, double b,
                  std::span<const double> breakpoints, NormKind norm, QuadratureOptions opts) {
    if (a == b) return 0.0;
    return integrate([&](double t) { return vector_norm(derivative(t), norm); },
                     {std::min(a, b), std::max(a, b)}, breakpoints, opts)
        .value;
}

CovCheck cov_check(const std::function<ColumnVector(double)>& y, const ScalarPath& f, double s,
                   double t, double tol, std::span<const double> y_breakpoints) {
    QuadratureOptions opts;
    opts.abs_tol = tol;
    auto signed_integral = [&](const std::function<ColumnVector(double)>& g, double from,
                               double to, std::span<const double> bps) -> ColumnVector {
        if (from == to) {
            return ColumnVector::Zero(y(f(from)).size());
        }
        auto r = integrate_vector(g, {std::min(from, to), std::max(from, to)}, bps, opts);
        return from < to ? r.value : ColumnVector(-r.value);
    };
    CovCheck out;
    out.lhs = signed_integral([&](double tau) -> ColumnVector { return f.derivative(tau) * y(f(tau)); },
                              s, t, f.breakpoints());
    out.rhs = signed_integral(y, f(s), f(t), y_breakpoints);
    out.defect = (out.lhs - out.rhs).norm();
    out.passed = out.defect <= 10.0 * tol;
    return out;
}

} // namespace evostab
