#include "evostab/stability.hpp"

#include "evostab/errors.hpp"
#include "evostab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace evostab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

double checked_f(const SeparableSystem& sys, double t) {
    const double u = sys.f(t);
    const double slack = 1e-12 * std::max(1.0, std::abs(u));
    if (!(u >= sys.J.lo - slack && u <= sys.J.hi + slack)) {
        throw DomainViolation(
            fmt::format("f({}) = {} leaves J = [{}, {}]", t, u, sys.J.lo, sys.J.hi));
    }
    return std::clamp(u, sys.J.lo, sys.J.hi);
}

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

CoefficientPath assemble_A(const SeparableSystem& sys) {
    CoefficientPath A;
    A.space = sys.space;
    A.domain = sys.I;
    A.breakpoints = merged(sys.f.breakpoints(), sys.G.t_breakpoints());
    A.eval = [sys](double t) -> Matrix {
        const double u = checked_f(sys, t);
        return sys.f.derivative(t) * sys.G(t, u);
    };
    return A;
}

double BoundCertificate::ratio(double norm) const {
    if (!std::isfinite(C)) return 0.0;
    return norm / C;
}

BoundCertificate make_certificate(double N, double V) {
    if (!(N >= 1.0)) throw DomainViolation(fmt::format("certificate needs N >= 1, got {}", N));
    if (!(V >= 0.0)) throw DomainViolation(fmt::format("certificate needs V >= 0, got {}", V));
    BoundCertificate c;
    c.N = N;
    c.V = V;
    const double log_n = std::log(N);
    if (V == 0.0) {
        c.log_exponent = -kInf;
        c.log_C = 2.0 * log_n;
        c.C = N * N;
        return c;
    }
    c.log_exponent = (3.0 + 2.0 * N) * log_n + std::log(V);
    const double exponent = std::pow(N, 3.0 + 2.0 * N) * V;
    c.log_C = 2.0 * log_n + exponent;
    c.C = N * N * std::exp(exponent);
    return c;
}

BoundCertificate certify(const OperatorField& G, Interval J, Interval window, NormKind norm,
                         const CertifyOptions& opts) {
    if (!J.is_finite()) throw DomainViolation("certify needs a finite J");
    if (!window.is_finite()) throw DomainViolation("certify needs a finite window");
    QuadratureOptions q;
    q.abs_tol = opts.quad_tol;

    // Sampled sup of ||G(t)||_{L^1(J)} over nested dyadic grids.
    std::vector<double> extra;
    for (double b : G.t_breakpoints()) {
        if (b > window.lo && b < window.hi) extra.push_back(b);
    }
    double sup = 0.0;
    double argmax = window.lo;
    auto consider = [&](double t) {
        const double v = l1_norm_in_u(G, t, J, norm, q);
        if (v > sup) {
            sup = v;
            argmax = t;
        }
    };
    for (double b : extra) consider(b);
    std::size_t n = std::max<std::size_t>(opts.initial_grid, 1);
    for (std::size_t i = 0; i <= n; ++i) {
        consider(window.lo + window.length() * static_cast<double>(i) / static_cast<double>(n));
    }
    bool converged = window.length() == 0.0;
    while (!converged && 2 * n <= opts.max_grid) {
        const double before = sup;
        const std::size_t m = 2 * n;
        for (std::size_t i = 1; i < m; i += 2) {
            consider(window.lo + window.length() * static_cast<double>(i) / static_cast<double>(m));
        }
        n = m;
        converged = (sup - before) <= opts.sup_rel_change * sup;
    }

    const double sup_l1 = opts.analytic_sup_l1 ? *opts.analytic_sup_l1 : sup;
    const double N = std::exp(sup_l1);

    double V = 0.0;
    std::string route;
    if (G.u_independent()) {
        OperatorPath path;
        const double u0 = J.lo;
        path.eval = [&G, u0](double t) { return G(t, u0); };
        path.deriv = [&G, u0](double t) { return G.partial_t(t, u0); };
        path.breakpoints = G.t_breakpoints();
        V = J.length() * total_variation_path(path, window, norm, q).value;
        route = "u-independent";
    } else {
        V = tv_l1_upper_bound(G, window, J, norm, q);
        route = "double-integral";
    }

    BoundCertificate cert = make_certificate(N, V);
    cert.window = window;
    cert.sup_grid = n + 1;
    cert.sup_argmax = argmax;
    cert.sup_converged = converged || opts.analytic_sup_l1.has_value();
    cert.quad_tol = opts.quad_tol;
    cert.v_route = route;
    cert.status = opts.analytic_sup_l1 ? CertificateStatus::exact_hypothesis
                                       : CertificateStatus::estimate;
    if (opts.lower_partition > 0 && window.length() > 0.0) {
        const auto pts = Partition::uniform(window.lo, window.hi, opts.lower_partition).points();
        cert.v_lower = partition_sum(
            [&](double a, double b) { return l1_distance_in_u(G, a, b, J, norm, q); }, pts);
    }
    return cert;
}

CoefficientPath frozen_system(const SeparableSystem& sys, const Partition& partition) {
    const auto& pts = partition.points();
    CoefficientPath A;
    A.space = sys.space;
    A.domain = Interval(pts.front(), pts.back());
    A.breakpoints = merged(sys.f.breakpoints(), pts);
    A.eval = [sys, partition](double t) -> Matrix {
        const double u = checked_f(sys, t);
        const double a_i = partition.points()[partition.segment_of(t)];
        return sys.f.derivative(t) * sys.G(a_i, u);
    };
    return A;
}

double frozen_defect(const SeparableSystem& sys, const Partition& partition,
                     QuadratureOptions opts) {
    const auto exact = assemble_A(sys);
    const auto frozen = frozen_system(sys, partition);
    const NormKind norm = sys.space.norm;
    const auto& pts = partition.points();
    return integrate([&](double t) { return matrix_norm(exact(t) - frozen(t), norm); },
                     {pts.front(), pts.back()}, frozen.breakpoints, opts)
        .value;
}

SubstitutionCheck substitution_check(const std::function<Matrix(double)>& B, VectorSpace space,
                                     const ScalarPath& f, double s, double t, double tol,
                                     std::span<const double> b_breakpoints) {
    SolverOptions opts;
    opts.rtol = tol;
    opts.atol = tol;
    CoefficientPath A;
    A.space = space;
    A.breakpoints = f.breakpoints();
    A.eval = [&](double tau) -> Matrix { return f.derivative(tau) * B(f(tau)); };
    CoefficientPath Bpath;
    Bpath.space = space;
    Bpath.breakpoints.assign(b_breakpoints.begin(), b_breakpoints.end());
    Bpath.eval = B;

    Operator X = evolve(A, s, t, opts);
    Operator Y = evolve(Bpath, f(s), f(t), opts);
    const double defect = op_norm(X - Y);
    return {std::move(X), std::move(Y), defect, defect <= 100.0 * tol};
}

VerificationReport verify_certificate(const CoefficientPath& A, const BoundCertificate& cert,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      const SolverOptions& opts) {
    for (const auto& [s, t] : pairs) {
        if (!(s <= t) || !cert.window.contains(s) || !cert.window.contains(t)) {
            throw DomainViolation(fmt::format("pair ({}, {}) must satisfy s <= t inside [{}, {}]",
                                              s, t, cert.window.lo, cert.window.hi));
        }
    }
    const auto checkpoints = static_cast<std::size_t>(
        std::clamp(4.0 * cert.window.length(), 64.0, 4096.0));
    EvolutionOperator X(A, cert.window, opts, checkpoints);

    std::vector<VerificationRow> rows(pairs.size());
    std::vector<std::optional<std::string>> errors(pairs.size());
    const double limit = cert.C * (1.0 + 1e-6);
    parallel_for(pairs.size(), [&](std::size_t i) {
        const auto [s, t] = pairs[i];
        try {
            VerificationRow row;
            row.s = s;
            row.t = t;
            row.norm_X = op_norm(X(t, s));
            row.norm_Xinv = op_norm(X(s, t));
            const double worst = std::max(row.norm_X, row.norm_Xinv);
            row.ratio = cert.ratio(worst);
            row.passed = worst <= limit;
            rows[i] = row;
        } catch (const IntegrationFailure& e) {
            errors[i] = e.what();
        }
    });

    VerificationReport report;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (errors[i]) {
            report.error = fmt::format("pair {} ({}, {}): {}", i, pairs[i].first, pairs[i].second,
                                       *errors[i]);
            report.passed = false;
            break;
        }
        const auto& row = rows[i];
        report.rows.push_back(row);
        report.max_observed = std::max({report.max_observed, row.norm_X, row.norm_Xinv});
        report.max_ratio = std::max(report.max_ratio, row.ratio);
        report.passed = report.passed && row.passed;
    }
    return report;
}

std::vector<std::pair<double, double>> sample_pairs(Interval window, std::size_t n,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = window.lo + window.length() * unit_uniform(rng);
        const double b = window.lo + window.length() * unit_uniform(rng);
        out.emplace_back(std::min(a, b), std::max(a, b));
    }
    return out;
}

double naive_exponent(const CoefficientPath& A, double lo, double hi, QuadratureOptions opts) {
    if (hi <= lo) return 0.0;
    return integrate([&](double t) { return matrix_norm(A(t), A.space.norm); }, {lo, hi},
                     A.breakpoints, opts)
        .value;
}

} // namespace evostab
