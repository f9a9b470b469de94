#pragma once

#include "evostab/calculus.hpp"
#include "evostab/evolution.hpp"
#include "evostab/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evostab {

/// A(t) = f'(t) G~(t, f(t)) with f(I) inside the finite interval J.
struct SeparableSystem {
    OperatorField G;
    ScalarPath f;
    Interval I;
    Interval J;
    VectorSpace space;
};

/// Coefficient path t -> f'(t) G~(t, f(t)) on I. Evaluating at a t with
/// f(t) outside J throws DomainViolation.
CoefficientPath assemble_A(const SeparableSystem& sys);

enum class CertificateStatus { estimate, exact_hypothesis };

/// N = exp(sup_t ||G(t)||_{L^1(J)}), V = variation of t -> G(t) in L^1(J),
/// C = N^2 exp(N^{3+2N} V).
///
/// C overflows a double long before it stops being meaningful, so the
/// logarithms are stored alongside: log_C = 2 log N + exp(log_exponent) where
/// log_exponent = (3 + 2N) log N + log V.
struct BoundCertificate {
    double N = 1.0;
    double V = 0.0;
    double C = 1.0;
    double log_C = 0.0;
    double log_exponent = -std::numeric_limits<double>::infinity();
    Interval window;
    /// Number of grid points in the final sup sampling round.
    std::size_t sup_grid = 0;
    double sup_argmax = 0.0;
    bool sup_converged = true;
    double quad_tol = 0.0;
    std::string v_route;
    /// Partition-sum lower estimate of V (cross-check, <= V).
    double v_lower = 0.0;
    CertificateStatus status = CertificateStatus::estimate;

    /// Largest ratio norm / C; zero when C is infinite.
    double ratio(double norm) const;
};

/// Assembles N, V into a certificate, filling C, log_C and log_exponent.
BoundCertificate make_certificate(double N, double V);

struct CertifyOptions {
    double quad_tol = 1e-9;
    double sup_rel_change = 1e-3;
    std::size_t initial_grid = 64;
    std::size_t max_grid = std::size_t{1} << 16;
    /// User-supplied bound for sup_t ||G(t)||_{L^1(J)}; marks the certificate
    /// as an exact hypothesis instead of a sampled estimate.
    std::optional<double> analytic_sup_l1;
    /// Segments of the partition-sum cross-check (0 disables it).
    std::size_t lower_partition = 1024;
};

/// Certificate for every system with the given field G and interval J,
/// regardless of f, valid on `window`.
BoundCertificate certify(const OperatorField& G, Interval J, Interval window, NormKind norm,
                         const CertifyOptions& opts = {});

inline BoundCertificate certify(const SeparableSystem& sys, Interval window,
                                const CertifyOptions& opts = {}) {
    return certify(sys.G, sys.J, window, sys.space.norm, opts);
}

/// Frozen-coefficient approximant: on [a_i, a_{i+1}) the field is frozen at
/// a_i; the last partition point uses the last segment.
CoefficientPath frozen_system(const SeparableSystem& sys, const Partition& partition);

/// Integral of ||A - A_a|| over the span of the partition.
double frozen_defect(const SeparableSystem& sys, const Partition& partition,
                     QuadratureOptions opts = {});

struct SubstitutionCheck {
    Operator X;
    Operator Y;
    double defect = 0.0;
    bool passed = false;
};

/// Compares X(t,s) for A = f' (B o f) against Y(f(t), f(s)) for B.
SubstitutionCheck substitution_check(const std::function<Matrix(double)>& B, VectorSpace space,
                                     const ScalarPath& f, double s, double t, double tol = 1e-10,
                                     std::span<const double> b_breakpoints = {});

struct VerificationRow {
    double s = 0.0;
    double t = 0.0;
    double norm_X = 0.0;
    double norm_Xinv = 0.0;
    double ratio = 0.0;
    bool passed = false;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;
    double max_observed = 0.0;
    double max_ratio = 0.0;
    bool passed = true;
    /// Set when an integration failure aborted the run; rows hold the pairs
    /// completed before the failing one.
    std::optional<std::string> error;
};

/// Checks ||X(t,s)|| and ||X(t,s)^{-1}|| <= C (1 + 1e-6) at each pair. The
/// inverse is obtained by integrating backwards, not by matrix inversion.
VerificationReport verify_certificate(const CoefficientPath& A, const BoundCertificate& cert,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      const SolverOptions& opts = {});

inline VerificationReport verify_certificate(const SeparableSystem& sys,
                                             const BoundCertificate& cert,
                                             const std::vector<std::pair<double, double>>& pairs,
                                             const SolverOptions& opts = {}) {
    return verify_certificate(assemble_A(sys), cert, pairs, opts);
}

/// n pairs s <= t drawn uniformly from the window.
std::vector<std::pair<double, double>> sample_pairs(Interval window, std::size_t n,
                                                    std::uint64_t seed);

/// int_lo^hi ||A|| dlambda, the exponent of the naive Gronwall bound.
double naive_exponent(const CoefficientPath& A, double lo, double hi, QuadratureOptions opts = {});

} // namespace evostab
