#include "evostab/evolution.hpp"

#include "dopri.hpp"
#include "evostab/errors.hpp"
#include "evostab/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evostab {

namespace {

void require_in_domain(const CoefficientPath& A, double t) {
    if (!A.domain.contains(t)) {
        throw DomainViolation(
            fmt::format("time {} outside coefficient domain [{}, {}]", t, A.domain.lo, A.domain.hi));
    }
}

void accumulate(StepStats* into, const StepStats& s) {
    if (!into) return;
    into->accepted += s.accepted;
    into->rejected += s.rejected;
    into->evaluations += s.evaluations;
}

Matrix evolve_matrix(const CoefficientPath& A, double s, double t, const SolverOptions& opts,
                     StepStats* stats) {
    const int r = A.space.dim;
    if (s == t) return Matrix::Identity(r, r);
    detail::SweepState st;
    auto rhs = [&](double tau, const Matrix& y) -> Matrix { return A(tau) * y; };
    Matrix out = detail::integrate(rhs, Matrix::Identity(r, r), s, t, A.breakpoints, opts, st);
    accumulate(stats, st.stats);
    return out;
}

} // namespace

CoefficientPath CoefficientPath::constant(const Matrix& a, VectorSpace space, Interval domain) {
    return {[a](double) { return a; }, {}, domain, space};
}

CoefficientPath CoefficientPath::zero(VectorSpace space, Interval domain) {
    return constant(Matrix::Zero(space.dim, space.dim), space, domain);
}

Operator evolve(const CoefficientPath& A, double s, double t, const SolverOptions& opts,
                StepStats* stats) {
    require_in_domain(A, s);
    require_in_domain(A, t);
    return {evolve_matrix(A, s, t, opts, stats), A.space};
}

Vector propagate_vector(const CoefficientPath& A, double s, double t, const Vector& v,
                        const SolverOptions& opts, StepStats* stats) {
    require_in_domain(A, s);
    require_in_domain(A, t);
    if (s == t) return v;
    detail::SweepState st;
    auto rhs = [&](double tau, const Matrix& y) -> Matrix { return A(tau) * y; };
    Matrix y = detail::integrate(rhs, Matrix(v.entries()), s, t, A.breakpoints, opts, st);
    accumulate(stats, st.stats);
    return {ColumnVector(y.col(0)), v.space()};
}

Vector variation_of_parameters(const CoefficientPath& A,
                               const std::function<ColumnVector(double)>& g, double s, double t,
                               const Vector& x_s, const SolverOptions& opts,
                               std::span<const double> g_breakpoints) {
    require_in_domain(A, s);
    require_in_domain(A, t);
    if (s == t) return x_s;
    std::vector<double> bps = A.breakpoints;
    bps.insert(bps.end(), g_breakpoints.begin(), g_breakpoints.end());
    detail::SweepState st;
    auto rhs = [&](double tau, const Matrix& y) -> Matrix { return A(tau) * y + g(tau); };
    Matrix y = detail::integrate(rhs, Matrix(x_s.entries()), s, t, bps, opts, st);
    return {ColumnVector(y.col(0)), x_s.space()};
}

EvolutionOperator::EvolutionOperator(CoefficientPath A, Interval window, SolverOptions opts,
                                     std::size_t checkpoints)
    : A_(std::move(A)), window_(window), opts_(opts) {
    if (!window_.is_finite()) throw DomainViolation("evolution operator window must be finite");
    if (!A_.domain.contains(window_)) {
        throw DomainViolation("evolution operator window exceeds the coefficient domain");
    }
    nodes_ = Partition::uniform(window_.lo, window_.hi, std::max<std::size_t>(checkpoints, 1)).points();
    for (double b : A_.breakpoints) {
        if (b > window_.lo && b < window_.hi) nodes_.push_back(b);
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    forward_.resize(nodes_.size() - 1);
    backward_.resize(nodes_.size() - 1);
}

StepStats EvolutionOperator::step_stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

Matrix EvolutionOperator::direct(double from, double to) const {
    StepStats local;
    Matrix m = evolve_matrix(A_, from, to, opts_, &local);
    std::lock_guard lock(mutex_);
    accumulate(&stats_, local);
    return m;
}

Matrix EvolutionOperator::transfer(std::size_t i, bool forward) const {
    auto& slot = forward ? forward_[i] : backward_[i];
    {
        std::lock_guard lock(mutex_);
        if (slot) return *slot;
    }
    Matrix m = forward ? direct(nodes_[i], nodes_[i + 1]) : direct(nodes_[i + 1], nodes_[i]);
    std::lock_guard lock(mutex_);
    if (!slot) slot = m;
    return *slot;
}

Operator EvolutionOperator::operator()(double t, double s) const {
    const int r = A_.space.dim;
    if (t == s) return Operator::identity(A_.space);
    if (!window_.contains(t) || !window_.contains(s)) {
        throw DomainViolation(fmt::format("query ({}, {}) outside window [{}, {}]", t, s,
                                          window_.lo, window_.hi));
    }
    const double lo = std::min(s, t);
    const double hi = std::max(s, t);
    // First node strictly above lo and last node strictly below hi.
    auto k = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), lo) - nodes_.begin());
    auto l_it = std::lower_bound(nodes_.begin(), nodes_.end(), hi);
    if (k >= nodes_.size() || l_it == nodes_.begin() || nodes_[k] >= hi) {
        return {direct(s, t), A_.space};
    }
    const auto l = static_cast<std::size_t>(l_it - nodes_.begin()) - 1;
    Matrix out = Matrix::Identity(r, r);
    if (t > s) {
        // X(t,s) = X(t, n_l) T_{l-1} ... T_k X(n_k, s)
        out = direct(s, nodes_[k]);
        for (std::size_t i = k; i < l; ++i) out = transfer(i, true) * out;
        out = direct(nodes_[l], t) * out;
    } else {
        // X(t,s) with t < s: X(t, n_k) B_k ... B_{l-1} X(n_l, s)
        out = direct(s, nodes_[l]);
        for (std::size_t i = l; i-- > k;) out = transfer(i, false) * out;
        out = direct(nodes_[k], t) * out;
    }
    return {std::move(out), A_.space};
}

ComparisonBounds comparison_bounds(const ComparisonInput& c, double s, double t,
                                   QuadratureOptions qopts) {
    if (t < s) throw DomainViolation("comparison_bounds requires s <= t");
    std::vector<double> bps = c.A1.breakpoints;
    bps.insert(bps.end(), c.A2.breakpoints.begin(), c.A2.breakpoints.end());
    const NormKind norm = c.A2.space.norm;
    ComparisonBounds out;
    out.integral = s == t ? 0.0
                          : integrate([&](double tau) { return matrix_norm(c.A2(tau) - c.A1(tau), norm); },
                                      {s, t}, bps, qopts)
                                .value;
    const double prefactor = c.N * std::exp(-c.nu1 * (t - s));
    out.growth_bound = prefactor * std::exp(c.N * out.integral);
    out.difference_bound = prefactor * std::expm1(c.N * out.integral);
    return out;
}

std::vector<Operator> param_column(const ParamCoefficient& A, VectorSpace space, double x,
                                   double v0, const std::vector<double>& v_targets,
                                   const SolverOptions& opts) {
    const int r = space.dim;
    std::vector<Operator> out(v_targets.size(), Operator::identity(space));
    std::vector<std::size_t> up, down;
    for (std::size_t k = 0; k < v_targets.size(); ++k) {
        if (v_targets[k] > v0) up.push_back(k);
        else if (v_targets[k] < v0) down.push_back(k);
    }
    std::sort(up.begin(), up.end(), [&](auto a, auto b) { return v_targets[a] < v_targets[b]; });
    std::sort(down.begin(), down.end(), [&](auto a, auto b) { return v_targets[a] > v_targets[b]; });
    auto rhs = [&](double v, const Matrix& y) -> Matrix { return A(x, v) * y; };
    for (const auto* order : {&up, &down}) {
        detail::SweepState st;
        Matrix y = Matrix::Identity(r, r);
        double cur = v0;
        for (std::size_t k : *order) {
            y = detail::integrate_segment(rhs, std::move(y), cur, v_targets[k], opts, st);
            cur = v_targets[k];
            out[k] = Operator(y, space);
        }
    }
    return out;
}

ParamEvolution param_evolution(const ParamCoefficient& A, VectorSpace space,
                               const std::vector<double>& x_grid, double v0,
                               const std::vector<double>& v_targets, const SolverOptions& opts) {
    ParamEvolution out;
    out.x_grid = x_grid;
    out.v_targets = v_targets;
    out.values.resize(x_grid.size());
    parallel_for(x_grid.size(), [&](std::size_t i) {
        out.values[i] = param_column(A, space, x_grid[i], v0, v_targets, opts);
    });
    for (std::size_t i = 0; i + 1 < out.values.size(); ++i) {
        for (std::size_t k = 0; k < v_targets.size(); ++k) {
            out.max_column_discrepancy =
                std::max(out.max_column_discrepancy, op_norm(out.values[i + 1][k] - out.values[i][k]));
        }
    }
    return out;
}

} // namespace evostab
