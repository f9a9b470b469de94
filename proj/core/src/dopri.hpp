#pragma once

// Dormand-Prince 5(4) with FSAL and PI-free step control, on matrix-valued
// states. Internal to the core library.

#include "evostab/errors.hpp"
#include "evostab/evolution.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace evostab::detail {

struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

/// Integration state carried across consecutive calls so that sweeps through
/// many output points reuse the last accepted step size.
struct SweepState {
    double h_hint = 0.0;
    StepStats stats;
};

inline double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1,
                         const SolverOptions& o) {
    double acc = 0.0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
        const double r = err.data()[i] / sc;
        acc += r * r;
    }
    return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

/// Integrates Y' = rhs(t, Y) over one smooth segment [t0, t1] (t1 may be
/// below t0). Right-hand side evaluations are clamped into the open segment so
/// that one-sided limits are used at the ends.
template <class Rhs>
Matrix integrate_segment(const Rhs& rhs, Matrix y, double t0, double t1, const SolverOptions& o,
                         SweepState& st) {
    if (t0 == t1) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double seg_lo = std::min(t0, t1);
    const double seg_hi = std::max(t0, t1);
    const double in_lo = std::nextafter(seg_lo, seg_hi);
    const double in_hi = std::nextafter(seg_hi, seg_lo);
    auto f = [&](double t, const Matrix& state) -> Matrix {
        ++st.stats.evaluations;
        return rhs(std::clamp(t, in_lo, in_hi), state);
    };

    const double span = seg_hi - seg_lo;
    double h = st.h_hint > 0.0 ? std::min(st.h_hint, span) : 0.0;
    Matrix k1 = f(t0, y);
    if (h == 0.0) {
        const double d0 = error_norm(y, y, y, o);
        const double d1 = error_norm(k1, y, y, o);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min({h, span, o.max_step > 0 ? o.max_step : span});
    }

    double t = t0;
    const double h_floor = 1e-14;
    while (dir * (t1 - t) > 0.0) {
        if (o.max_step > 0) h = std::min(h, o.max_step);
        const double remaining = std::abs(t1 - t);
        bool last = false;
        if (h >= remaining * (1.0 - 1e-12)) {
            h = remaining;
            last = true;
        }
        if (!last && h < h_floor * std::max(1.0, std::abs(t))) {
            throw IntegrationFailure(
                fmt::format("step size underflow at t = {} (h = {:.3e})", t, h), t);
        }
        if (st.stats.accepted + st.stats.rejected >= o.max_steps) {
            throw IntegrationFailure(fmt::format("step budget exhausted at t = {}", t), t);
        }
        using D = Dopri5;
        const double hs = dir * h;
        Matrix k2 = f(t + D::c2 * hs, y + hs * (D::a21 * k1));
        Matrix k3 = f(t + D::c3 * hs, y + hs * (D::a31 * k1 + D::a32 * k2));
        Matrix k4 = f(t + D::c4 * hs, y + hs * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
        Matrix k5 = f(t + D::c5 * hs,
                      y + hs * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
        Matrix k6 = f(t + hs, y + hs * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 +
                                        D::a65 * k5));
        Matrix y_new =
            y + hs * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        const double t_new = last ? t1 : t + hs;
        Matrix k7 = f(t_new, y_new);
        Matrix err = hs * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 +
                           D::e7 * k7);
        const double en = error_norm(err, y, y_new, o);
        if (!std::isfinite(en)) {
            ++st.stats.rejected;
            h *= 0.1;
            continue;
        }
        if (en <= 1.0) {
            ++st.stats.accepted;
            t = t_new;
            y = std::move(y_new);
            k1 = std::move(k7);
            const double grow = en == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
            const double h_next = h * std::max(grow, 1.0);
            if (!last) st.h_hint = h_next;
            h = h_next;
        } else {
            ++st.stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
    }
    return y;
}

/// Breakpoints strictly between a and b, ordered in the direction a -> b.
inline std::vector<double> crossing_points(double a, double b, std::span<const double> bps) {
    std::vector<double> out;
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (double x : bps) {
        if (x > lo && x < hi) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (b < a) std::reverse(out.begin(), out.end());
    return out;
}

/// Integrates across breakpoints, restarting at each one.
template <class Rhs>
Matrix integrate(const Rhs& rhs, Matrix y, double t0, double t1, std::span<const double> bps,
                 const SolverOptions& o, SweepState& st) {
    double cur = t0;
    for (double b : crossing_points(t0, t1, bps)) {
        y = integrate_segment(rhs, std::move(y), cur, b, o, st);
        cur = b;
    }
    return integrate_segment(rhs, std::move(y), cur, t1, o, st);
}

} // namespace evostab::detail
