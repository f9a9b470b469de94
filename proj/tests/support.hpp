#pragma once

#include "evostab/builtins.hpp"
#include "evostab/calculus.hpp"
#include "evostab/evolution.hpp"
#include "evostab/stability.hpp"
#include "evostab/transport.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing {

using evostab::ColumnVector;
using evostab::Matrix;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, double scale = 1.0) {
    Matrix m(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) m(i, j) = scale * uniform(rng, -1.0, 1.0);
    }
    return m;
}

/// Classical fixed-step RK4 for X' = A X, X(s) = id.
inline Matrix rk4(const std::function<Matrix(double)>& A, double s, double t, double h) {
    const auto r = A(s).rows();
    Matrix y = Matrix::Identity(r, r);
    const auto n = static_cast<long>(std::ceil(std::abs(t - s) / h));
    if (n == 0) return y;
    const double dt = (t - s) / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
        const double tau = s + dt * static_cast<double>(i);
        const Matrix k1 = A(tau) * y;
        const Matrix k2 = A(tau + dt / 2) * (y + dt / 2 * k1);
        const Matrix k3 = A(tau + dt / 2) * (y + dt / 2 * k2);
        const Matrix k4 = A(tau + dt) * (y + dt * k3);
        y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

/// Composite midpoint rule with a fixed number of panels.
inline double midpoint(const std::function<double(double)>& g, double a, double b,
                       std::size_t panels) {
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t i = 0; i < panels; ++i) sum += g(a + (static_cast<double>(i) + 0.5) * h);
    return sum * h;
}

/// Smooth random coefficient A(t) = M0 + M1 sin(w1 t) + M2 cos(w2 t) / (1 + t^2).
struct RandomSystem {
    evostab::CoefficientPath A;
    Matrix m0, m1, m2;
    double w1 = 1.0, w2 = 1.0;
};

inline RandomSystem random_system(std::uint64_t seed, int r, evostab::NormKind norm,
                                  double scale = 0.5) {
    std::mt19937_64 rng(seed);
    RandomSystem s;
    s.m0 = random_matrix(rng, r, scale);
    s.m1 = random_matrix(rng, r, scale);
    s.m2 = random_matrix(rng, r, scale);
    s.w1 = uniform(rng, 0.5, 3.0);
    s.w2 = uniform(rng, 0.5, 3.0);
    s.A.space = evostab::VectorSpace(r, norm);
    s.A.eval = [m0 = s.m0, m1 = s.m1, m2 = s.m2, w1 = s.w1, w2 = s.w2](double t) -> Matrix {
        return m0 + m1 * std::sin(w1 * t) + m2 * (std::cos(w2 * t) / (1.0 + t * t));
    };
    return s;
}

/// The 20-system corpus: r cycles through 1..4, norms through the three kinds.
inline std::vector<RandomSystem> corpus() {
    const evostab::NormKind norms[] = {evostab::NormKind::euclidean, evostab::NormKind::one,
                                       evostab::NormKind::inf};
    std::vector<RandomSystem> out;
    for (int i = 0; i < 20; ++i) out.push_back(random_system(1000 + i, 1 + i % 4, norms[i % 3]));
    return out;
}

/// Example 3.9's field scaled by eps, so that the certificate stays finite.
inline evostab::OperatorField scaled_example39(double eps) {
    const auto base = evostab::builtins::example39_field();
    evostab::OperatorField G(
        2, [base, eps](double t, double u) -> Matrix { return eps * base(t, u); },
        evostab::OperatorField::Fn(
            [base, eps](double t, double u) -> Matrix { return eps * base.partial_t(t, u); }),
        {}, base.t_domain());
    G.set_u_independent();
    return G;
}

/// Curves inside [-1, 1]^2 for transport tests, oscillation count scaled by k.
inline evostab::Curve wiggle_curve(std::uint64_t seed, int k = 1) {
    std::mt19937_64 rng(seed);
    const double x0 = uniform(rng, -0.9, 0.0);
    const double x1 = uniform(rng, 0.0, 0.9);
    const double amp = uniform(rng, 0.2, 0.8);
    const double freq = std::round(uniform(rng, 1.0, 6.0)) * k;
    const double phase = uniform(rng, 0.0, 6.28);
    const double bend = uniform(rng, 0.0, 0.1);
    evostab::ScalarPath g1([=](double t) { return x0 + (x1 - x0) * t + bend * std::sin(3 * t); },
                           evostab::ScalarPath::Fn([=](double t) {
                               return (x1 - x0) + 3 * bend * std::cos(3 * t);
                           }),
                           {});
    evostab::ScalarPath g2([=](double t) { return amp * std::sin(freq * t + phase); },
                           evostab::ScalarPath::Fn([=](double t) {
                               return amp * freq * std::cos(freq * t + phase);
                           }),
                           {});
    return {g1, g2, 0.0, 1.0};
}

} // namespace testing
