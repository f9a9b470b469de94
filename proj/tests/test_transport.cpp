#include "support.hpp"

#include "evostab/errors.hpp"
#include "evostab/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace evostab;

namespace {

const Rectangle kSquare{{-1.0, 1.0}, {-1.0, 1.0}};

Matrix endpoint_g(const Curve& c, double t, double k = 1.0) {
    return builtins::gauge_rotation_g(c.gamma1(t), c.gamma2(t), k);
}

} // namespace

TEST_SUITE("transport") {

TEST_CASE("zero connection transports trivially") {
    const VectorSpace sp(3, NormKind::one);
    const auto w = ConnectionForm::zero(sp, kSquare);
    const auto P = parallel_transport(w, testing::wiggle_curve(1));
    CHECK(op_norm(P - Operator::identity(sp)) <= 1e-14);
}

TEST_CASE("constant connection along a segment") {
    const VectorSpace sp(2, NormKind::euclidean);
    ConnectionForm w;
    w.omega1 = [](double, double) -> Matrix { return builtins::rotation_generator(); };
    w.omega2 = [](double, double) -> Matrix { return Matrix::Zero(2, 2); };
    w.domain = kSquare;
    w.space = sp;
    const auto P = parallel_transport(w, Curve::segment(-0.5, 0.0, 0.5, 0.0));
    CHECK((P.matrix() - builtins::rotation(-1.0)).norm() <= 1e-9);
}

TEST_CASE("gauge connections match the closed form") {
    for (auto norm : {NormKind::euclidean, NormKind::one}) {
        const auto w = builtins::gauge_rotation(kSquare, norm, 2.0);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto c = testing::wiggle_curve(seed);
            const Matrix oracle = endpoint_g(c, c.b, 2.0) * endpoint_g(c, c.a, 2.0).inverse();
            CHECK((parallel_transport(w, c).matrix() - oracle).norm() <= 1e-8);
        }
    }
    const auto shear = builtins::gauge_shear(kSquare);
    const auto c = testing::wiggle_curve(9);
    const Matrix oracle = builtins::gauge_shear_g(c.gamma1(c.b), c.gamma2(c.b)) *
                          builtins::gauge_shear_g(c.gamma1(c.a), c.gamma2(c.a)).inverse();
    CHECK((parallel_transport(shear, c).matrix() - oracle).norm() <= 1e-8);
}

TEST_CASE("reversal inverts the transport") {
    const auto w = builtins::smooth_connection(3, 0.5, VectorSpace(2, NormKind::inf), kSquare);
    const auto c = testing::wiggle_curve(4);
    const auto P = parallel_transport(w, c);
    const auto R = parallel_transport(w, c.reversed());
    CHECK(op_norm(R * P - Operator::identity(w.space)) <= 1e-8);
}

TEST_CASE("curves leaving the domain are rejected") {
    const auto w = ConnectionForm::zero(VectorSpace(1, NormKind::one), kSquare);
    CHECK_THROWS_AS(parallel_transport(w, Curve::segment(0.0, 0.0, 2.0, 0.0)), DomainViolation);
}

TEST_CASE("beta bound") {
    ConnectionBounds zero;
    const auto b0 = beta_bound(zero, 3.0);
    CHECK(b0.beta == 1.0);
    CHECK(b0.N == 1.0);
    ConnectionBounds b{0.1, 0.2, 0.05, 2.0};
    const auto v = beta_bound(b, 1.5);
    const double N = std::exp(2.0 * 0.2);
    const double C = N * N * std::exp(std::pow(N, 3 + 2 * N) * 2.0 * 0.05 * 1.5);
    CHECK(v.N == doctest::Approx(N));
    CHECK(v.C == doctest::Approx(C).epsilon(1e-12));
    CHECK(v.beta == doctest::Approx(C * std::exp(C * 0.1 * 1.5)).epsilon(1e-12));
    CHECK(beta_bound(b, 2.0).beta > v.beta);
    const auto huge = beta_bound({10.0, 5.0, 5.0, 2.0}, 10.0);
    CHECK(huge.saturated);
    CHECK(std::isinf(huge.beta));
}

TEST_CASE("sampled bounds dominate a finer grid") {
    const auto w = builtins::smooth_connection(5, 0.3, VectorSpace(2, NormKind::euclidean), kSquare);
    const auto b = sample_connection_bounds(w);
    CHECK(b.provenance == BoundsProvenance::grid_sampled);
    CHECK(b.lambda_J == doctest::Approx(2.0));
    double s1 = 0.0, s2 = 0.0, s12 = 0.0;
    for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 400; ++j) {
            const double x = -1.0 + i * 0.005;
            const double u = -1.0 + j * 0.005;
            s1 = std::max(s1, matrix_norm(w.omega1(x, u), NormKind::euclidean));
            s2 = std::max(s2, matrix_norm(w.omega2(x, u), NormKind::euclidean));
            s12 = std::max(s12, matrix_norm(w.d1_omega2_at(x, u), NormKind::euclidean));
        }
    }
    CHECK(b.B1 >= s1);
    CHECK(b.B2 >= s2);
    CHECK(b.B12 >= s12);
}

TEST_CASE("transport stays under beta") {
    const VectorSpace sp(2, NormKind::euclidean);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto w = builtins::smooth_connection(seed, 0.2, sp, kSquare);
        const auto bounds = sample_connection_bounds(w);
        for (std::uint64_t k = 1; k <= 5; ++k) {
            const auto c = testing::wiggle_curve(100 * seed + k);
            const double L = arc_length(c.gamma1, c.a, c.b);
            CHECK(op_norm(parallel_transport(w, c)) <= beta_bound(bounds, L).beta * (1 + 1e-6));
        }
    }
}

TEST_CASE("sine curve parametrisation") {
    const auto c = sine_curve(-1.0, -0.01);
    CHECK(c.gamma1(c.a) == doctest::Approx(-1.0));
    CHECK(c.gamma1(c.b) == doctest::Approx(-0.01));
    for (double t : {-0.9, -0.3, -0.05, -0.011}) {
        const double sigma = -1.0 / t;
        CHECK(c.gamma2(sigma) == doctest::Approx(std::sin(1.0 / t)));
    }
    CHECK_THROWS_AS(sine_curve(-0.5, 0.0), DomainViolation);
}

TEST_CASE("sine curve under a gauge connection") {
    const Rectangle dom{{-1.0, 0.0}, {-1.0, 1.0}};
    const auto w = builtins::gauge_rotation(dom);
    const auto c = sine_curve(-1.0, -0.001);
    const Matrix oracle = builtins::gauge_rotation_g(-0.001, std::sin(-1000.0)) *
                          builtins::gauge_rotation_g(-1.0, std::sin(-1.0)).inverse();
    CHECK((parallel_transport(w, c).matrix() - oracle).norm() <= 1e-8);
}

TEST_CASE("sine curve scenario") {
    const Rectangle dom{{-1.0, 0.0}, {-1.0, 1.0}};
    const VectorSpace sp(2, NormKind::euclidean);
    const auto w = builtins::smooth_connection(11, 0.02, sp, dom);
    ColumnVector v(2);
    v << 1.0, 0.0;
    const auto r = sine_curve_scenario(w, -1.0, {-0.1, -0.01, -0.001}, Vector(v, sp));
    CHECK(r.passed);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
        CHECK(row.norm_P <= r.C * (1 + 1e-6));
        CHECK(row.norm_P >= 1.0 / r.C * (1 - 1e-6));
        CHECK(row.beta_b <= row.beta);
        CHECK(row.roundtrip_defect <= 1e-8);
    }
    SineCurveOptions o;
    const auto too_close = sine_curve_scenario(w, -1.0, {-1e-5}, Vector(v, sp), std::nullopt, o);
    CHECK(!too_close.passed);
    CHECK(too_close.rows.front().error.has_value());
}

}
