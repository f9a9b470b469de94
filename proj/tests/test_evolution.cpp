#include "support.hpp"

#include "evostab/errors.hpp"
#include "evostab/evolution.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace evostab;

namespace {

const VectorSpace kLine(1, NormKind::euclidean);

CoefficientPath scalar_coefficient(std::function<double(double)> a) {
    CoefficientPath A;
    A.eval = [a](double t) { return Matrix::Constant(1, 1, a(t)); };
    A.space = kLine;
    return A;
}

} // namespace

TEST_SUITE("evolution") {

TEST_CASE("zero and constant coefficients") {
    const VectorSpace sp(3, NormKind::one);
    CHECK(op_norm(evolve(CoefficientPath::zero(sp), 0.0, 5.0) - Operator::identity(sp)) <= 1e-14);
    const auto A = CoefficientPath::constant(Matrix::Identity(1, 1), kLine);
    CHECK(evolve(A, 0.0, 1.0)(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
    CHECK(evolve(A, 1.0, 0.0)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("rotation generator gives rotations") {
    const VectorSpace sp(2, NormKind::euclidean);
    const auto A = CoefficientPath::constant(builtins::rotation_generator(), sp);
    const Operator X = evolve(A, 0.0, std::numbers::pi / 2);
    CHECK((X.matrix() - builtins::rotation(std::numbers::pi / 2)).norm() <= 1e-9);
    CHECK(op_norm(X) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cosine coefficient matches the closed form") {
    const auto A = scalar_coefficient([](double t) { return std::cos(t); });
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
        const double s = testing::uniform(rng, 0.0, 20.0);
        const double t = testing::uniform(rng, 0.0, 20.0);
        CHECK(std::abs(evolve(A, s, t)(0, 0) - std::exp(std::sin(t) - std::sin(s))) <= 1e-8);
    }
}

TEST_CASE("adaptive solver agrees with fixed-step rk4") {
    for (const auto& sys : testing::corpus()) {
        const Matrix ref = testing::rk4(sys.A.eval, 0.3, 4.0, 1e-3);
        const Matrix got = evolve(sys.A, 0.3, 4.0).matrix();
        CHECK((ref - got).lpNorm<Eigen::Infinity>() <= 1e-7 * std::max(1.0, ref.norm()));
    }
}

TEST_CASE("coefficient jumps are honoured") {
    CoefficientPath A = scalar_coefficient([](double t) { return t < 1.0 ? 1.0 : -2.0; });
    A.breakpoints = {1.0};
    CHECK(evolve(A, 0.0, 3.0)(0, 0) == doctest::Approx(std::exp(1.0 - 4.0)).epsilon(1e-9));
    CHECK(evolve(A, 3.0, 0.0)(0, 0) == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
}

TEST_CASE("evolution laws on the corpus") {
    SolverOptions tight;
    tight.rtol = tight.atol = 1e-12;
    std::mt19937_64 rng(17);
    for (const auto& sys : testing::corpus()) {
        for (int k = 0; k < 5; ++k) {
            const double s = testing::uniform(rng, -3.0, 3.0);
            const double t = testing::uniform(rng, -3.0, 3.0);
            const double u = testing::uniform(rng, -3.0, 3.0);
            const Operator ts = evolve(sys.A, s, t, tight);
            const Operator st = evolve(sys.A, t, s, tight);
            const Operator id = Operator::identity(sys.A.space);
            CHECK(op_norm(ts * st - id) <= 1e-8);
            CHECK(op_norm(evolve(sys.A, t, u, tight) * ts - evolve(sys.A, s, u, tight)) <= 1e-8);
            CHECK(op_norm(evolve(sys.A, s, s) - id) == 0.0);
            CHECK(op_norm(evolve(sys.A, s, t) * evolve(sys.A, t, s) - id) <= 1e-7);
        }
    }
}

TEST_CASE("vector propagation agrees with the operator") {
    const auto sys = testing::random_system(4, 3, NormKind::inf);
    ColumnVector v(3);
    v << 1.0, -2.0, 0.5;
    const Vector x(v, sys.A.space);
    const Vector direct = propagate_vector(sys.A, 0.0, 2.5, x);
    const Vector via = evolve(sys.A, 0.0, 2.5) * x;
    CHECK((direct - via).norm() <= 1e-8);
}

TEST_CASE("variation of parameters") {
    const auto A = CoefficientPath::constant(Matrix::Constant(1, 1, -1.0), kLine);
    auto g = [](double) { return ColumnVector::Constant(1, 1.0); };
    const Vector x0(ColumnVector::Constant(1, 0.0), kLine);
    const Vector x = variation_of_parameters(A, g, 0.0, 2.0, x0);
    CHECK(x[0] == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-8));
}

TEST_CASE("evolution operator caches agree with direct integration") {
    const auto sys = testing::random_system(8, 2, NormKind::euclidean);
    const EvolutionOperator X(sys.A, Interval(0.0, 10.0), {}, 64);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const double s = testing::uniform(rng, 0.0, 10.0);
        const double t = testing::uniform(rng, 0.0, 10.0);
        const Operator direct = evolve(sys.A, s, t);
        CHECK(op_norm(X(t, s) - direct) <= 1e-8 * std::max(1.0, op_norm(direct)));
    }
    CHECK_THROWS_AS(X(11.0, 0.0), DomainViolation);
    const double node = 10.0 * 17.0 / 64.0;
    CHECK_NOTHROW(X(std::nextafter(node, 0.0), 1.0));
    CHECK_NOTHROW(X(9.0, std::nextafter(node, 10.0)));
}

TEST_CASE("segments shorter than the step floor") {
    const auto A = scalar_coefficient([](double t) { return std::cos(t); });
    const double t = 12.25;
    const Operator X = evolve(A, t, std::nextafter(t, 13.0));
    CHECK(X(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("comparison bounds") {
    const auto A1 = CoefficientPath::constant(Matrix::Constant(1, 1, -1.0), kLine);
    const auto A2 = scalar_coefficient([](double t) { return -1.0 + 0.1 * std::sin(t); });
    ComparisonInput c{A1, A2, 1.0, 1.0, 1};
    const auto b = comparison_bounds(c, 0.0, 5.0);
    const double x2 = evolve(A2, 0.0, 5.0)(0, 0);
    const double x1 = evolve(A1, 0.0, 5.0)(0, 0);
    CHECK(std::abs(x2) <= b.growth_bound * (1 + 1e-9));
    CHECK(std::abs(x2 - x1) <= b.difference_bound * (1 + 1e-9));
}

TEST_CASE("parameter evolution") {
    const ParamCoefficient A = [](double x, double) { return Matrix::Constant(1, 1, x); };
    const std::vector<double> xs = {0.0, 0.5, 1.0};
    const auto r = param_evolution(A, kLine, xs, 0.0, {-1.0, 0.0, 2.0});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(r.values[i][0](0, 0) == doctest::Approx(std::exp(-xs[i])).epsilon(1e-9));
        CHECK(r.values[i][1](0, 0) == doctest::Approx(1.0));
        CHECK(r.values[i][2](0, 0) == doctest::Approx(std::exp(2 * xs[i])).epsilon(1e-9));
    }
    CHECK(r.max_column_discrepancy > 0.0);
}

}
