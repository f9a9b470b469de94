#include "support.hpp"

#include "evostab/calculus.hpp"
#include "evostab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace evostab;
using std::numbers::pi;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

OperatorPath scalar_path(std::function<double(double)> g, std::function<double(double)> dg) {
    return {[g](double t) { return scalar(g(t)); }, [dg](double t) { return scalar(dg(t)); }, {}};
}

} // namespace

TEST_SUITE("calculus") {

TEST_CASE("intervals") {
    CHECK_THROWS_AS(Interval(1.0, 0.0), DomainViolation);
    CHECK(Interval(0.0, 2.0).length() == 2.0);
    CHECK(!Interval::real_line().is_finite());
    CHECK(Interval(0.0, 1.0).contains(1.0));
}

TEST_CASE("partitions") {
    const auto p = Partition::uniform(0.0, 1.0, 4);
    CHECK(p.segments() == 4);
    CHECK(p.mesh() == doctest::Approx(0.25));
    CHECK(p.segment_of(0.0) == 0);
    CHECK(p.segment_of(0.3) == 1);
    CHECK(p.segment_of(0.5) == 2);
    CHECK(p.segment_of(1.0) == 3);
    CHECK(Partition({2.0}).mesh() == 0.0);
    CHECK_THROWS_AS(Partition({0.0, 0.0}), DomainViolation);
    CHECK(Partition::with_mesh(0.0, 1.0, 0.3).mesh() <= 0.3);
}

TEST_CASE("quadrature examples") {
    CHECK(integrate([](double t) { return std::sin(t); }, {0.0, pi}).value ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 0.0; }, {-3.0, 5.0}).value == 0.0);
    CHECK(integrate([](double t) { return std::abs(std::cos(t)); }, {0.0, 4 * pi}).value ==
          doctest::Approx(8.0).epsilon(1e-11));
    CHECK(integrate_between([](double) { return 1.0; }, 2.0, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("quadrature respects breakpoints of a jump") {
    auto step = [](double t) { return t < 0.3 ? 1.0 : 5.0; };
    const double bp[] = {0.3};
    const auto r = integrate(step, {0.0, 1.0}, bp);
    CHECK(r.value == doctest::Approx(0.3 + 3.5).epsilon(1e-13));
}

TEST_CASE("quadrature failure carries the estimate") {
    QuadratureOptions o;
    o.max_subdivisions = 5;
    o.abs_tol = 1e-14;
    try {
        integrate([](double t) { return std::sin(1.0 / t); }, {1e-4, 1.0}, {}, o);
        FAIL("expected QuadratureFailure");
    } catch (const QuadratureFailure& e) {
        CHECK(std::isfinite(e.estimate()));
        CHECK(e.error_bound() > 1e-14);
    }
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, Interval::real_line()),
                    QuadratureFailure);
}

TEST_CASE("vector quadrature") {
    auto g = [](double t) {
        ColumnVector v(2);
        v << std::cos(t), t;
        return v;
    };
    const auto r = integrate_vector(g, {0.0, 1.0});
    CHECK(r.value(0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    CHECK(r.value(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scalar path derivatives") {
    ScalarPath abs_path([](double t) { return std::abs(t); }, std::nullopt, {0.0});
    CHECK(abs_path.derivative(0.0) == 0.0);
    CHECK(abs_path.derivative(0.5) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(abs_path.derivative(-1e-7) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(ScalarPath::affine(3.0, 1.0).derivative(2.0) == 3.0);

    std::mt19937_64 rng(3);
    auto s = builtins::sine(2.0);
    ScalarPath numeric([](double t) { return std::sin(2.0 * t); }, std::nullopt, {});
    for (int i = 0; i < 20; ++i) {
        const double t = testing::uniform(rng, -5.0, 5.0);
        CHECK(std::abs(s.derivative(t) - numeric.derivative(t)) <= 1e-6);
    }
}

TEST_CASE("l1 norm in u") {
    const OperatorField id(1, [](double, double) { return scalar(1.0); });
    CHECK(l1_norm_in_u(id, 0.0, {0.0, 2.0}, NormKind::euclidean) == doctest::Approx(2.0));
    const OperatorField lin(1, [](double, double u) { return scalar(u); });
    CHECK(l1_norm_in_u(lin, 0.0, {0.0, 1.0}, NormKind::one) == doctest::Approx(0.5));

    const auto G = builtins::example39_field();
    for (auto k : {NormKind::euclidean, NormKind::one, NormKind::inf}) {
        const double oracle = testing::midpoint(
            [&](double u) { return matrix_norm(G(0.0, u), k); }, -1.0, 1.0, 1000000);
        CHECK(l1_norm_in_u(G, 0.0, {-1.0, 1.0}, k) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("total variation examples") {
    const auto constant = scalar_path([](double) { return 4.0; }, [](double) { return 0.0; });
    CHECK(total_variation_path(constant, {0.0, 1.0}, NormKind::one).value == 0.0);
    const auto linear = scalar_path([](double t) { return t; }, [](double) { return 1.0; });
    CHECK(total_variation_path(linear, {0.0, 3.0}, NormKind::one).value == doctest::Approx(3.0));
    const auto wave = scalar_path([](double t) { return std::sin(t); },
                                  [](double t) { return std::cos(t); });
    CHECK(total_variation_path(wave, {0.0, 2 * pi}, NormKind::one).value ==
          doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("refinement mode without derivative") {
    OperatorPath wave{[](double t) { return scalar(std::sin(t)); }, std::nullopt, {}};
    const auto r = total_variation_path(wave, {0.0, 2 * pi}, NormKind::one);
    CHECK(r.mode == VariationMode::refinement);
    CHECK(r.converged);
    CHECK(r.value <= 4.0 + 1e-12);
    CHECK(r.value == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(r.value >= r.previous - 1e-12);
}

TEST_CASE("refinement flags non-convergence") {
    auto dist = [](double a, double b) { return std::abs(std::sin(1.0 / a) - std::sin(1.0 / b)); };
    const auto r = total_variation_refinement(dist, {1e-3, 1.0}, {}, 1e-4, 6, 2);
    CHECK(!r.converged);
    CHECK(r.previous <= r.value);
}

TEST_CASE("partition sums are monotone under refinement") {
    const auto G = builtins::example39_field();
    auto dist = [&](double a, double b) {
        return l1_distance_in_u(G, a, b, {-1.0, 1.0}, NormKind::euclidean);
    };
    double last = 0.0;
    for (std::size_t n = 4; n <= 1024; n *= 4) {
        const auto pts = Partition::uniform(0.0, 20.0, n).points();
        const double s = partition_sum(dist, pts);
        CHECK(s >= last - 1e-12);
        last = s;
    }
}

TEST_CASE("derivative mode dominates partition sums") {
    const auto G = builtins::example39_field();
    OperatorPath path{[&](double t) { return G(t, 0.0); },
                      [&](double t) { return G.partial_t(t, 0.0); },
                      {}};
    for (auto k : {NormKind::euclidean, NormKind::one, NormKind::inf}) {
        const double tv = total_variation_path(path, {0.0, 50.0}, k).value;
        const auto pts = Partition::uniform(0.0, 50.0, 1024).points();
        const double ps = partition_sum(
            [&](double a, double b) { return matrix_norm(G(b, 0.0) - G(a, 0.0), k); }, pts);
        CHECK(tv >= ps - 1e-6);
    }
}

TEST_CASE("tv_l1 upper bound") {
    const OperatorField fixed(1, [](double, double u) { return scalar(u * u); });
    CHECK(tv_l1_upper_bound(fixed, {0.0, 1.0}, {0.0, 2.0}, NormKind::one) ==
          doctest::Approx(0.0).epsilon(1e-12));
    const OperatorField lin(1, [](double t, double) { return scalar(t); });
    CHECK(tv_l1_upper_bound(lin, {0.0, 1.0}, {0.0, 2.0}, NormKind::one) ==
          doctest::Approx(2.0).epsilon(1e-8));

    const OperatorField mixed(2, [](double t, double u) {
        Matrix m(2, 2);
        m << std::atan(t * u), std::exp(-t) * u, std::cos(t + u), 1.0 / (1.0 + t * t);
        return m;
    });
    const Interval I(0.0, 5.0), J(-1.0, 1.0);
    const double upper = tv_l1_upper_bound(mixed, I, J, NormKind::euclidean);
    const auto pts = Partition::uniform(I.lo, I.hi, 1024).points();
    const double lower = partition_sum(
        [&](double a, double b) { return l1_distance_in_u(mixed, a, b, J, NormKind::euclidean); },
        pts);
    CHECK(upper >= lower - 1e-8);
}

TEST_CASE("arc length") {
    CHECK(arc_length(ScalarPath::affine(1.0, 0.0), 2.0, 5.0) == doctest::Approx(3.0));
    CHECK(arc_length(ScalarPath::constant(1.0), 0.0, 5.0) == 0.0);
    CHECK(arc_length(builtins::sine(), 0.0, 2 * pi) == doctest::Approx(4.0).epsilon(1e-10));
    auto dv = [](double t) {
        ColumnVector v(2);
        v << -std::sin(t), std::cos(t);
        return v;
    };
    CHECK(arc_length(dv, 0.0, 2 * pi, {}, NormKind::euclidean) ==
          doctest::Approx(2 * pi).epsilon(1e-10));
}

TEST_CASE("change of variables") {
    auto ident = [](double u) { return ColumnVector::Constant(1, u); };
    const auto a = cov_check(ident, builtins::sine(), 0.0, pi / 2);
    CHECK(a.lhs(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.rhs(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.passed);

    const auto b = cov_check(ident, ScalarPath::constant(0.7), -1.0, 3.0);
    CHECK(b.lhs(0) == 0.0);
    CHECK(b.rhs(0) == 0.0);

    auto expo = [](double u) {
        ColumnVector v(2);
        v << std::exp(u), 0.0;
        return v;
    };
    ScalarPath sq([](double t) { return t * t; }, ScalarPath::Fn([](double t) { return 2 * t; }),
                  {});
    const auto c = cov_check(expo, sq, 0.0, 1.0);
    CHECK(c.rhs(0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(c.lhs(0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(c.defect <= 1e-9);

    ScalarPath absolute([](double t) { return std::abs(t); }, std::nullopt, {0.0});
    auto y = [](double u) { return ColumnVector::Constant(1, std::cos(3 * u)); };
    const auto d = cov_check(y, absolute, -1.0, 0.5);
    CHECK(d.passed);
}

}
