#include "support.hpp"

#include "evostab/errors.hpp"
#include "evostab/expression.hpp"
#include "evostab/extension.hpp"

#include <doctest.h>

#include <cmath>

using namespace evostab;

namespace {

ExtensionProblem gauge_problem(NormKind norm = NormKind::euclidean) {
    const Rectangle dom{{-1.0, 1.0}, {-2.0, 2.0}};
    auto omega = builtins::gauge_rotation(dom, norm);
    ColumnVector s(2);
    s << 1.0, 0.0;
    const Vector seed(s, omega.space);
    ScalarPath f([](double x) { return x > 0.0 ? std::sin(1.0 / x) : 0.0; }, std::nullopt, {});
    return {omega, f, 0.0, -1.5, 1.5, seed, std::nullopt};
}

ColumnVector oracle(const ExtensionProblem& p, double x, double v) {
    const double x_ref = p.x_ref.value_or(p.omega.domain.x.lo);
    return builtins::gauge_rotation_g(x, v) *
           builtins::gauge_rotation_g(x_ref, p.v0).inverse() * p.sigma_seed.entries();
}

} // namespace

TEST_SUITE("extension") {

TEST_CASE("grid drops the floor band") {
    const auto g = ExtensionGrid::uniform(-1.0, 1.0, 200, -1.0, 1.0, 10, 0.0, 0.05);
    for (double x : g.x) CHECK(!(x > 0.0 && x < 0.05));
    CHECK(g.v.size() == 11);
    CHECK(g.spacing() == doctest::Approx(0.2));
}

TEST_CASE("sections on a gauge connection match the oracle") {
    const auto p = gauge_problem();
    const auto grid = ExtensionGrid::uniform(-0.5, 1.0, 60, -2.0, 2.0, 20, p.a);
    const auto sigma = build_sigma(p, grid);
    CHECK(sigma.loop_defect <= 1e-8);
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
        for (std::size_t k = 0; k < grid.v.size(); ++k) {
            if (sigma.sigma.values[i][k]) {
                CHECK((*sigma.sigma.values[i][k] - oracle(p, grid.x[i], grid.v[k])).norm() <= 1e-8);
            }
        }
    }
    const auto ext = extend_section(p, sigma, grid);
    CHECK(ext.accepted);
    CHECK(ext.max_gap <= 1e-6);
    bool saw_graph = false;
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
        for (std::size_t k = 0; k < grid.v.size(); ++k) {
            saw_graph = saw_graph || sigma.region[i][k] == Region::graph;
            REQUIRE(ext.xi0.values[i][k].has_value());
            CHECK((*ext.xi0.values[i][k] - oracle(p, grid.x[i], grid.v[k])).norm() <= 1e-6);
        }
    }
    CHECK(saw_graph);
}

TEST_CASE("regions") {
    const auto p = gauge_problem();
    ExtensionGrid grid{{-0.5, 0.0, 0.5}, {-1.8, 0.0, 1.8}};
    const auto s = build_sigma(p, grid);
    CHECK(s.region[0][1] == Region::left);
    CHECK(s.region[1][0] == Region::below);
    CHECK(s.region[1][1] == Region::graph);
    CHECK(s.region[1][2] == Region::above);
    CHECK(s.region[2][0] == Region::below);
    CHECK(s.region[2][2] == Region::above);
}

TEST_CASE("non-flat connections show a gap") {
    auto p = gauge_problem();
    p.omega = builtins::smooth_connection(2, 0.5, VectorSpace(2, NormKind::euclidean), p.omega.domain);
    const auto grid = ExtensionGrid::uniform(-0.5, 1.0, 30, -2.0, 2.0, 10, p.a);
    const auto ext = extend_section(p, build_sigma(p, grid), grid);
    CHECK(ext.max_gap > 1e-4);
    CHECK(!ext.accepted);
}

TEST_CASE("residuals shrink with the grid") {
    const auto p = gauge_problem();
    double last = INFINITY;
    for (std::size_t n : {40u, 80u, 160u}) {
        const auto grid = ExtensionGrid::uniform(-0.5, 1.0, n, -2.0, 2.0, n / 2, p.a);
        const auto ext = extend_section(p, build_sigma(p, grid), grid);
        const auto mask = near_graph_mask(p.f, p.a, grid.spacing());
        const double r = parallel_residual(p.omega, ext.xi0, 1, mask).max();
        CHECK(r < last);
        last = r;
    }
}

TEST_CASE("bernstein evaluation") {
    CHECK(bernstein_eval({2.0}, 0.0, 1.0, 0.3) == 2.0);
    CHECK(bernstein_eval({0.0, 1.0}, 0.0, 2.0, 0.5) == doctest::Approx(0.25));
    const std::vector<double> s = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (double t : {0.0, 0.2, 0.9, 1.0}) CHECK(bernstein_eval(s, 0.0, 1.0, t) == doctest::Approx(t));
}

TEST_CASE("graph approximation") {
    const auto c = polynomial_graph_approx([](double) { return 3.0; }, 0.0, 1.0, 0.5, 0.1);
    CHECK(c.degree == 0);
    CHECK(c(0.5) == 3.0);

    auto f = [](double t) { return std::sin(3 * t); };
    const auto g = polynomial_graph_approx(f, 0.0, 2.0, 0.7, 0.05);
    CHECK(g(0.7) == doctest::Approx(f(0.7)).epsilon(1e-15));
    double worst = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = 2.0 * i / 10000.0;
        worst = std::max(worst, std::abs(g(t) - f(t)));
    }
    CHECK(worst < 0.05);
    CHECK(g.coefficients().size() == static_cast<std::size_t>(g.degree + 1));

    CHECK_THROWS_AS(polynomial_graph_approx(f, 0.0, 2.0, 0.7, 1e-9, 64), ApproximationFailure);
}

}

TEST_SUITE("expression") {

TEST_CASE("arithmetic") {
    const auto e = Expression::parse("2 + 3 * x ^ 2 ^ 1 - -x / 4", {"x"});
    CHECK(e(2.0) == doctest::Approx(2 + 12 + 0.5));
    CHECK(Expression::parse("sin(pi / 2) + exp(0) + e - e", {})(std::span<const double>{}) ==
          doctest::Approx(2.0));
    const auto g = Expression::parse("atan(t) * sqrt(u) + abs(log(u))", {"t", "u"});
    CHECK(g(1.0, 4.0) == doctest::Approx(std::atan(1.0) * 2 + std::log(4.0)));
    CHECK(g.uses("u"));
    CHECK(!Expression::parse("t", {"t", "u"}).uses("u"));
    CHECK(Expression::parse("2^3^2", {})(std::span<const double>{}) == 512.0);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(Expression::parse("1 +", {}), ValidationError);
    CHECK_THROWS_AS(Expression::parse("y", {"x"}), ValidationError);
    CHECK_THROWS_AS(Expression::parse("foo(1)", {}), ValidationError);
    CHECK_THROWS_AS(Expression::parse("(1", {}), ValidationError);
}

}
