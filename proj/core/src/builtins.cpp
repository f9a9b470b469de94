#include "evostab/builtins.hpp"

#include "evostab/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <random>

namespace evostab::builtins {

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r) {
    Matrix m(r, r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
            m(i, j) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        }
    }
    return m;
}

Matrix shear(double x) {
    Matrix s(2, 2);
    s << 1.0, x, 0.0, 1.0;
    return s;
}

Matrix shear_dx() {
    Matrix s(2, 2);
    s << 0.0, 1.0, 0.0, 0.0;
    return s;
}

const std::map<std::string, std::string>& scenario_table() {
    static const std::map<std::string, std::string> table = {
        {"intro-cos", R"json({
  "kind": "verify",
  "seed": 1,
  "tolerances": {"solver": 1e-10, "quadrature": 1e-9},
  "parameters": {
    "system": {"builtin": "intro-cos"},
    "window": [0, 20],
    "pairs": 200
  }
})json"},
        {"example39", R"json({
  "kind": "verify",
  "seed": 39,
  "tolerances": {"solver": 1e-10, "quadrature": 1e-9},
  "parameters": {
    "system": {"builtin": "example39", "f": {"builtin": "sin"}, "norm": "euclidean"},
    "window": [0, 100],
    "pairs": 1000
  }
})json"},
        {"sine-curve", R"json({
  "kind": "sine-curve",
  "seed": 46,
  "tolerances": {"solver": 1e-10},
  "parameters": {
    "connection": {"builtin": "smooth", "seed": 11, "scale": 0.02, "dim": 2,
                   "domain": [[-1, 0], [-1, 1]]},
    "a": -1,
    "b": [-0.1, -0.01, -0.001, -0.0001],
    "v": [1, 0]
  }
})json"},
        {"extension-gauge", R"json({
  "kind": "extend",
  "seed": 51,
  "tolerances": {"solver": 1e-10},
  "parameters": {
    "connection": {"builtin": "gauge-rotation", "domain": [[-1, 1], [-2, 2]]},
    "f": "sin(1/x)",
    "a": 0,
    "v0": -1.5,
    "v1": 1.5,
    "sigma_seed": [1, 0],
    "grid": {"x": [-0.5, 1, 300], "v": [-2, 2, 80], "floor": 0.001}
  }
})json"},
    };
    return table;
}

} // namespace

Matrix rotation_generator() {
    Matrix j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
}

Matrix rotation(double theta) {
    Matrix r(2, 2);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    r << c, -s, s, c;
    return r;
}

OperatorField example39_field() {
    auto g = [](double t, double) -> Matrix {
        Matrix m(2, 2);
        m << 2.0 * std::atan(t), std::sqrt(t + 1.0) - std::sqrt(t), -1.0 / (1.0 + t * t),
            1.0 + std::exp(-t);
        return m;
    };
    auto dg = [](double t, double) -> Matrix {
        Matrix m(2, 2);
        const double q = 1.0 + t * t;
        m << 2.0 / q, 0.5 / std::sqrt(t + 1.0) - 0.5 / std::sqrt(t), 2.0 * t / (q * q),
            -std::exp(-t);
        return m;
    };
    OperatorField G(2, g, OperatorField::Fn(dg), {}, Interval(0.0, std::numeric_limits<double>::infinity()));
    G.set_u_independent();
    return G;
}

SeparableSystem example39(NormKind norm, ScalarPath f, double window_hi) {
    return {example39_field(), std::move(f), Interval(0.0, window_hi), Interval(-1.0, 1.0),
            VectorSpace(2, norm)};
}

SeparableSystem intro_cos(double window_hi) {
    OperatorField G = constant_field(Matrix::Identity(1, 1));
    return {G, sine(), Interval(0.0, window_hi), Interval(-1.0, 1.0),
            VectorSpace(1, NormKind::euclidean)};
}

OperatorField constant_field(const Matrix& m) {
    const auto r = static_cast<int>(m.rows());
    OperatorField G(
        r, [m](double, double) { return m; },
        OperatorField::Fn([r](double, double) -> Matrix { return Matrix::Zero(r, r); }));
    G.set_u_independent();
    return G;
}

OperatorField rotation_field() { return constant_field(rotation_generator()); }

ScalarPath sine(double frequency) {
    return ScalarPath([frequency](double t) { return std::sin(frequency * t); },
                      ScalarPath::Fn([frequency](double t) {
                          return frequency * std::cos(frequency * t);
                      }),
                      {});
}

ScalarPath sine_squared() {
    return ScalarPath([](double t) { return std::sin(t * t); },
                      ScalarPath::Fn([](double t) { return 2.0 * t * std::cos(t * t); }), {});
}

ScalarPath sawtooth(double period, double amplitude, double horizon) {
    if (!(period > 0.0)) throw DomainViolation("sawtooth needs a positive period");
    auto phase = [period](double t) {
        const double q = t / period + 0.25;
        return q - std::floor(q);
    };
    std::vector<double> corners;
    for (double c = 0.25 * period; c <= horizon; c += 0.5 * period) corners.push_back(c);
    return ScalarPath(
        [=](double t) { return amplitude * (1.0 - 4.0 * std::abs(phase(t) - 0.5)); },
        ScalarPath::Fn([=](double t) {
            return phase(t) < 0.5 ? 4.0 * amplitude / period : -4.0 * amplitude / period;
        }),
        std::move(corners));
}

ConnectionForm smooth_connection(std::uint64_t seed, double scale, VectorSpace space,
                                 Rectangle domain) {
    std::mt19937_64 rng(seed);
    const int r = space.dim;
    const Matrix m1 = scale * random_matrix(rng, r);
    const Matrix m2 = scale * random_matrix(rng, r);
    const Matrix m3 = scale * random_matrix(rng, r);
    const Matrix m4 = scale * random_matrix(rng, r);
    ConnectionForm w;
    w.omega1 = [m1, m2](double x, double u) -> Matrix {
        return m1 * std::sin(x + u) + m2 * std::cos(x * u);
    };
    w.omega2 = [m3, m4](double x, double u) -> Matrix { return m3 * std::cos(x) + m4 * (x * u); };
    w.d1_omega2 = [m3, m4](double x, double u) -> Matrix { return -m3 * std::sin(x) + m4 * u; };
    w.domain = domain;
    w.space = space;
    return w;
}

Matrix gauge_rotation_g(double x, double u, double k) { return rotation(k * x * u); }

ConnectionForm gauge_rotation(Rectangle domain, NormKind norm, double k) {
    const Matrix j = rotation_generator();
    return ConnectionForm::gauge(
        [k](double x, double u) { return gauge_rotation_g(x, u, k); },
        [k, j](double x, double u) -> Matrix { return k * u * j * rotation(k * x * u); },
        [k, j](double x, double u) -> Matrix { return k * x * j * rotation(k * x * u); },
        VectorSpace(2, norm), domain);
}

Matrix gauge_shear_g(double x, double u) { return rotation(x * u) * shear(x); }

ConnectionForm gauge_shear(Rectangle domain, NormKind norm) {
    const Matrix j = rotation_generator();
    return ConnectionForm::gauge(
        gauge_shear_g,
        [j](double x, double u) -> Matrix {
            return u * j * rotation(x * u) * shear(x) + rotation(x * u) * shear_dx();
        },
        [j](double x, double u) -> Matrix { return x * j * rotation(x * u) * shear(x); },
        VectorSpace(2, norm), domain);
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : scenario_table()) out.push_back(name);
    return out;
}

std::string scenario(const std::string& name) {
    const auto& table = scenario_table();
    const auto it = table.find(name);
    if (it == table.end()) {
        throw ValidationError({fmt::format("builtin: unknown scenario '{}'", name)});
    }
    return it->second;
}

} // namespace evostab::builtins
