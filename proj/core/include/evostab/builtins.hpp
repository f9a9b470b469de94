#pragma once

#include "evostab/calculus.hpp"
#include "evostab/stability.hpp"
#include "evostab/transport.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evostab::builtins {

/// Generator of plane rotations, [[0, -1], [1, 0]].
Matrix rotation_generator();

/// Rotation by angle theta.
Matrix rotation(double theta);

/// The 2x2 field with entries 2 atan t, sqrt(t+1) - sqrt(t), -1/(1+t^2),
/// 1 + exp(-t) on t >= 0, independent of u, with its analytic t-derivative.
OperatorField example39_field();

/// example39_field with f, J = [-1, 1] and I = [0, window_hi].
SeparableSystem example39(NormKind norm, ScalarPath f, double window_hi = 100.0);

/// G = id on R^1, f = sin, J = [-1, 1]: A(t) = cos t.
SeparableSystem intro_cos(double window_hi = 20.0);

/// Constant field G(t, u) = m, independent of u.
OperatorField constant_field(const Matrix& m);

/// G(t, u) = R, the rotation generator.
OperatorField rotation_field();

ScalarPath sine(double frequency = 1.0);
/// sin(t^2), derivative 2t cos(t^2).
ScalarPath sine_squared();
/// Triangle wave with range [-amplitude, amplitude] and the given period,
/// breakpoints at its corners inside [0, horizon].
ScalarPath sawtooth(double period, double amplitude, double horizon);

/// Smooth connection omega_1 = scale (M1 sin(x + u) + M2 cos(x u)),
/// omega_2 = scale (M3 cos x + M4 x u) with fixed pseudo-random matrices
/// drawn from `seed`. D_1 omega_2 is supplied analytically.
ConnectionForm smooth_connection(std::uint64_t seed, double scale, VectorSpace space,
                                 Rectangle domain);

/// Gauge-flat connection of g(x, u) = rotation(k x u) (r = 2).
ConnectionForm gauge_rotation(Rectangle domain, NormKind norm = NormKind::euclidean,
                              double k = 1.0);
Matrix gauge_rotation_g(double x, double u, double k = 1.0);

/// Gauge-flat connection of g(x, u) = rotation(x u) shear(x) whose
/// components do not commute (r = 2).
ConnectionForm gauge_shear(Rectangle domain, NormKind norm = NormKind::euclidean);
Matrix gauge_shear_g(double x, double u);

/// Names accepted by scenario().
std::vector<std::string> scenario_names();

/// JSON text of a built-in scenario: intro-cos, example39, sine-curve,
/// extension-gauge.
std::string scenario(const std::string& name);

} // namespace evostab::builtins
