#pragma once

#include <functional>

#include "morreylab/grid.hpp"

namespace morreylab {

/// Integral of g over the axis-aligned square of side h centred at `center`, where
/// g may have an integrable point singularity at the centre.
///
/// The square is cut into eight triangles with apex at the centre. Each is
/// integrated in polar coordinates with Gauss-Legendre in the angle and in t,
/// where r = R(theta) t^4; the Jacobian r dr absorbs singularities up to |x|^-a
/// with a < 2.
double polar_cell_integral(const std::function<double(Point)>& g, Point center, double h);

/// Integral of |y|^-a over the square of side h centred at the origin, 0 <= a < 2.
/// Closed form in the angle: (8 / (2 - a)) * (h/2)^(2-a) * int_0^{pi/4} sec^(2-a).
double square_power_integral(double a, double h);

}  // namespace morreylab
