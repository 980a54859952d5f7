#include "morreylab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "morreylab/errors.hpp"

namespace morreylab {

namespace {

using Rule = boost::math::quadrature::gauss<double, 24>;
constexpr int kRadialPower = 4;

}  // namespace

double polar_cell_integral(const std::function<double(Point)>& g, Point center, double h) {
  const double half = 0.5 * h;
  const double eighth = std::numbers::pi / 4.0;
  double total = 0.0;
  for (int octant = 0; octant < 8; ++octant) {
    const double theta0 = octant * eighth;
    auto angular = [&](double theta) {
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      const double reach = half / std::max(std::abs(c), std::abs(s));
      auto radial = [&](double t) {
        const double tk1 = std::pow(t, kRadialPower - 1);
        const double r = reach * tk1 * t;
        const double dr = reach * kRadialPower * tk1;
        return g(center + Point{c, s} * r) * r * dr;
      };
      return Rule::integrate(radial, 0.0, 1.0);
    };
    total += Rule::integrate(angular, theta0, theta0 + eighth);
  }
  return total;
}

double square_power_integral(double a, double h) {
  if (a < 0.0 || a >= 2.0) {
    throw PreconditionError("square_power_integral: exponent must lie in [0, 2)");
  }
  const double b = 2.0 - a;
  auto sec_power = [b](double theta) { return std::pow(1.0 / std::cos(theta), b); };
  const double angular = Rule::integrate(sec_power, 0.0, std::numbers::pi / 4.0);
  return 8.0 / b * std::pow(0.5 * h, b) * angular;
}

}  // namespace morreylab
