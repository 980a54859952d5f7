#include <algorithm>
#include <cmath>
#include <sstream>

#include "morreylab/errors.hpp"
#include "morreylab/solver.hpp"

namespace morreylab {

RadialProfile radial_oracle(double s, double c, double p, int n) {
  std::ostringstream msg;
  if (n < 1) {
    msg << "radial oracle needs n >= 1 (n=" << n << ")";
  } else if (!(s >= 0.0) || !(s < std::min(2.0, static_cast<double>(n)))) {
    msg << "radial oracle needs 0 <= s < min(2, n) (s=" << s << ", n=" << n << ")";
  } else if (!(c > 0.0)) {
    msg << "radial oracle needs c > 0 (c=" << c << ")";
  } else if (!(p > 1.0) || p > n) {
    msg << "radial oracle needs 1 < p <= n (p=" << p << ", n=" << n << ")";
  }
  if (!msg.str().empty()) throw PreconditionError(msg.str());

  RadialProfile out;
  out.s = s;
  out.c = c;
  out.p = p;
  out.n = n;
  out.amplitude = std::pow(c / (n - s), 1.0 / (p - 1.0));
  out.beta = (1.0 - s) / (p - 1.0);
  return out;
}

double RadialProfile::du(double r) const { return -amplitude * std::pow(r, beta); }

double RadialProfile::u(double r) const {
  return amplitude * (1.0 - std::pow(r, beta + 1.0)) / (beta + 1.0);
}

double RadialProfile::source(double r) const { return c * std::pow(r, -s); }

double RadialProfile::flux(double r) const {
  const double d = du(r);
  return std::pow(r, n - 1) * std::pow(std::abs(d), p - 2.0) * d;
}

double RadialProfile::self_check() const {
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double r = 0.01 + (1.0 - 0.01) * k / 99.0;
    const double step = 1e-3 * r;
    auto central = [&](double d) { return (flux(r + d) - flux(r - d)) / (2.0 * d); };
    const double derivative = (4.0 * central(0.5 * step) - central(step)) / 3.0;
    const double lhs = -std::pow(r, 1 - n) * derivative;
    const double rhs = source(r);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

}  // namespace morreylab
