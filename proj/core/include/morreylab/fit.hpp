#pragma once

#include <cstddef>
#include <span>

namespace morreylab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. Needs two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares on (log x, log y); every entry must be positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace morreylab
