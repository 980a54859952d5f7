#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "morreylab/fit.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/test_functions.hpp"

namespace morreylab {

struct ExcessEntry {
  double radius = 0.0;
  double excess = 0.0;
};

/// E_k = avg_{B_{r_k}} |G - (G)_{r_k}|^p at a fixed centre, radii decreasing.
struct ExcessProfile {
  Point center;
  double p = 2.0;
  double grid_h = 0.0;
  double boundary_distance = 0.0;  // dist(center, boundary of the domain)
  double magnitude = 0.0;          // largest avg_{B_r} |G|^p, the scale of "zero"
  std::vector<ExcessEntry> entries;
};

/// Requires p >= 1, at least 6 distinct radii >= 4h, and every ball inside the
/// domain (throws "balls exit domain" otherwise). Radii are sorted decreasing.
ExcessProfile campanato_excess(const VectorField& g, Point center, std::span<const double> radii,
                               double p);
ExcessProfile campanato_excess(const ScalarField& g, Point center, std::span<const double> radii,
                               double p);

/// Radii r_max * 2^{-k/2} down to 4h with r_max = dist(center, boundary).
std::vector<double> default_excess_radii(const Grid& grid, Point center);

struct FitWindow {
  double r_lo = 0.0;
  double r_hi = 0.0;
};

struct ExponentFit {
  double slope = 0.0;
  double alpha_hat = 0.0;  // slope / p
  FitWindow window;
  double rms_residual = 0.0;
  std::size_t points_used = 0;
  std::size_t zeros_excluded = 0;
  /// Every excess in the window vanishes to rounding: no finite exponent.
  bool smooth = false;
};

/// Default window [8h, 0.25 * dist(center, boundary)].
FitWindow default_window(const ExcessProfile& profile);

/// Log-log least squares over the entries inside the window. Entries at or below
/// 1e-20 * magnitude count as zeros and are excluded. If every entry is a zero
/// the fit reports smooth (slope and alpha_hat infinite). Fewer than 4 positive
/// entries otherwise throws.
ExponentFit fit_exponent(const ExcessProfile& profile, std::optional<FitWindow> window = std::nullopt);

struct FPReport {
  double lhs = 0.0;       // int_B |f| |phi|^p
  double rhs_core = 0.0;  // r^{lambda-n+p} ||f||_{1,lambda} int_B |Dphi|^p
  double ratio = 0.0;
  Ball ball;
  std::size_t phi_id = 0;
};

/// Requires 1 <= p < n, n - p < lambda < n, and phi vanishing on nodes within h
/// of the sphere of b or outside it ("not compactly supported").
FPReport fp_ratio(const ScalarField& f, const ScalarField& phi, const Ball& b, double p,
                  double lambda, double morrey_norm_f, std::size_t phi_id = 0);

/// int |f||phi| / (||f||_{1,lambda} ||phi||_{W^{1,p}}). Throws for phi == 0.
double pairing_bound(const ScalarField& f, const ScalarField& phi, double p, double lambda,
                     double morrey_norm_f);

struct FPBattery {
  std::vector<FPReport> reports;
  LineFit trend;  // ratio against log r
  double max_ratio = 0.0;
  bool all_finite = true;
};

/// Random tents on balls B_r(x) with r log-uniform in [r_lo, r_hi], |x - x0| <= r/2
/// and tent radius r/2 around x, so every pair is a rescaled copy of the same
/// geometry relative to the point x0.
FPBattery fp_battery(const ScalarField& f, Point x0, double p, double lambda, double morrey_norm_f,
                     std::size_t trials, double r_lo, double r_hi, std::mt19937_64& rng);

struct ExcessDecomposition {
  Ball ball;
  double i1 = 0.0;  // avg_b |Du - Dv|^p
  double i2 = 0.0;  // avg_b |Dv - (Dv)_b|^p
  double i3 = 0.0;  // |(Dv)_b - (Du)_b|^p
  std::vector<ExcessEntry> i2_profile;
  bool i3_le_i1 = true;
};

/// Splits the excess of Du on b using the comparison field v. The I2 profile is
/// evaluated on `profile_radii` (balls concentric with b, all inside the domain).
ExcessDecomposition excess_decomposition(const ScalarField& u, const ScalarField& v, const Ball& b,
                                         double p, std::span<const double> profile_radii = {});

struct ComparisonRow {
  double radius = 0.0;
  double i1 = 0.0;
  double pairing = 0.0;  // int f (u - v)
  double energy_u = 0.0;
  double energy_v = 0.0;
};

struct ComparisonReport {
  double p = 2.0;
  double lambda = 0.0;
  int n = Grid::dim;
  double exponent = 0.0;  // predicted decay exponent of I1
  LineFit fit;
  std::vector<ComparisonRow> rows;
  bool pass = false;  // slope >= exponent - 0.1
};

/// (lambda+1-n) p/(p-1) for p >= 2, (lambda+1-n/p) p - n for p < 2.
double comparison_exponent(double p, double lambda, int n);

/// For each ball B_r(x): replace u on B_{1.25r}(x), measure I1 on B_r(x). For
/// p < 2 requires p > 2n/(lambda+1).
ComparisonReport comparison_check(const ScalarField& u, const ScalarField& f, double p,
                                  double lambda, std::span<const Ball> balls,
                                  const SolverConfig& cfg = {});

}  // namespace morreylab
