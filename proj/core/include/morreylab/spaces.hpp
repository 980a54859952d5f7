#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morreylab/fit.hpp"
#include "morreylab/grid.hpp"

namespace morreylab {

/// Exponent pair (p, lambda) of the Morrey space L^{p,lambda}.
struct MorreyIndex {
  double p = 1.0;
  double lambda = 0.0;

  /// Throws unless 1 <= p < inf and 0 <= lambda <= n.
  void validate(int n) const;
};

/// Discretisation of the sup over (x, r) in the Morrey norm: centres on a
/// sublattice and radii r_k = r_max * ratio^k down to r_min.
struct BallFamily {
  std::vector<Point> centers;
  std::vector<double> radii;  // decreasing

  static constexpr double default_ratio = 0.70710678118654752440;  // 2^{-1/2}

  /// Geometric radii from r_max down to (at least) r_min and centres on the
  /// in-domain lattice nodes spaced `center_stride` nodes apart, plus `extra`.
  static BallFamily geometric(const Grid& grid, double r_max, double r_min, int center_stride,
                              std::vector<Point> extra = {}, double ratio = default_ratio);

  /// Radii from diam(Omega) down to 4h (at least 8 radii), centres spaced at
  /// most r_min apart, plus `extra` (typically the singular point of the data).
  static BallFamily standard(const Grid& grid, std::vector<Point> extra = {});

  /// Throws if the family breaks its invariants on `grid`: radii in (0, diam],
  /// at least 8 radii, r_min >= 4h, centres in the domain.
  void validate(const Grid& grid) const;
};

struct MorreyReport {
  double p = 1.0;
  double lambda = 0.0;
  double value = 0.0;
  Point argmax_center;
  double argmax_radius = 0.0;
  double grid_h = 0.0;
};

/// max over the family of (r^-lambda * int_{Omega cap B_r(x)} |f|^p)^{1/p}.
MorreyReport morrey_norm(const ScalarField& f, const MorreyIndex& idx, const BallFamily& fam);

struct ModulusReport {
  double p = 1.0;
  double radius = 0.0;
  double value = 0.0;
  Point argmax_center;
  double grid_h = 0.0;
};

/// Stummel-Kato modulus: max over centres of int_{Omega cap B_r(x)} |f(y)| |x-y|^{-(n-p)} dy.
/// Centres must be lattice nodes; the diagonal cell y = x uses the polar rule.
ModulusReport stummel_modulus(const ScalarField& f, double p, double r,
                              std::span<const Point> centers);

/// The modulus at several radii, one sweep per centre.
std::vector<ModulusReport> stummel_profile(const ScalarField& f, double p,
                                           std::span<const double> radii,
                                           std::span<const Point> centers);

struct DecayFit {
  LineFit fit;
  std::vector<double> radii;
  std::vector<double> values;
};

/// Least-squares slope of log eta(r) against log r. Requires >= 6 radii whose
/// extreme ratio is at least 8.
DecayFit stummel_decay_slope(const ScalarField& f, double p, std::span<const double> radii,
                             std::span<const Point> centers);

struct EmbeddingReport {
  MorreyIndex from;  // (q, mu): the smaller space
  MorreyIndex to;    // (p, lambda)
  double norm_to = 0.0;
  double norm_from = 0.0;
  double ratio = 0.0;  // norm_to / norm_from
};

/// Throws "embedding hypothesis violated" unless 1 <= p <= q, lambda, mu in
/// [0, n] and (n - mu)/q <= (n - lambda)/p.
void check_embedding_hypothesis(const MorreyIndex& from, const MorreyIndex& to, int n);

EmbeddingReport check_embedding(const ScalarField& f, const MorreyIndex& from,
                                const MorreyIndex& to, const BallFamily& fam);

enum class Branch { Degenerate, Singular };

std::string to_string(Branch b);

struct ExponentPrediction {
  double alpha = 0.0;
  Branch branch = Branch::Degenerate;
  std::optional<double> gamma_cap;
  double rate = 0.0;  // the data-limited exponent before the gamma cap
  double p = 0.0;
  double lambda = 0.0;
  int n = 0;
};

/// (lambda + 1 - n) / (p - 1)
double degenerate_rate(double p, double lambda, int n);
/// lambda + 1 - 2n/p
double singular_rate(double p, double lambda, int n);

/// Gradient Hoelder exponent guaranteed for data in L^{1,lambda}:
/// min(gamma, rate) with the degenerate rate for p >= 2 and the singular one for
/// p < 2. Without gamma the bare rate is reported. Hypotheses: n-1 < lambda < n,
/// 2n/(lambda+1) < p <= n, gamma in (0,1). Violations throw PreconditionError
/// naming the failing inequality.
ExponentPrediction predicted_alpha(double p, double lambda, int n,
                                   std::optional<double> gamma = std::nullopt);

struct MorreyExponentFit {
  double lambda_hat = 0.0;
  Point center;
  LineFit fit;
};

/// Estimates the Morrey exponent of f as the smallest log-log slope of
/// r -> int_{B_r(x)} |f| over the given centres.
MorreyExponentFit morrey_exponent(const ScalarField& f, std::span<const Point> centers,
                                  std::span<const double> radii);

}  // namespace morreylab
