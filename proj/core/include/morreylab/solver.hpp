#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "morreylab/grid.hpp"

namespace morreylab {

/// Parameters of the p-Poisson minimiser.
///
/// The flux is (kappa^2 + |xi|^2)^{(p-2)/2} xi. With kappa == 0 and p != 2 the
/// solver anneals kappa_j = kappa0 * 2^-j over `anneal_stages` warm-started
/// stages and finishes on the unregularised energy; kappa > 0 is used as is.
struct SolverConfig {
  double p = 2.0;
  double kappa = 0.0;
  double tol = 0.0;  // 0 selects 1e-8 for p == 2 and 1e-6 otherwise
  int max_iter = 200;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  double kappa0 = 1e-2;
  int anneal_stages = 6;

  double effective_tol() const;
  /// Throws PreconditionError unless 1 < p <= n, tol >= 0, kappa >= 0 and the
  /// step controls are in range.
  void validate(int n) const;
};

struct IterationRecord {
  int iter = 0;
  int stage = 0;
  double kappa = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolveResult {
  ScalarField u;
  std::vector<IterationRecord> history;
  double residual = 0.0;
  int iterations = 0;
};

/// Minimises J(u) = (1/p) sum_T |T| (kappa^2 + |D_T u|^2)^{p/2} - sum_i F_i u_i over
/// the interior nodes, where T runs over the corner triangles of the lattice (each
/// node paired with one horizontal and one vertical neighbour, weight h^2/4) and F_i
/// is the dual-cell integral of f. Every non-interior node keeps the value of
/// `dirichlet`, so callers supply Dirichlet data on boundary nodes and on the
/// exterior ring touched by the stencil.
///
/// The normalised residual is ||grad J|| / || sum of |terms| || over the unknowns.
/// Search directions come from the Hessian of the convex regularised energy and
/// every accepted step satisfies the Armijo condition.
///
/// Throws SolverError (carrying the last residual) when max_iter is exhausted.
SolveResult solve_p_poisson(const ScalarField& f, const ScalarField& dirichlet,
                            const SolverConfig& cfg);

struct ReplacementResult {
  ScalarField v;
  Ball ball;
  double dirichlet_u = 0.0;  // sum over the replaced corner triangles of |T| |D_T u|^p
  double dirichlet_v = 0.0;
  SolveResult solve;
};

/// p-harmonic replacement of u on b: nodes strictly inside b are re-solved with
/// f = 0, every other node keeps its value from u. Requires b compactly inside the
/// domain and radius >= 8h.
ReplacementResult p_harmonic_replacement(const ScalarField& u, const Ball& b, double p,
                                         SolverConfig cfg = {});

/// Discrete p-Dirichlet integral sum_T |T| |D_T u|^p over corner triangles with
/// all vertices in the domain.
double p_dirichlet_integral(const ScalarField& u, double p);

struct WeakResidual {
  double value = 0.0;
  std::size_t test_family_size = 0;
};

/// max over phi of |int |Du|^{p-2} Du . Dphi - int f phi| / ||phi||_{W^{1,p}},
/// evaluated with the solver's discrete gradient and quadrature. Each phi must
/// vanish off the interior nodes.
WeakResidual weak_residual(const ScalarField& u, const ScalarField& f, double p,
                           std::span<const ScalarField> family);

/// Exact radial solution of -Delta_p u = c r^-s on the unit ball of R^n with u(1) = 0:
///   u'(r) = -A r^beta,  u(r) = A (1 - r^{beta+1}) / (beta + 1),
///   A = (c / (n - s))^{1/(p-1)},  beta = (1 - s) / (p - 1).
struct RadialProfile {
  double s = 0.0;
  double c = 1.0;
  double p = 2.0;
  int n = 2;
  double amplitude = 0.0;
  double beta = 0.0;

  double u(double r) const;
  double du(double r) const;
  double source(double r) const;
  /// r^{n-1} |u'|^{p-2} u'
  double flux(double r) const;
  /// Largest relative mismatch between -r^{1-n} (flux)' (Richardson-extrapolated
  /// central differences) and c r^-s over 100 radii in [0.01, 1].
  double self_check() const;
};

/// Pre: 0 <= s < min(2, n), c > 0, 1 < p <= n.
RadialProfile radial_oracle(double s, double c, double p, int n);

}  // namespace morreylab
