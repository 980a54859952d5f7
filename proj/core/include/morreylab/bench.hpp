#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morreylab/analysis.hpp"
#include "morreylab/grid.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/spaces.hpp"

namespace morreylab {

enum class CaseFamily { Radial, Serrin };

/// Which of u = +-|x|^gamma and f = +-F pairs up, where
/// F = gamma^{p-1} [(gamma-1)(p-1) - 1 + n] |x|^{(gamma-1)(p-1)-1}.
/// Only the two negated conventions solve -Delta_p u = f; AsWritten fails the
/// substitution check and is rejected at construction.
enum class SerrinSign { NegatedSolution, NegatedData, AsWritten };

std::string to_string(CaseFamily f);
std::string to_string(SerrinSign s);

struct BenchmarkCase {
  std::string id;
  CaseFamily family = CaseFamily::Radial;
  double p = 2.0;
  int n = 2;
  DomainKind domain = DomainKind::UnitDisk;
  double s = 0.0;      // radial: f = c |x|^-s
  double c = 0.0;
  double gamma = 0.0;  // Serrin: u = sign |x|^gamma
  SerrinSign sign = SerrinSign::NegatedSolution;
  std::optional<RadialProfile> u_exact;
  double lambda_true = 0.0;
  std::optional<double> alpha_true;  // empty: gradient not continuous ("not C1")
  std::optional<ExponentPrediction> prediction;
  std::string prediction_note;  // why prediction is empty, if it is

  double u(double r) const;
  double du(double r) const;  // radial derivative
  double source(double r) const;
  /// Exponent e of the source, f ~ |x|^e.
  double source_exponent() const;
  /// Largest relative mismatch of -r^{1-n} (r^{n-1}|u'|^{p-2}u')' against f over
  /// 100 radii in [0.05, 1].
  double self_check() const;

  /// f on the grid, the origin marked singular when e < 0.
  ScalarField source_field(GridPtr grid) const;
  ScalarField exact_field(GridPtr grid) const;
  /// Exact gradient; on a two-dimensional slice when n > 2.
  VectorField exact_gradient(GridPtr grid) const;
};

/// Requires 0 <= s < 1 ("data leaves the admissible Morrey range" otherwise) and
/// 1 < p <= n. c defaults to n - s, which makes u' = -r^beta.
BenchmarkCase radial_case(double s, double p, int n, std::optional<double> c = std::nullopt);

/// Requires 0 < gamma <= 1, f integrable near the origin, and a sign convention
/// passing the substitution check to 1e-8.
BenchmarkCase serrin_case(double gamma, double p, int n,
                          SerrinSign sign = SerrinSign::NegatedSolution);

struct MatrixSpec {
  std::vector<double> ps;
  std::vector<double> ss;
  std::vector<double> gammas;  // Serrin witnesses, built for every p
  int n = 2;

  /// p = 2, s in {0.2, 0.5, 0.8}, Serrin gamma in {0.75, 1}, n = 2.
  static MatrixSpec defaults();
};

struct CaseMatrix {
  std::vector<BenchmarkCase> cases;
  std::vector<std::string> skipped;
};

/// Radial cases for every admissible (p, s) pair (those accepted by
/// predicted_alpha) and Serrin cases for every (p, gamma). Inadmissible
/// combinations are skipped with a reason.
CaseMatrix case_matrix(const MatrixSpec& spec);

struct RunOptions {
  double h = 1.0 / 256.0;
  bool use_solver = false;  // otherwise the exact field is measured
  SolverConfig solver;
};

struct CaseResult {
  std::string id;
  double p = 0.0;
  double lambda = 0.0;
  std::optional<double> alpha_pred;
  std::optional<double> alpha_true;
  double alpha_hat = 0.0;
  bool pass = false;
  std::string note;
  ExponentFit fit;
  ExcessProfile profile;
  double solver_residual = 0.0;
  int solver_iterations = 0;
  double max_gradient = 0.0;
};

/// Tolerance on |alpha_hat - alpha_true|: 0.02 on exact fields, 0.05 on solves.
double alpha_tolerance(const RunOptions& opts);

/// Measures the Campanato exponent at the origin: of Du for radial cases, of u
/// for Serrin cases (whose gradient is unbounded). The solver path requires n = 2.
CaseResult run_case(const BenchmarkCase& bc, const RunOptions& opts);

/// Parses "radial-<s>" or "serrin-<gamma>".
BenchmarkCase case_from_id(const std::string& id, double p, int n);

}  // namespace morreylab
