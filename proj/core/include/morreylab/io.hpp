#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "morreylab/analysis.hpp"
#include "morreylab/bench.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/spaces.hpp"

namespace morreylab {

// JSON records (two-space indented). Non-finite numbers are written as null.

/// {p, lambda, value, argmax_center: [x, y], argmax_radius, grid_h}
std::string to_json(const MorreyReport& r);
/// {p, radius, value, argmax_center: [x, y], grid_h}
std::string to_json(const ModulusReport& r);
/// {alpha, branch, gamma_cap, rate, p, lambda, n}
std::string to_json(const ExponentPrediction& e);
/// Case manifest: {id, family, p, n, domain, params, lambda_true, alpha_true,
/// alpha_pred, note}
std::string to_json(const BenchmarkCase& c);
/// Result row: {id, p, lambda, alpha_pred, alpha_hat, pass}
std::string to_json(const CaseResult& r);
/// {alpha_hat, window: [r_lo, r_hi], residual, predicted_alpha, pass, points, smooth}
std::string exponent_summary_json(const ExponentFit& fit, std::optional<double> predicted_alpha,
                                  bool pass);

// CSV tables, header first, numbers in %.17g.

/// radius,excess
void write_excess_csv(std::ostream& out, const ExcessProfile& profile);
/// phi_id,center_x,center_y,radius,lhs,rhs_core,ratio
void write_fp_csv(std::ostream& out, std::span<const FPReport> reports);
/// iter,energy,residual,step
void write_history_csv(std::ostream& out, std::span<const IterationRecord> history);
/// id,p,lambda,alpha_pred,alpha_hat,pass (empty alpha_pred when not predicted)
void write_results_csv(std::ostream& out, std::span<const CaseResult> rows);

/// Reads "key = value" lines (blank lines and '#' comments ignored) with keys
/// p, kappa, tol, max_iter, initial_step, backtrack, armijo, kappa0,
/// anneal_stages, on top of `base`. Unknown keys and malformed values throw.
SolverConfig parse_solver_config(std::istream& in, SolverConfig base = {});

}  // namespace morreylab
