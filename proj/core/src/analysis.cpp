#include "morreylab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "morreylab/errors.hpp"
#include "morreylab/spaces.hpp"

namespace morreylab {

namespace {

constexpr double kZeroFraction = 1e-20;

std::vector<double> checked_radii(const Grid& grid, Point center, std::span<const double> radii) {
  std::vector<double> out(radii.begin(), radii.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() < 6) throw PreconditionError("excess profile needs at least 6 distinct radii");
  if (!grid.contains(center)) throw PreconditionError("balls exit domain (centre outside)");
  const double dist = grid.distance_to_boundary(center);
  for (double r : out) {
    if (!(r > 0.0)) throw PreconditionError("radii must be positive");
    if (r > dist * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "balls exit domain (r=" << r << " > dist=" << dist << ")";
      throw PreconditionError(msg.str());
    }
    if (r < 4.0 * grid.h() * (1.0 - 1e-9)) throw PreconditionError("radius below 4h");
  }
  return out;
}

template <typename Value, typename Avg, typename Dist>
ExcessProfile excess_impl(const Grid& grid, const std::vector<Value>& values, Point center,
                          std::span<const double> radii, double p, Avg average, Dist dist) {
  if (!(p >= 1.0)) throw PreconditionError("excess exponent p must be >= 1");
  ExcessProfile out;
  out.center = center;
  out.p = p;
  out.grid_h = grid.h();
  out.boundary_distance = grid.distance_to_boundary(center);
  for (double r : checked_radii(grid, center, radii)) {
    const Ball b{center, r};
    const auto nodes = nodes_in_ball(grid, b);
    if (nodes.empty()) throw PreconditionError("empty region");
    const Value mean = average(b);
    long double sum = 0.0L, moment = 0.0L;
    for (std::size_t k : nodes) {
      sum += std::pow(dist(values[k], mean), p);
      moment += std::pow(dist(values[k], Value{}), p);
    }
    out.entries.push_back({r, static_cast<double>(sum / nodes.size())});
    out.magnitude = std::max(out.magnitude, static_cast<double>(moment / nodes.size()));
  }
  return out;
}

double vector_distance(const VectorField::Value& a, const VectorField::Value& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double average_power(const VectorField& g, const std::vector<std::size_t>& nodes, double p) {
  long double sum = 0.0L;
  for (std::size_t k : nodes) sum += std::pow(magnitude(g[k]), p);
  return static_cast<double>(sum / nodes.size());
}

void check_fp_indices(double p, double lambda) {
  const int n = Grid::dim;
  std::ostringstream msg;
  if (!(p >= 1.0) || !(p < n)) {
    msg << "hypothesis violated: 1 <= p < n (p=" << p << ", n=" << n << ")";
  } else if (!(lambda > n - p) || !(lambda < n)) {
    msg << "hypothesis violated: n - p < lambda < n (lambda=" << lambda << ", p=" << p
        << ", n=" << n << ")";
  }
  if (!msg.str().empty()) throw PreconditionError(msg.str());
}

}  // namespace

ExcessProfile campanato_excess(const VectorField& g, Point center, std::span<const double> radii,
                               double p) {
  return excess_impl(
      g.grid(), g.values(), center, radii, p, [&](const Ball& b) { return ball_average(g, b); },
      vector_distance);
}

ExcessProfile campanato_excess(const ScalarField& g, Point center, std::span<const double> radii,
                               double p) {
  return excess_impl(
      g.grid(), g.values(), center, radii, p, [&](const Ball& b) { return ball_average(g, b); },
      [](double a, double b) { return std::abs(a - b); });
}

std::vector<double> default_excess_radii(const Grid& grid, Point center) {
  const double dist = grid.distance_to_boundary(center);
  if (!(dist >= 4.0 * grid.h())) throw PreconditionError("balls exit domain (centre too close to the boundary)");
  std::vector<double> radii;
  for (double r = dist; r >= 4.0 * grid.h() * (1.0 - 1e-9); r *= BallFamily::default_ratio) {
    radii.push_back(r);
  }
  return radii;
}

FitWindow default_window(const ExcessProfile& profile) {
  return {8.0 * profile.grid_h, 0.25 * profile.boundary_distance};
}

ExponentFit fit_exponent(const ExcessProfile& profile, std::optional<FitWindow> window) {
  const FitWindow w = window.value_or(default_window(profile));
  if (!(w.r_lo < w.r_hi)) throw PreconditionError("fit window is empty (r_lo >= r_hi)");
  ExponentFit out;
  out.window = w;
  const double zero = kZeroFraction * profile.magnitude;
  std::vector<double> xs, ys;
  for (const ExcessEntry& e : profile.entries) {
    if (e.radius < w.r_lo * (1.0 - 1e-9) || e.radius > w.r_hi * (1.0 + 1e-9)) continue;
    if (e.excess <= zero) {
      ++out.zeros_excluded;
      continue;
    }
    xs.push_back(e.radius);
    ys.push_back(e.excess);
  }
  if (xs.empty() && out.zeros_excluded > 0) {
    out.smooth = true;
    out.slope = std::numeric_limits<double>::infinity();
    out.alpha_hat = out.slope;
    return out;
  }
  if (xs.size() < 4) {
    std::ostringstream msg;
    msg << "fewer than 4 usable points in the fit window [" << w.r_lo << ", " << w.r_hi << "] ("
        << xs.size() << " positive, " << out.zeros_excluded << " zero)";
    throw PreconditionError(msg.str());
  }
  const LineFit fit = fit_loglog(xs, ys);
  out.slope = fit.slope;
  out.alpha_hat = fit.slope / profile.p;
  out.rms_residual = fit.rms_residual;
  out.points_used = fit.points;
  return out;
}

FPReport fp_ratio(const ScalarField& f, const ScalarField& phi, const Ball& b, double p,
                  double lambda, double morrey_norm_f, std::size_t phi_id) {
  check_fp_indices(p, lambda);
  if (f.grid_ptr() != phi.grid_ptr()) throw PreconditionError("grids mismatch");
  if (!(morrey_norm_f >= 0.0)) throw PreconditionError("Morrey norm must be non-negative");
  const Grid& grid = f.grid();
  const double limit = b.radius - grid.h();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (phi[k] != 0.0 && !(distance(grid.node(k), b.center) < limit)) {
      throw PreconditionError("not compactly supported: test function reaches the sphere of the ball");
    }
  }
  const ScalarField abs_f = f.map([](double v) { return std::abs(v); });
  long double lhs = 0.0L;
  for (std::size_t k : nodes_in_ball(grid, b)) {
    if (phi[k] != 0.0) lhs += abs_f.cell_integral(k) * std::pow(std::abs(phi[k]), p);
  }
  FPReport out;
  out.ball = b;
  out.phi_id = phi_id;
  out.lhs = static_cast<double>(lhs);
  const double dirichlet = p_dirichlet_integral(phi, p);
  out.rhs_core = std::pow(b.radius, lambda - Grid::dim + p) * morrey_norm_f * dirichlet;
  if (out.lhs == 0.0) {
    out.ratio = 0.0;
  } else {
    out.ratio = out.lhs / out.rhs_core;
  }
  return out;
}

double pairing_bound(const ScalarField& f, const ScalarField& phi, double p, double lambda,
                     double morrey_norm_f) {
  check_fp_indices(p, lambda);
  if (f.grid_ptr() != phi.grid_ptr()) throw PreconditionError("grids mismatch");
  const Grid& grid = f.grid();
  const double h2 = grid.h() * grid.h();
  const ScalarField abs_f = f.map([](double v) { return std::abs(v); });
  long double pairing = 0.0L, lp = 0.0L;
  bool nonzero = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (phi[k] == 0.0) continue;
    nonzero = true;
    pairing += abs_f.cell_integral(k) * std::abs(phi[k]);
    lp += h2 * std::pow(std::abs(phi[k]), p);
  }
  if (!nonzero) throw PreconditionError("test function vanishes identically");
  if (pairing == 0.0L) return 0.0;
  const double w1p = std::pow(static_cast<double>(lp) + p_dirichlet_integral(phi, p), 1.0 / p);
  return static_cast<double>(pairing) / (morrey_norm_f * w1p);
}

FPBattery fp_battery(const ScalarField& f, Point x0, double p, double lambda, double morrey_norm_f,
                     std::size_t trials, double r_lo, double r_hi, std::mt19937_64& rng) {
  if (!(r_lo > 0.0 && r_lo < r_hi)) throw PreconditionError("radius range must satisfy 0 < r_lo < r_hi");
  const Grid& grid = f.grid();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FPBattery out;
  std::vector<double> log_r, ratios;
  for (std::size_t t = 0; t < trials; ++t) {
    Ball b{};
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw PreconditionError("no admissible ball for the Fefferman-Phong battery");
      const double r = r_lo * std::pow(r_hi / r_lo, unit(rng));
      const double rho = 0.5 * r * std::sqrt(unit(rng));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      b = {x0 + Point{rho * std::cos(theta), rho * std::sin(theta)}, r};
      if (grid.distance_to_boundary(b.center) > b.radius + 2.0 * grid.h()) break;
    }
    const TestFunctionSpec spec{TestShape::Tent, b.center, 0.5 * b.radius, 1.0};
    const FPReport rep = fp_ratio(f, make_test_function(f.grid_ptr(), spec), b, p, lambda,
                                  morrey_norm_f, t);
    out.all_finite = out.all_finite && std::isfinite(rep.ratio);
    out.max_ratio = std::max(out.max_ratio, rep.ratio);
    log_r.push_back(std::log(b.radius));
    ratios.push_back(rep.ratio);
    out.reports.push_back(rep);
  }
  if (out.reports.size() >= 2) out.trend = fit_line(log_r, ratios);
  return out;
}

ExcessDecomposition excess_decomposition(const ScalarField& u, const ScalarField& v, const Ball& b,
                                         double p, std::span<const double> profile_radii) {
  if (u.grid_ptr() != v.grid_ptr()) throw PreconditionError("grids mismatch");
  if (!(p >= 1.0)) throw PreconditionError("excess exponent p must be >= 1");
  const Grid& grid = u.grid();
  const auto nodes = nodes_in_ball(grid, b);
  if (nodes.empty()) throw PreconditionError("empty region");
  const VectorField du = gradient(u);
  const VectorField dv = gradient(v);
  const VectorField diff = du - dv;

  ExcessDecomposition out;
  out.ball = b;
  out.i1 = average_power(diff, nodes, p);
  const VectorField::Value mean_v = ball_average(dv, b);
  const VectorField::Value mean_u = ball_average(du, b);
  long double i2 = 0.0L;
  for (std::size_t k : nodes) i2 += std::pow(vector_distance(dv[k], mean_v), p);
  out.i2 = static_cast<double>(i2 / nodes.size());
  out.i3 = std::pow(vector_distance(mean_v, mean_u), p);
  // Jensen on the discrete average; allow rounding in the last bits.
  out.i3_le_i1 = out.i3 <= out.i1 * (1.0 + 1e-12) + std::numeric_limits<double>::min();
  if (!profile_radii.empty()) {
    for (const ExcessEntry& e : campanato_excess(dv, b.center, profile_radii, p).entries) {
      out.i2_profile.push_back(e);
    }
  }
  return out;
}

double comparison_exponent(double p, double lambda, int n) {
  if (p >= 2.0) return (lambda + 1.0 - n) * p / (p - 1.0);
  return (lambda + 1.0 - n / p) * p - n;
}

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& f, double p,
                                  double lambda, std::span<const Ball> balls,
                                  const SolverConfig& cfg) {
  const int n = Grid::dim;
  if (u.grid_ptr() != f.grid_ptr()) throw PreconditionError("grids mismatch");
  {
    std::ostringstream msg;
    if (!(lambda > n - 1) || !(lambda <= n)) {
      msg << "hypothesis violated: n - 1 < lambda <= n (lambda=" << lambda << ", n=" << n << ")";
    } else if (p < 2.0 && !(p > 2.0 * n / (lambda + 1.0))) {
      msg << "hypothesis violated: p <= 2n/(lambda+1) (p=" << p << ", 2n/(lambda+1)="
          << 2.0 * n / (lambda + 1.0) << ")";
    }
    if (!msg.str().empty()) throw PreconditionError(msg.str());
  }
  if (balls.empty()) throw PreconditionError("comparison check needs at least one ball");

  ComparisonReport out;
  out.p = p;
  out.lambda = lambda;
  out.n = n;
  out.exponent = comparison_exponent(p, lambda, n);
  const Grid& grid = u.grid();
  const VectorField du = gradient(u);
  double scale = 0.0;

  for (const Ball& b : balls) {
    const Ball outer{b.center, 1.25 * b.radius};
    const ReplacementResult rep = p_harmonic_replacement(u, outer, p, cfg);
    const VectorField diff = du - gradient(rep.v);
    const auto nodes = nodes_in_ball(grid, b);
    if (nodes.empty()) throw PreconditionError("empty region");
    ComparisonRow row;
    row.radius = b.radius;
    row.i1 = average_power(diff, nodes, p);
    long double pairing = 0.0L;
    for (std::size_t k : nodes_in_ball(grid, outer)) {
      pairing += f.cell_integral(k) * (u[k] - rep.v[k]);
    }
    row.pairing = static_cast<double>(pairing);
    row.energy_u = rep.dirichlet_u;
    row.energy_v = rep.dirichlet_v;
    out.rows.push_back(row);
    scale = std::max(scale, average_power(du, nodes, p));
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) { return a.radius < b.radius; });

  std::vector<double> xs, ys;
  for (const ComparisonRow& row : out.rows) {
    if (row.i1 > kZeroFraction * std::max(scale, 1.0)) {
      xs.push_back(row.radius);
      ys.push_back(row.i1);
    }
  }
  if (xs.empty()) {
    // u is p-harmonic on every ball: I1 vanishes identically.
    out.fit.slope = std::numeric_limits<double>::infinity();
    out.pass = true;
    return out;
  }
  if (xs.size() < 3) throw PreconditionError("comparison check needs at least 3 balls with I1 > 0");
  out.fit = fit_loglog(xs, ys);
  out.pass = out.fit.slope >= out.exponent - 0.1;
  return out;
}

}  // namespace morreylab
