#include "morreylab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "morreylab/errors.hpp"
#include "morreylab/quadrature.hpp"

namespace morreylab {

void MorreyIndex::validate(int n) const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw PreconditionError("Morrey index requires 1 <= p < inf");
  if (!(lambda >= 0.0) || lambda > n) throw PreconditionError("Morrey index requires 0 <= lambda <= n");
}

// ---------------------------------------------------------------------------
// BallFamily

BallFamily BallFamily::geometric(const Grid& grid, double r_max, double r_min, int center_stride,
                                 std::vector<Point> extra, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw PreconditionError("ball family ratio must lie in (0,1)");
  if (!(r_max >= r_min && r_min > 0.0)) throw PreconditionError("ball family needs 0 < r_min <= r_max");
  if (center_stride < 1) throw PreconditionError("ball family centre stride must be positive");
  BallFamily fam;
  for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= ratio) fam.radii.push_back(r);

  const std::size_t origin = grid.nearest_node(Point{0.5 * (grid.lower().x + grid.upper().x),
                                                     0.5 * (grid.lower().y + grid.upper().y)});
  const int i0 = grid.col(origin) % center_stride;
  const int j0 = grid.row(origin) % center_stride;
  for (int j = j0; j < grid.ny(); j += center_stride) {
    for (int i = i0; i < grid.nx(); i += center_stride) {
      const std::size_t k = grid.index(i, j);
      if (grid.in_domain(k)) fam.centers.push_back(grid.node(k));
    }
  }
  for (const Point& x : extra) {
    if (std::find(fam.centers.begin(), fam.centers.end(), x) == fam.centers.end()) {
      fam.centers.push_back(x);
    }
  }
  return fam;
}

BallFamily BallFamily::standard(const Grid& grid, std::vector<Point> extra) {
  const double r_min = 4.0 * grid.h();
  BallFamily fam = geometric(grid, grid.diameter(), r_min, 1, {}, default_ratio);
  const double smallest = fam.radii.back();
  const int stride = std::max(1, static_cast<int>(std::floor(smallest / grid.h() + 1e-9)));
  fam = geometric(grid, grid.diameter(), r_min, stride, std::move(extra), default_ratio);
  fam.validate(grid);
  return fam;
}

void BallFamily::validate(const Grid& grid) const {
  if (radii.empty() || centers.empty()) throw PreconditionError("ball family is empty");
  if (radii.size() < 8) throw PreconditionError("ball family needs at least 8 radii");
  for (double r : radii) {
    if (!(r > 0.0) || r > grid.diameter() * (1.0 + 1e-12)) {
      throw PreconditionError("ball family radius outside (0, diam]");
    }
  }
  const double r_min = *std::min_element(radii.begin(), radii.end());
  if (r_min < 4.0 * grid.h() * (1.0 - 1e-9)) {
    throw PreconditionError("ball family needs r_min >= 4h");
  }
  for (const Point& c : centers) {
    if (!grid.contains(c)) throw PreconditionError("ball family centre outside the domain");
  }
}

// ---------------------------------------------------------------------------
// Morrey norm

namespace {

void require_finite(const ScalarField& f) {
  const Grid& g = f.grid();
  const auto& s = f.singularity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.in_domain(k) || (s && s->node == k)) continue;
    if (!std::isfinite(f[k])) {
      throw PreconditionError("non-finite field value at a regular node");
    }
  }
}

ScalarField abs_power(const ScalarField& f, double p) {
  if (p == 1.0) return f.map([](double v) { return std::abs(v); });
  return f.map([p](double v) { return std::pow(std::abs(v), p); });
}

}  // namespace

MorreyReport morrey_norm(const ScalarField& f, const MorreyIndex& idx, const BallFamily& fam) {
  const Grid& grid = f.grid();
  idx.validate(Grid::dim);
  if (fam.radii.empty() || fam.centers.empty()) throw PreconditionError("ball family is empty");
  fam.validate(grid);
  require_finite(f);

  const BallIntegrator integrator(abs_power(f, idx.p));
  const std::size_t nc = fam.centers.size();
  const std::size_t nr = fam.radii.size();
  std::vector<double> best(nc, -1.0);
  std::vector<std::size_t> best_r(nc, 0);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(nc); ++ci) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      const double r = fam.radii[ri];
      const double mass = std::max(0.0, integrator.integral(Ball{fam.centers[ci], r}));
      const double value = std::pow(mass / std::pow(r, idx.lambda), 1.0 / idx.p);
      if (value > best[ci]) {
        best[ci] = value;
        best_r[ci] = ri;
      }
    }
  }

  MorreyReport report;
  report.p = idx.p;
  report.lambda = idx.lambda;
  report.grid_h = grid.h();
  report.value = -1.0;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    if (best[ci] > report.value) {
      report.value = best[ci];
      report.argmax_center = fam.centers[ci];
      report.argmax_radius = fam.radii[best_r[ci]];
    }
  }
  report.value = std::max(0.0, report.value);
  return report;
}

// ---------------------------------------------------------------------------
// Stummel-Kato modulus

namespace {

struct Offset {
  int di;
  int dj;
  long d2;
};

std::vector<Offset> sorted_offsets(double radius_in_cells) {
  const int m = static_cast<int>(std::ceil(radius_in_cells)) + 1;
  const double limit = radius_in_cells * radius_in_cells * (1.0 + 1e-12);
  std::vector<Offset> out;
  for (int dj = -m; dj <= m; ++dj) {
    for (int di = -m; di <= m; ++di) {
      const long d2 = static_cast<long>(di) * di + static_cast<long>(dj) * dj;
      if (d2 == 0 || static_cast<double>(d2) > limit) continue;
      out.push_back({di, dj, d2});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) { return a.d2 < b.d2; });
  return out;
}

void check_kernel_exponent(double p) {
  if (p >= Grid::dim) throw PreconditionError("kernel requires p < n");
  if (p < 1.0) throw PreconditionError("Stummel modulus requires p >= 1");
}

}  // namespace

std::vector<ModulusReport> stummel_profile(const ScalarField& f, double p,
                                           std::span<const double> radii,
                                           std::span<const Point> centers) {
  check_kernel_exponent(p);
  if (radii.empty()) throw PreconditionError("Stummel profile needs at least one radius");
  if (centers.empty()) throw PreconditionError("Stummel profile needs at least one centre");
  const Grid& grid = f.grid();
  const double h = grid.h();
  for (double r : radii) {
    if (!(r >= 4.0 * h * (1.0 - 1e-9))) throw PreconditionError("Stummel modulus requires r >= 4h");
  }
  require_finite(f);

  const double a = Grid::dim - p;  // kernel |x-y|^{-a}
  const ScalarField absf = f.map([](double v) { return std::abs(v); });
  const auto& sing = absf.singularity();

  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return radii[i] < radii[j]; });
  std::vector<double> thresholds(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double rc = radii[order[k]] / h;
    thresholds[k] = rc * rc * (1.0 + 1e-12);
  }

  const auto offsets = sorted_offsets(radii[order.back()] / h);
  std::vector<double> weights(offsets.size());
  for (std::size_t m = 0; m < offsets.size(); ++m) {
    const double d = std::sqrt(static_cast<double>(offsets[m].d2)) * h;
    weights[m] = h * h * std::pow(d, -a);
  }
  const double self_kernel = square_power_integral(a, h);

  std::vector<std::size_t> center_nodes(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto node = grid.node_at(centers[c]);
    if (!node || !grid.in_domain(*node)) {
      throw PreconditionError("Stummel centres must be in-domain lattice nodes");
    }
    center_nodes[c] = *node;
  }

  // sums[c * nr + k]: modulus at radius order[k] for centre c
  const std::size_t nr = order.size();
  std::vector<double> sums(centers.size() * nr, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(centers.size()); ++c) {
    const std::size_t node = center_nodes[c];
    const int ci = grid.col(node);
    const int cj = grid.row(node);
    double sum = 0.0;
    if (sing && sing->node == node) {
      const auto formula = sing->formula;
      const Point x = grid.node(node);
      sum = polar_cell_integral(
          [&](Point y) {
            const double d = distance(x, y);
            return d > 0.0 ? formula(y) * std::pow(d, -a) : 0.0;
          },
          x, h);
    } else {
      sum = absf[node] * self_kernel;
    }
    std::size_t k = 0;
    for (std::size_t m = 0; m < offsets.size() && k < nr; ++m) {
      const Offset& o = offsets[m];
      while (k < nr && static_cast<double>(o.d2) > thresholds[k]) {
        sums[c * nr + k] = sum;
        ++k;
      }
      const int i = ci + o.di;
      const int j = cj + o.dj;
      if (i < 0 || j < 0 || i >= grid.nx() || j >= grid.ny()) continue;
      const std::size_t y = grid.index(i, j);
      if (!grid.in_domain(y)) continue;
      sum += absf[y] * weights[m];
    }
    for (; k < nr; ++k) sums[c * nr + k] = sum;
  }

  std::vector<ModulusReport> out(radii.size());
  for (std::size_t k = 0; k < nr; ++k) {
    ModulusReport rep;
    rep.p = p;
    rep.radius = radii[order[k]];
    rep.grid_h = h;
    rep.value = -1.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (sums[c * nr + k] > rep.value) {
        rep.value = sums[c * nr + k];
        rep.argmax_center = centers[c];
      }
    }
    out[order[k]] = rep;
  }
  return out;
}

ModulusReport stummel_modulus(const ScalarField& f, double p, double r,
                              std::span<const Point> centers) {
  const double radii[] = {r};
  return stummel_profile(f, p, radii, centers).front();
}

DecayFit stummel_decay_slope(const ScalarField& f, double p, std::span<const double> radii,
                             std::span<const Point> centers) {
  if (radii.size() < 6) throw PreconditionError("Stummel decay needs at least 6 radii");
  const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  if (*hi < 8.0 * *lo * (1.0 - 1e-9)) {
    throw PreconditionError("Stummel decay radii must span a factor of at least 8");
  }
  const auto profile = stummel_profile(f, p, radii, centers);
  const Grid& grid = f.grid();
  bool nonzero = false;
  for (std::size_t k = 0; k < grid.size() && !nonzero; ++k) {
    nonzero = grid.in_domain(k) && f[k] != 0.0;
  }
  DecayFit out;
  for (const auto& rep : profile) {
    if (!(rep.value > 0.0)) {
      if (nonzero) throw PreconditionError("degenerate profile");
      throw PreconditionError("degenerate profile: f vanishes identically");
    }
    out.radii.push_back(rep.radius);
    out.values.push_back(rep.value);
  }
  out.fit = fit_loglog(out.radii, out.values);
  return out;
}

// ---------------------------------------------------------------------------
// Embedding

void check_embedding_hypothesis(const MorreyIndex& from, const MorreyIndex& to, int n) {
  from.validate(n);
  to.validate(n);
  if (to.p > from.p) {
    throw PreconditionError("embedding hypothesis violated: need p <= q");
  }
  if ((n - from.lambda) / from.p > (n - to.lambda) / to.p + 1e-14) {
    std::ostringstream msg;
    msg << "embedding hypothesis violated: (n-mu)/q = " << (n - from.lambda) / from.p
        << " > (n-lambda)/p = " << (n - to.lambda) / to.p;
    throw PreconditionError(msg.str());
  }
}

EmbeddingReport check_embedding(const ScalarField& f, const MorreyIndex& from,
                                const MorreyIndex& to, const BallFamily& fam) {
  check_embedding_hypothesis(from, to, Grid::dim);
  EmbeddingReport rep;
  rep.from = from;
  rep.to = to;
  rep.norm_to = morrey_norm(f, to, fam).value;
  rep.norm_from = morrey_norm(f, from, fam).value;
  rep.ratio = rep.norm_from > 0.0 ? rep.norm_to / rep.norm_from : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Predicted exponent

std::string to_string(Branch b) { return b == Branch::Degenerate ? "degenerate" : "singular"; }

double degenerate_rate(double p, double lambda, int n) { return (lambda + 1.0 - n) / (p - 1.0); }
double singular_rate(double p, double lambda, int n) { return lambda + 1.0 - 2.0 * n / p; }

ExponentPrediction predicted_alpha(double p, double lambda, int n, std::optional<double> gamma) {
  auto fail = [&](const std::string& inequality) {
    std::ostringstream msg;
    msg << "hypothesis violated: " << inequality << " (p=" << p << ", lambda=" << lambda
        << ", n=" << n;
    if (gamma) msg << ", gamma=" << *gamma;
    msg << ")";
    throw PreconditionError(msg.str());
  };
  if (n < 1) fail("n ≥ 1");
  if (!std::isfinite(lambda) || lambda <= n - 1.0) fail("λ ≤ n−1");
  if (lambda >= n) fail("λ ≥ n");
  if (!std::isfinite(p) || p <= 1.0) fail("p ≤ 1");
  if (p > n) fail("p > n");
  if (p <= 2.0 * n / (lambda + 1.0)) fail("p ≤ 2n/(λ+1)");
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) fail("γ ∉ (0,1)");

  ExponentPrediction out;
  out.p = p;
  out.lambda = lambda;
  out.n = n;
  out.gamma_cap = gamma;
  out.branch = p >= 2.0 ? Branch::Degenerate : Branch::Singular;
  out.rate = out.branch == Branch::Degenerate ? degenerate_rate(p, lambda, n)
                                              : singular_rate(p, lambda, n);
  out.alpha = gamma ? std::min(*gamma, out.rate) : out.rate;
  return out;
}

// ---------------------------------------------------------------------------
// Morrey exponent

MorreyExponentFit morrey_exponent(const ScalarField& f, std::span<const Point> centers,
                                  std::span<const double> radii) {
  if (centers.empty()) throw PreconditionError("Morrey exponent needs at least one centre");
  if (radii.size() < 4) throw PreconditionError("Morrey exponent needs at least 4 radii");
  require_finite(f);
  const BallIntegrator integrator(abs_power(f, 1.0));
  MorreyExponentFit best;
  best.lambda_hat = std::numeric_limits<double>::infinity();
  bool any = false;
  std::vector<double> masses(radii.size());
  for (const Point& c : centers) {
    bool positive = true;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      masses[k] = integrator.integral(Ball{c, radii[k]});
      positive = positive && masses[k] > 0.0;
    }
    if (!positive) continue;
    const LineFit fit = fit_loglog(radii, masses);
    if (fit.slope < best.lambda_hat) {
      best.lambda_hat = fit.slope;
      best.center = c;
      best.fit = fit;
      any = true;
    }
  }
  if (!any) throw PreconditionError("Morrey exponent: f vanishes on every tested ball");
  return best;
}

}  // namespace morreylab
