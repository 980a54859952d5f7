#include "morreylab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "morreylab/errors.hpp"

namespace morreylab {

double SolverConfig::effective_tol() const {
  if (tol > 0.0) return tol;
  return p == 2.0 ? 1e-8 : 1e-6;
}

void SolverConfig::validate(int n) const {
  if (!(p > 1.0) || p > n) {
    std::ostringstream msg;
    msg << "solver requires 1 < p <= n (p=" << p << ", n=" << n << ")";
    throw PreconditionError(msg.str());
  }
  if (!(tol >= 0.0)) throw PreconditionError("solver tolerance must be non-negative");
  if (!(kappa >= 0.0)) throw PreconditionError("kappa must be non-negative");
  if (max_iter < 1) throw PreconditionError("max_iter must be positive");
  if (!(initial_step > 0.0)) throw PreconditionError("initial step must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw PreconditionError("backtracking factor must lie in (0,1)");
  if (!(armijo > 0.0 && armijo < 0.5)) throw PreconditionError("Armijo constant must lie in (0,1/2)");
  if (!(kappa0 > 0.0) || anneal_stages < 0) throw PreconditionError("bad annealing schedule");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Corner triangle: node c with its horizontal neighbour ax = c + sx and vertical
// neighbour ay = c + sy; D_T u = (sx (u[ax]-u[c]), sy (u[ay]-u[c])) / h.
struct Corner {
  std::uint32_t c;
  std::uint32_t ax;
  std::uint32_t ay;
  std::int8_t sx;
  std::int8_t sy;
};

template <typename Pred>
std::vector<Corner> collect_corners(const Grid& g, Pred keep) {
  std::vector<Corner> out;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      for (int sy = -1; sy <= 1; sy += 2) {
        for (int sx = -1; sx <= 1; sx += 2) {
          if (i + sx < 0 || i + sx >= g.nx() || j + sy < 0 || j + sy >= g.ny()) continue;
          Corner t{static_cast<std::uint32_t>(g.index(i, j)),
                   static_cast<std::uint32_t>(g.index(i + sx, j)),
                   static_cast<std::uint32_t>(g.index(i, j + sy)),
                   static_cast<std::int8_t>(sx), static_cast<std::int8_t>(sy)};
          if (keep(t)) out.push_back(t);
        }
      }
    }
  }
  return out;
}

struct Slope {
  double x;
  double y;
};

inline Slope corner_gradient(const Corner& t, const double* w, double inv_h) {
  return {t.sx * (w[t.ax] - w[t.c]) * inv_h, t.sy * (w[t.ay] - w[t.c]) * inv_h};
}

inline double energy_density(double s2, double p, double kappa) {
  const double q = kappa * kappa + s2;
  if (p == 2.0) return 0.5 * q;
  return std::pow(q, 0.5 * p) / p;
}

// (kappa^2 + |xi|^2)^{(p-2)/2}; the flux vanishes at xi = 0 for kappa = 0.
inline double flux_weight(double s2, double p, double kappa) {
  const double q = kappa * kappa + s2;
  if (p == 2.0) return 1.0;
  if (q <= 0.0) return 0.0;
  return std::pow(q, 0.5 * (p - 2.0));
}

// Energy restricted to an active node set (unknowns) with fixed values elsewhere.
class PEnergy {
 public:
  PEnergy(const Grid& grid, const std::vector<char>& active, std::vector<double> load)
      : grid_(grid), load_(std::move(load)) {
    unknown_.assign(grid.size(), -1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (active[k]) {
        unknown_[k] = static_cast<int>(nodes_.size());
        nodes_.push_back(k);
      }
    }
    corners_ = collect_corners(grid, [&](const Corner& t) {
      return active[t.c] || active[t.ax] || active[t.ay];
    });
    area_ = 0.25 * grid.h() * grid.h();
    inv_h_ = 1.0 / grid.h();
  }

  std::size_t unknowns() const { return nodes_.size(); }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  const std::vector<Corner>& corners() const { return corners_; }

  double energy(const std::vector<double>& w, double p, double kappa) const {
    long double total = 0.0L;
    for (const Corner& t : corners_) {
      const Slope d = corner_gradient(t, w.data(), inv_h_);
      total += area_ * energy_density(d.x * d.x + d.y * d.y, p, kappa);
    }
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
      total -= static_cast<long double>(load_[a]) * w[nodes_[a]];
    }
    return static_cast<double>(total);
  }

  // Gradient with respect to the unknowns, and the sum of absolute contributions
  // (the scale against which the residual is normalised).
  void gradient(const std::vector<double>& w, double p, double kappa, Eigen::VectorXd& grad,
                Eigen::VectorXd& scale) const {
    grad.setZero(static_cast<Eigen::Index>(nodes_.size()));
    scale.setZero(static_cast<Eigen::Index>(nodes_.size()));
    for (const Corner& t : corners_) {
      const Slope d = corner_gradient(t, w.data(), inv_h_);
      const double a = flux_weight(d.x * d.x + d.y * d.y, p, kappa);
      const double fx = area_ * a * d.x * t.sx * inv_h_;
      const double fy = area_ * a * d.y * t.sy * inv_h_;
      add(grad, scale, t.c, -fx - fy, std::abs(fx) + std::abs(fy));
      add(grad, scale, t.ax, fx, std::abs(fx));
      add(grad, scale, t.ay, fy, std::abs(fy));
    }
    for (std::size_t a = 0; a < nodes_.size(); ++a) {
      grad[static_cast<Eigen::Index>(a)] -= load_[a];
      scale[static_cast<Eigen::Index>(a)] += std::abs(load_[a]);
    }
  }

  // Lower-triangular sparsity pattern plus the value slots of each corner.
  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(corners_.size() * 6);
    for (const Corner& t : corners_) {
      const std::array<int, 3> ids{unknown_[t.c], unknown_[t.ax], unknown_[t.ay]};
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b <= a; ++b) {
          if (ids[a] < 0 || ids[b] < 0) continue;
          trips.emplace_back(std::max(ids[a], ids[b]), std::min(ids[a], ids[b]), 0.0);
        }
      }
    }
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    hessian_.resize(n, n);
    hessian_.setFromTriplets(trips.begin(), trips.end());
    hessian_.makeCompressed();
    slots_.assign(corners_.size() * 6, -1);
    const double* base = hessian_.valuePtr();
    for (std::size_t m = 0; m < corners_.size(); ++m) {
      const Corner& t = corners_[m];
      const std::array<int, 3> ids{unknown_[t.c], unknown_[t.ax], unknown_[t.ay]};
      int s = 0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b <= a; ++b, ++s) {
          if (ids[a] < 0 || ids[b] < 0) continue;
          slots_[m * 6 + s] = static_cast<int>(
              &hessian_.coeffRef(std::max(ids[a], ids[b]), std::min(ids[a], ids[b])) - base);
        }
      }
    }
  }

  const SpMat& assemble_hessian(const std::vector<double>& w, double p, double kappa) {
    if (slots_.empty()) build_pattern();
    double* values = hessian_.valuePtr();
    std::fill(values, values + hessian_.nonZeros(), 0.0);

    double max_slope2 = 0.0;
    for (const Corner& t : corners_) {
      const Slope d = corner_gradient(t, w.data(), inv_h_);
      max_slope2 = std::max(max_slope2, d.x * d.x + d.y * d.y);
    }
    const double floor2 = std::max(1e-12 * max_slope2, 1e-200);

    for (std::size_t m = 0; m < corners_.size(); ++m) {
      const Corner& t = corners_[m];
      const Slope d = corner_gradient(t, w.data(), inv_h_);
      const double s2 = d.x * d.x + d.y * d.y;
      // Hessian of the density: q^{(p-2)/2} (I + (p-2) xi xi^T / q)
      double h11 = 1.0, h22 = 1.0, h12 = 0.0;
      if (p != 2.0) {
        const double q = std::max(kappa * kappa + s2, floor2);
        const double wq = std::pow(q, 0.5 * (p - 2.0));
        const double c = (p - 2.0) / q;
        h11 = wq * (1.0 + c * d.x * d.x);
        h22 = wq * (1.0 + c * d.y * d.y);
        h12 = wq * c * d.x * d.y;
      }
      // Columns of the local difference operator for (c, ax, ay).
      const double bx[3] = {-t.sx * inv_h_, t.sx * inv_h_, 0.0};
      const double by[3] = {-t.sy * inv_h_, 0.0, t.sy * inv_h_};
      int s = 0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b <= a; ++b, ++s) {
          const int slot = slots_[m * 6 + s];
          if (slot < 0) continue;
          const double kab = bx[a] * (h11 * bx[b] + h12 * by[b]) + by[a] * (h12 * bx[b] + h22 * by[b]);
          // the (c,c)-type diagonal appears once; off-diagonal pairs once in the lower half
          values[slot] += area_ * kab;
        }
      }
    }
    return hessian_;
  }

 private:
  void add(Eigen::VectorXd& grad, Eigen::VectorXd& scale, std::uint32_t node, double v,
           double a) const {
    const int u = unknown_[node];
    if (u < 0) return;
    grad[u] += v;
    scale[u] += a;
  }

  const Grid& grid_;
  std::vector<double> load_;
  std::vector<int> unknown_;
  std::vector<std::size_t> nodes_;
  std::vector<Corner> corners_;
  double area_ = 0.0;
  double inv_h_ = 0.0;
  SpMat hessian_;
  std::vector<int> slots_;
};

double normalised(const Eigen::VectorXd& grad, const Eigen::VectorXd& scale) {
  const double s = scale.norm();
  if (!(s > 0.0)) return 0.0;
  return grad.norm() / s;
}

// Newton-direction descent with Armijo backtracking for one kappa stage.
// Returns the final normalised residual.
double minimise_stage(PEnergy& energy, std::vector<double>& w, double p, double kappa,
                      double stage_tol, const SolverConfig& cfg, int stage, int& iterations,
                      std::vector<IterationRecord>& history) {
  const auto& nodes = energy.nodes();
  Eigen::VectorXd grad, scale;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  bool analysed = false;
  std::vector<double> trial(w.size());

  double current = energy.energy(w, p, kappa);
  energy.gradient(w, p, kappa, grad, scale);
  double residual = normalised(grad, scale);
  history.push_back({iterations, stage, kappa, current, residual, 0.0});

  while (residual > stage_tol) {
    if (iterations >= cfg.max_iter) {
      std::ostringstream msg;
      msg << "p-Poisson solver did not converge within " << cfg.max_iter
          << " iterations (residual " << residual << ")";
      throw SolverError(msg.str(), residual);
    }
    const SpMat& hess = energy.assemble_hessian(w, p, kappa);
    if (!analysed) {
      ldlt.analyzePattern(hess);
      analysed = true;
    }
    double shift = 0.0;
    Eigen::VectorXd dir;
    for (int attempt = 0; attempt < 8; ++attempt) {
      ldlt.setShift(shift);
      ldlt.factorize(hess);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
        dir = ldlt.solve(-grad);
        if (ldlt.info() == Eigen::Success && dir.allFinite()) break;
      }
      dir.resize(0);
      const double diag = hess.diagonal().cwiseAbs().maxCoeff();
      shift = shift == 0.0 ? 1e-10 * diag : shift * 100.0;
    }
    double slope = dir.size() ? grad.dot(dir) : 0.0;
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = grad.dot(dir);
    }

    double t = cfg.initial_step;
    double next = current;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = w;
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        trial[nodes[a]] += t * dir[static_cast<Eigen::Index>(a)];
      }
      next = energy.energy(trial, p, kappa);
      if (next <= current + cfg.armijo * t * slope && next < current) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
    }
    if (!accepted) {
      // No representable decrease left: the iterate is a minimiser to rounding.
      break;
    }
    w.swap(trial);
    current = next;
    ++iterations;
    energy.gradient(w, p, kappa, grad, scale);
    residual = normalised(grad, scale);
    history.push_back({iterations, stage, kappa, current, residual, t});
  }
  return residual;
}

std::vector<double> nodal_load(const ScalarField& f, const std::vector<char>& active) {
  std::vector<double> load;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (active[k]) load.push_back(f.cell_integral(k));
  }
  return load;
}

SolveResult run_solver(const ScalarField& f, std::vector<double> w, const std::vector<char>& active,
                       const SolverConfig& cfg) {
  const Grid& grid = f.grid();
  PEnergy energy(grid, active, nodal_load(f, active));
  SolveResult out;
  if (energy.unknowns() == 0) {
    out.u = ScalarField(f.grid_ptr(), std::move(w));
    return out;
  }
  const double p = cfg.p;
  const double tol = cfg.effective_tol();

  std::vector<double> kappas;
  if (p != 2.0 && cfg.kappa == 0.0) {
    for (int j = 0; j < cfg.anneal_stages; ++j) kappas.push_back(cfg.kappa0 * std::ldexp(1.0, -j));
    kappas.push_back(0.0);
  } else {
    kappas.push_back(cfg.kappa);
  }

  int iterations = 0;
  double residual = 0.0;
  for (std::size_t stage = 0; stage < kappas.size(); ++stage) {
    const bool last = stage + 1 == kappas.size();
    const double stage_tol = last ? tol : std::max(tol, 1e-4);
    residual = minimise_stage(energy, w, p, kappas[stage], stage_tol, cfg,
                              static_cast<int>(stage), iterations, out.history);
  }
  if (residual > tol) {
    std::ostringstream msg;
    msg << "p-Poisson solver stalled at residual " << residual << " (tol " << tol << ")";
    throw SolverError(msg.str(), residual);
  }
  out.u = ScalarField(f.grid_ptr(), std::move(w));
  out.residual = residual;
  out.iterations = iterations;
  return out;
}

}  // namespace

SolveResult solve_p_poisson(const ScalarField& f, const ScalarField& dirichlet,
                            const SolverConfig& cfg) {
  cfg.validate(Grid::dim);
  if (f.grid_ptr() != dirichlet.grid_ptr()) throw PreconditionError("f and boundary data live on different grids");
  const Grid& grid = f.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!grid.interior(k) && grid.in_domain(k) && !std::isfinite(dirichlet[k])) {
      throw PreconditionError("boundary data must be finite");
    }
  }
  std::vector<char> active(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) active[k] = grid.interior(k) ? 1 : 0;

  std::vector<double> w = dirichlet.values();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (active[k]) w[k] = 0.0;
  }
  if (cfg.p != 2.0) {
    // Warm start from the linear problem with the same data.
    SolverConfig linear = cfg;
    linear.p = 2.0;
    linear.kappa = 0.0;
    linear.tol = 1e-10;
    w = run_solver(f, std::move(w), active, linear).u.values();
  }
  return run_solver(f, std::move(w), active, cfg);
}

ReplacementResult p_harmonic_replacement(const ScalarField& u, const Ball& b, double p,
                                         SolverConfig cfg) {
  const Grid& grid = u.grid();
  cfg.p = p;
  cfg.validate(Grid::dim);
  if (b.radius < 8.0 * grid.h() * (1.0 - 1e-9)) {
    throw PreconditionError("ball too small for the stencil (radius < 8h)");
  }
  if (!(grid.distance_to_boundary(b.center) > b.radius)) {
    throw PreconditionError("replacement ball must lie compactly inside the domain");
  }
  std::vector<char> active(grid.size(), 0);
  const double r2 = b.radius * b.radius;
  for (std::size_t k : nodes_in_ball(grid, b)) {
    const Point x = grid.node(k) - b.center;
    if (grid.interior(k) && x.x * x.x + x.y * x.y < r2 * (1.0 - 1e-12)) active[k] = 1;
  }
  const ScalarField zero(u.grid_ptr(), 0.0);

  ReplacementResult out;
  out.ball = b;
  out.solve = run_solver(zero, u.values(), active, cfg);
  out.v = out.solve.u;

  const auto corners = collect_corners(grid, [&](const Corner& t) {
    return active[t.c] || active[t.ax] || active[t.ay];
  });
  const double area = 0.25 * grid.h() * grid.h();
  const double inv_h = 1.0 / grid.h();
  long double du = 0.0L, dv = 0.0L;
  for (const Corner& t : corners) {
    const Slope a = corner_gradient(t, u.values().data(), inv_h);
    const Slope c = corner_gradient(t, out.v.values().data(), inv_h);
    du += area * std::pow(a.x * a.x + a.y * a.y, 0.5 * p);
    dv += area * std::pow(c.x * c.x + c.y * c.y, 0.5 * p);
  }
  out.dirichlet_u = static_cast<double>(du);
  out.dirichlet_v = static_cast<double>(dv);
  return out;
}

double p_dirichlet_integral(const ScalarField& u, double p) {
  const Grid& grid = u.grid();
  const auto corners = collect_corners(grid, [&](const Corner& t) {
    return grid.in_domain(t.c) && grid.in_domain(t.ax) && grid.in_domain(t.ay);
  });
  const double area = 0.25 * grid.h() * grid.h();
  const double inv_h = 1.0 / grid.h();
  long double total = 0.0L;
  for (const Corner& t : corners) {
    const Slope d = corner_gradient(t, u.values().data(), inv_h);
    total += area * std::pow(d.x * d.x + d.y * d.y, 0.5 * p);
  }
  return static_cast<double>(total);
}

WeakResidual weak_residual(const ScalarField& u, const ScalarField& f, double p,
                           std::span<const ScalarField> family) {
  if (family.empty()) throw PreconditionError("weak residual needs a non-empty test family");
  if (!(p > 1.0)) throw PreconditionError("weak residual requires p > 1");
  const Grid& grid = u.grid();
  const double area = 0.25 * grid.h() * grid.h();
  const double inv_h = 1.0 / grid.h();
  const double h2 = grid.h() * grid.h();

  WeakResidual out;
  out.test_family_size = family.size();
  for (const ScalarField& phi : family) {
    std::vector<char> support(grid.size(), 0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (phi[k] == 0.0) continue;
      if (!grid.interior(k)) throw PreconditionError("test function must vanish off the interior nodes");
      support[k] = 1;
    }
    const auto corners = collect_corners(grid, [&](const Corner& t) {
      return support[t.c] || support[t.ax] || support[t.ay];
    });
    long double pairing = 0.0L, grad_norm = 0.0L, value_norm = 0.0L;
    for (const Corner& t : corners) {
      const Slope du = corner_gradient(t, u.values().data(), inv_h);
      const Slope dphi = corner_gradient(t, phi.values().data(), inv_h);
      const double a = flux_weight(du.x * du.x + du.y * du.y, p, 0.0);
      pairing += area * a * (du.x * dphi.x + du.y * dphi.y);
      grad_norm += area * std::pow(dphi.x * dphi.x + dphi.y * dphi.y, 0.5 * p);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!support[k]) continue;
      pairing -= static_cast<long double>(f.cell_integral(k)) * phi[k];
      value_norm += h2 * std::pow(std::abs(phi[k]), p);
    }
    const double norm = std::pow(static_cast<double>(value_norm + grad_norm), 1.0 / p);
    if (!(norm > 0.0)) throw PreconditionError("test function vanishes identically");
    out.value = std::max(out.value, std::abs(static_cast<double>(pairing)) / norm);
  }
  return out;
}

}  // namespace morreylab
