#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morreylab/errors.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/test_functions.hpp"

using namespace morreylab;

namespace {

const Point kOrigin{0.0, 0.0};

double max_error(const ScalarField& u, const std::function<double(Point)>& exact) {
  const Grid& g = u.grid();
  double e = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.in_domain(k)) e = std::max(e, std::abs(u[k] - exact(g.node(k))));
  }
  return e;
}

// Largest relative error of |Du| against |u'| of the oracle on rings r in [lo, hi].
double gradient_error(const ScalarField& u, const RadialProfile& prof, double lo, double hi) {
  const Grid& g = u.grid();
  const VectorField du = gradient(u);
  double e = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = norm(g.node(k));
    if (!g.in_domain(k) || r < lo || r > hi) continue;
    e = std::max(e, std::abs(magnitude(du[k]) - std::abs(prof.du(r))) / std::abs(prof.du(r)));
  }
  return e;
}

struct RadialSolve {
  RadialProfile prof;
  SolveResult res;
};

RadialSolve solve_radial(double s, double p, double h) {
  const auto g = make_grid(DomainKind::UnitDisk, h);
  RadialSolve out{radial_oracle(s, 2.0 - s, p, 2), {}};
  const auto src = [&](Point x) { return out.prof.source(norm(x)); };
  const ScalarField f = s > 0 ? ScalarField::sample_singular(g, src, kOrigin) : ScalarField::sample(g, src);
  const ScalarField bc = ScalarField::sample(g, [&](Point x) { return out.prof.u(norm(x)); });
  SolverConfig cfg;
  cfg.p = p;
  out.res = solve_p_poisson(f, bc, cfg);
  return out;
}

std::vector<ScalarField> tent_family(const GridPtr& g, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ScalarField> fam;
  for (const auto& spec : random_test_family(*g, count, rng, 0.05, 0.3)) fam.push_back(make_test_function(g, spec));
  return fam;
}

}  // namespace

TEST_CASE("radial oracle") {
  const RadialProfile a = radial_oracle(0.0, 4.0, 2.0, 2);
  for (double r : {0.1, 0.5, 0.9}) {
    CHECK(a.u(r) == doctest::Approx(1 - r * r).epsilon(1e-14));
    CHECK(a.du(r) == doctest::Approx(-2 * r).epsilon(1e-14));
  }
  const RadialProfile b = radial_oracle(0.5, 1.5, 2.0, 2);
  for (double r : {0.01, 0.3, 1.0}) CHECK(b.du(r) == doctest::Approx(-std::sqrt(r)).epsilon(1e-14));
  for (auto [s, c, p, n] : {std::tuple{0.3, 2.0, 1.5, 2}, std::tuple{0.9, 0.7, 2.0, 2},
                            std::tuple{1.5, 1.0, 2.5, 3}, std::tuple{0.0, 3.0, 1.2, 2}}) {
    const RadialProfile prof = radial_oracle(s, c, p, n);
    CHECK(prof.u(1.0) == doctest::Approx(0.0));
    for (double r = 0.05; r < 1.0; r += 0.05) CHECK(prof.du(r) < 0.0);
    CHECK(prof.self_check() < 1e-10);
  }
  CHECK_THROWS_AS(radial_oracle(2.0, 1.0, 2.0, 3), PreconditionError);
  CHECK_THROWS_AS(radial_oracle(0.5, 0.0, 2.0, 2), PreconditionError);
  CHECK_THROWS_AS(radial_oracle(0.5, 1.0, 1.0, 2), PreconditionError);
  CHECK_THROWS_AS(radial_oracle(0.5, 1.0, 2.5, 2), PreconditionError);
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  CHECK(cfg.effective_tol() == 1e-8);
  cfg.p = 1.5;
  CHECK(cfg.effective_tol() == 1e-6);
  cfg.p = 2.5;
  CHECK_THROWS_AS(cfg.validate(2), PreconditionError);
  cfg.p = 1.0;
  CHECK_THROWS_AS(cfg.validate(2), PreconditionError);
  cfg = {};
  cfg.backtrack = 1.0;
  CHECK_THROWS_AS(cfg.validate(2), PreconditionError);
  cfg = {};
  cfg.kappa = -1.0;
  CHECK_THROWS_AS(cfg.validate(2), PreconditionError);
}

TEST_CASE("p = 2, f = 4 on the disk reproduces 1 - r^2") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const ScalarField f(g, 4.0);
  const ScalarField bc = ScalarField::sample(g, [](Point x) { return 1 - x.x * x.x - x.y * x.y; });
  const SolveResult res = solve_p_poisson(f, bc, {});
  CHECK(res.residual < 1e-8);
  CHECK(max_error(res.u, [](Point x) { return 1 - x.x * x.x - x.y * x.y; }) < 1e-9);
}

TEST_CASE("manufactured smooth solution converges at second order") {
  const double pi = std::numbers::pi;
  auto exact = [pi](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
  std::vector<double> err;
  for (int m : {16, 32, 64}) {
    const auto g = make_grid(DomainKind::UnitSquare, 1.0 / m);
    const ScalarField f = ScalarField::sample(g, [&](Point x) { return 2 * pi * pi * exact(x); });
    const SolveResult res = solve_p_poisson(f, ScalarField::sample(g, exact), {});
    err.push_back(max_error(res.u, exact));
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.8);
  CHECK(std::log2(err[1] / err[2]) >= 1.8);
}

TEST_CASE("affine data is reproduced for every p") {
  auto affine = [](Point x) { return 0.7 * x.x - 1.3 * x.y + 0.2; };
  for (DomainKind kind : {DomainKind::UnitDisk, DomainKind::UnitSquare, DomainKind::Annulus}) {
    const auto g = make_grid(kind, 1.0 / 32);
    for (double p : {1.3, 1.5, 2.0}) {
      SolverConfig cfg;
      cfg.p = p;
      const SolveResult res = solve_p_poisson(ScalarField(g, 0.0), ScalarField::sample(g, affine), cfg);
      CAPTURE(p);
      CHECK(max_error(res.u, affine) < 1e-10);
    }
  }
}

TEST_CASE("radial solves against the oracle") {
  for (auto [s, p] : {std::pair{0.1, 1.8}, std::pair{0.5, 2.0}, std::pair{0.5, 1.5}}) {
    const RadialSolve rs = solve_radial(s, p, 1.0 / 64);
    CAPTURE(s);
    CAPTURE(p);
    CHECK(rs.res.residual <= SolverConfig{.p = p}.effective_tol());
    CHECK(gradient_error(rs.res.u, rs.prof, 0.1, 0.9) < 0.02);
  }
  const double coarse = gradient_error(solve_radial(0.5, 1.5, 1.0 / 32).res.u, radial_oracle(0.5, 1.5, 1.5, 2), 0.1, 0.9);
  const double fine = gradient_error(solve_radial(0.5, 1.5, 1.0 / 64).res.u, radial_oracle(0.5, 1.5, 1.5, 2), 0.1, 0.9);
  CHECK(fine < coarse);
}

TEST_CASE("energy decreases within every stage") {
  const RadialSolve rs = solve_radial(0.3, 1.5, 1.0 / 32);
  const auto& hist = rs.res.history;
  REQUIRE(hist.size() > 2);
  for (std::size_t k = 1; k < hist.size(); ++k) {
    if (hist[k].stage == hist[k - 1].stage) CHECK(hist[k].energy < hist[k - 1].energy);
  }
  CHECK(hist.back().kappa == 0.0);
}

TEST_CASE("non-convergence reports the last residual") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 32);
  SolverConfig cfg;
  cfg.p = 1.5;
  cfg.max_iter = 1;
  cfg.tol = 1e-14;
  try {
    solve_p_poisson(ScalarField(g, 1.0), ScalarField(g, 0.0), cfg);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.last_residual() > 0.0);
    CHECK(std::isfinite(e.last_residual()));
  }
}

TEST_CASE("p-harmonic replacement") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  auto affine = [](Point x) { return 2.0 * x.x + x.y; };
  const ScalarField ua = ScalarField::sample(g, affine);
  for (double p : {1.5, 2.0}) {
    const ReplacementResult r = p_harmonic_replacement(ua, {{0.1, 0.1}, 0.3}, p);
    CHECK(max_error(r.v, affine) < 1e-10);
  }

  const ScalarField bowl = ScalarField::sample(g, [](Point x) { return 1 - x.x * x.x - x.y * x.y; });
  const ReplacementResult rb = p_harmonic_replacement(bowl, {kOrigin, 0.5}, 2.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    if (norm(g->node(k)) < 0.5) worst = std::max(worst, std::abs(rb.v[k] - 0.75));
  }
  CHECK(worst < 3.0 / 64);
  CHECK(rb.dirichlet_v <= rb.dirichlet_u + 1e-8);
  for (std::size_t k = 0; k < g->size(); ++k) {
    if (norm(g->node(k)) >= 0.5) CHECK(rb.v[k] == bowl[k]);
  }

  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> vals(g->size());
  for (auto& v : vals) v = noise(rng);
  const ScalarField rough(g, vals);
  for (double p : {1.4, 2.0}) {
    const ReplacementResult r = p_harmonic_replacement(rough, {{-0.2, 0.1}, 0.25}, p);
    CHECK(r.dirichlet_v <= r.dirichlet_u + 1e-8);
  }

  CHECK_THROWS_WITH_AS(p_harmonic_replacement(bowl, {kOrigin, 5.0 / 64}, 2.0),
                       doctest::Contains("ball too small"), PreconditionError);
  CHECK_THROWS_AS(p_harmonic_replacement(bowl, {{0.8, 0.0}, 0.3}, 2.0), PreconditionError);
}

TEST_CASE("weak residual") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const auto fam = tent_family(g, 20, 42);
  const ScalarField f(g, 4.0);
  const ScalarField bc = ScalarField::sample(g, [](Point x) { return 1 - x.x * x.x - x.y * x.y; });
  const SolveResult res = solve_p_poisson(f, bc, {});
  const WeakResidual w = weak_residual(res.u, f, 2.0, fam);
  CHECK(w.test_family_size == 20);
  CHECK(w.value < 1e-8);

  const ScalarField bump = make_test_function(g, {TestShape::Bump, {0.1, 0.0}, 0.3, 1.0});
  const double r1 = weak_residual(res.u + 1e-3 * bump, f, 2.0, fam).value;
  const double r2 = weak_residual(res.u + 2e-3 * bump, f, 2.0, fam).value;
  CHECK(r1 > 1e-6);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-6));

  const ScalarField affine = ScalarField::sample(g, [](Point x) { return x.x - 3 * x.y; });
  for (double p : {1.5, 2.0}) CHECK(weak_residual(affine, ScalarField(g, 0.0), p, fam).value < 1e-10);

  const std::vector<ScalarField> none;
  CHECK_THROWS_AS(weak_residual(affine, f, 2.0, none), PreconditionError);
  const std::vector<ScalarField> bad{ScalarField(g, 1.0)};
  CHECK_THROWS_AS(weak_residual(affine, f, 2.0, bad), PreconditionError);
}

TEST_CASE("scaling: t u solves with data t^{p-1} f") {
  const RadialSolve rs = solve_radial(0.3, 1.5, 1.0 / 32);
  const auto& g = rs.res.u.grid_ptr();
  const auto fam = tent_family(g, 20, 5);
  const ScalarField f = ScalarField::sample_singular(
      g, [&](Point x) { return rs.prof.source(norm(x)); }, kOrigin);
  const double p = 1.5;
  const double base = weak_residual(rs.res.u, f, p, fam).value;
  for (double t : {0.5, 3.0}) {
    const double scaled = weak_residual(t * rs.res.u, std::pow(t, p - 1) * f, p, fam).value;
    CHECK(std::abs(scaled - std::pow(t, p - 1) * base) <= 1e-8);
  }
}

TEST_CASE("p-Dirichlet integral") {
  const auto g = make_grid(DomainKind::UnitSquare, 1.0 / 32);
  const ScalarField u = ScalarField::sample(g, [](Point x) { return 3 * x.x + 4 * x.y; });
  CHECK(p_dirichlet_integral(u, 2.0) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(p_dirichlet_integral(u, 1.5) == doctest::Approx(std::pow(5.0, 1.5)).epsilon(1e-12));
}
