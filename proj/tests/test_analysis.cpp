#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morreylab/analysis.hpp"
#include "morreylab/errors.hpp"
#include "morreylab/spaces.hpp"

using namespace morreylab;

namespace {

const Point kOrigin{0.0, 0.0};

std::vector<double> radii_between(double hi, double lo) {
  std::vector<double> out;
  for (double r = hi; r >= lo * (1 - 1e-9); r *= BallFamily::default_ratio) out.push_back(r);
  return out;
}

ExcessProfile synthetic(double exponent, double scale) {
  ExcessProfile prof;
  prof.p = 2.0;
  prof.grid_h = 1.0 / 256;
  prof.boundary_distance = 1.0;
  prof.magnitude = scale;
  for (double r : radii_between(0.5, 0.02)) prof.entries.push_back({r, scale * std::pow(r, exponent)});
  return prof;
}

ScalarField inverse_sqrt(const GridPtr& g) {
  return ScalarField::sample_singular(g, [](Point x) { return std::pow(norm(x), -0.5); }, kOrigin);
}

}  // namespace

TEST_CASE("Campanato excess of simple fields") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const auto radii = radii_between(0.5, 0.05);
  const VectorField constant(g, std::vector<VectorField::Value>(g->size(), {2.0, -1.0}));
  for (const auto& e : campanato_excess(constant, kOrigin, radii, 2.0).entries) CHECK(e.excess == 0.0);

  const VectorField identity = VectorField::sample(g, [](Point x) { return VectorField::Value{x.x, x.y}; });
  const ExcessProfile prof = campanato_excess(identity, kOrigin, radii, 2.0);
  REQUIRE(prof.entries.size() == radii.size());
  for (const auto& e : prof.entries) CHECK(e.excess == doctest::Approx(e.radius * e.radius / 2).epsilon(0.03));
  for (std::size_t k = 1; k < prof.entries.size(); ++k) CHECK(prof.entries[k].radius < prof.entries[k - 1].radius);

  CHECK_THROWS_WITH_AS(campanato_excess(identity, {0.9, 0.0}, radii, 2.0), doctest::Contains("balls exit domain"),
                       PreconditionError);
  CHECK_THROWS_AS(campanato_excess(identity, kOrigin, radii_between(0.5, 0.3), 2.0), PreconditionError);
  CHECK_THROWS_AS(campanato_excess(identity, kOrigin, radii_between(0.5, 1.0 / 128), 2.0), PreconditionError);
}

TEST_CASE("excess invariances") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const VectorField field = VectorField::sample(g, [](Point x) {
    return VectorField::Value{std::sin(3 * x.x) + x.y * x.y, std::cbrt(x.x * x.y)};
  });
  const auto radii = radii_between(0.6, 0.1);
  for (double p : {1.5, 2.0, 3.0}) {
    const ExcessProfile base = campanato_excess(field, {0.1, 0.0}, radii, p);
    VectorField shifted = field;
    shifted += {5.0, -7.5};
    const ExcessProfile sh = campanato_excess(shifted, {0.1, 0.0}, radii, p);
    VectorField scaled = field;
    scaled *= 2.5;
    const ExcessProfile sc = campanato_excess(scaled, {0.1, 0.0}, radii, p);
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
      CHECK(std::abs(sh.entries[k].excess - base.entries[k].excess) <= 1e-10 * base.entries[k].excess);
      CHECK(std::abs(sc.entries[k].excess - std::pow(2.5, p) * base.entries[k].excess) <=
            1e-10 * sc.entries[k].excess);
    }
  }
}

TEST_CASE("exponent fits") {
  const ExponentFit a = fit_exponent(synthetic(1.0, 1.0));
  CHECK(a.alpha_hat == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.rms_residual < 1e-12);
  CHECK(a.points_used >= 4);
  CHECK(a.window.r_lo == doctest::Approx(8.0 / 256));
  CHECK(a.window.r_hi == doctest::Approx(0.25));
  CHECK(std::abs(fit_exponent(synthetic(1.0, 37.0)).alpha_hat - 0.5) < 1e-10);
  CHECK(std::abs(fit_exponent(synthetic(1.4, 0.2)).slope - 1.4) < 1e-10);

  ExcessProfile zeros = synthetic(1.0, 1.0);
  for (auto& e : zeros.entries) e.excess = 0.0;
  const ExponentFit smooth = fit_exponent(zeros);
  CHECK(smooth.smooth);
  CHECK(std::isinf(smooth.alpha_hat));

  ExcessProfile holes = synthetic(1.0, 1.0);
  holes.entries[3].excess = 0.0;
  const ExponentFit flagged = fit_exponent(holes, FitWindow{0.02, 0.5});
  CHECK(flagged.zeros_excluded == 1);
  CHECK(flagged.alpha_hat == doctest::Approx(0.5));
  CHECK_THROWS_AS(fit_exponent(synthetic(1.0, 1.0), FitWindow{0.2, 0.3}), PreconditionError);
  CHECK_THROWS_AS(fit_exponent(synthetic(1.0, 1.0), FitWindow{0.3, 0.2}), PreconditionError);
}

TEST_CASE("oracle gradient of the s = 1/2 radial solution has exponent 1/2") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 256);
  const VectorField du = VectorField::sample(g, [](Point x) {
    const double r = norm(x);
    return r == 0 ? VectorField::Value{0, 0} : VectorField::Value{-x.x / std::sqrt(r), -x.y / std::sqrt(r)};
  });
  const ExcessProfile prof = campanato_excess(du, kOrigin, default_excess_radii(*g, kOrigin), 2.0);
  const ExponentFit fit = fit_exponent(prof);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit.alpha_hat == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("Fefferman-Phong ratios") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const ScalarField f = inverse_sqrt(g);
  const double nf = morrey_norm(f, {1.0, 1.5}, BallFamily::standard(*g, {kOrigin})).value;
  const Ball b{{0.0, 0.0}, 0.25};
  const ScalarField phi = make_test_function(g, {TestShape::Tent, {0.0, 0.0}, 0.125, 1.0});

  CHECK(fp_ratio(ScalarField(g, 0.0), phi, b, 1.5, 1.2, 1.0).ratio == 0.0);
  const FPReport base = fp_ratio(f, phi, b, 1.5, 1.5, nf);
  CHECK(base.ratio > 0.0);
  CHECK(std::isfinite(base.ratio));
  const FPReport twice = fp_ratio(f, 2.0 * phi, b, 1.5, 1.5, nf);
  CHECK(twice.lhs == doctest::Approx(std::pow(2.0, 1.5) * base.lhs).epsilon(1e-12));
  CHECK(twice.rhs_core == doctest::Approx(std::pow(2.0, 1.5) * base.rhs_core).epsilon(1e-12));
  CHECK(twice.ratio == doctest::Approx(base.ratio).epsilon(1e-12));
  CHECK(fp_ratio(3.0 * f, phi, b, 1.5, 1.5, 3.0 * nf).ratio == doctest::Approx(base.ratio).epsilon(1e-12));

  const ScalarField wide = make_test_function(g, {TestShape::Tent, {0.0, 0.0}, 0.3, 1.0});
  CHECK_THROWS_WITH_AS(fp_ratio(f, wide, b, 1.5, 1.5, nf), doctest::Contains("not compactly supported"),
                       PreconditionError);
  CHECK_THROWS_AS(fp_ratio(f, phi, b, 2.0, 1.5, nf), PreconditionError);
  CHECK_THROWS_AS(fp_ratio(f, phi, b, 1.5, 0.4, nf), PreconditionError);

  // f = 1 with p = 1.5, lambda = 1.2: twenty random tents stay bounded.
  const ScalarField one(g, 1.0);
  const double n1 = morrey_norm(one, {1.0, 1.2}, BallFamily::standard(*g)).value;
  std::mt19937_64 rng(42);
  const FPBattery bat = fp_battery(one, {0.1, -0.1}, 1.5, 1.2, n1, 20, 0.05, 0.5, rng);
  CHECK(bat.all_finite);
  CHECK(bat.max_ratio < 1.0);
}

TEST_CASE("pairing bound") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const ScalarField f = inverse_sqrt(g);
  const double nf = morrey_norm(f, {1.0, 1.5}, BallFamily::standard(*g, {kOrigin})).value;
  const ScalarField phi = make_test_function(g, {TestShape::Bump, {0.1, 0.0}, 0.3, 1.0});
  CHECK(pairing_bound(ScalarField(g, 0.0), phi, 1.5, 1.5, 1.0) == 0.0);
  const double base = pairing_bound(f, phi, 1.5, 1.5, nf);
  CHECK(pairing_bound(4.0 * f, phi, 1.5, 1.5, 4.0 * nf) == doctest::Approx(base).epsilon(1e-12));
  CHECK_THROWS_AS(pairing_bound(f, ScalarField(g, 0.0), 1.5, 1.5, nf), PreconditionError);

  // Stable under refinement across a random tent family.
  auto max_ratio = [](double h) {
    const auto gg = make_grid(DomainKind::UnitDisk, h);
    const ScalarField ff = inverse_sqrt(gg);
    const double nn = morrey_norm(ff, {1.0, 1.5}, BallFamily::standard(*gg, {kOrigin})).value;
    std::mt19937_64 rng(42);
    double best = 0.0;
    for (const auto& spec : random_test_family(*gg, 20, rng, 0.1, 0.4)) {
      TestFunctionSpec tent = spec;
      tent.shape = TestShape::Tent;
      best = std::max(best, pairing_bound(ff, make_test_function(gg, tent), 1.5, 1.5, nn));
    }
    return best;
  };
  const double coarse = max_ratio(1.0 / 64);
  const double fine = max_ratio(1.0 / 128);
  CHECK(std::isfinite(coarse));
  CHECK(fine == doctest::Approx(coarse).epsilon(0.1));
}

TEST_CASE("excess decomposition") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const ScalarField u = ScalarField::sample(g, [](Point x) { return x.x - 0.5 * x.y; });
  const ExcessDecomposition same = excess_decomposition(u, u, {kOrigin, 0.3}, 2.0);
  CHECK(same.i1 == 0.0);
  CHECK(same.i3 == 0.0);

  const ScalarField bumped = u + 0.2 * make_test_function(g, {TestShape::Bump, {0.05, 0.0}, 0.25, 1.0});
  const Ball b{kOrigin, 0.2};
  const ReplacementResult rep = p_harmonic_replacement(bumped, {kOrigin, 0.25}, 2.0);
  const auto radii = radii_between(0.2, 0.035);
  const ExcessDecomposition d = excess_decomposition(bumped, rep.v, b, 2.0, radii);
  CHECK(d.i1 > 0.0);
  CHECK(d.i3 <= d.i1);
  CHECK(d.i3_le_i1);
  CHECK(d.i2_profile.size() == radii.size());

  const auto other = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  CHECK_THROWS_AS(excess_decomposition(u, ScalarField(other, 0.0), b, 2.0), PreconditionError);
}

TEST_CASE("comparison check") {
  CHECK(comparison_exponent(2.0, 1.5, 2) == doctest::Approx(1.0));
  CHECK(comparison_exponent(1.8, 1.9, 2) == doctest::Approx((1.9 + 1 - 2 / 1.8) * 1.8 - 2));

  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const ScalarField zero(g, 0.0);
  const ScalarField affine = ScalarField::sample(g, [](Point x) { return 0.3 * x.x + x.y; });
  std::vector<Ball> balls;
  for (double r : {0.15, 0.2, 0.3, 0.4}) balls.push_back({kOrigin, r});
  const ComparisonReport z = comparison_check(affine, zero, 2.0, 1.5, balls);
  for (const auto& row : z.rows) CHECK(row.i1 < 1e-20);
  CHECK(z.pass);

  CHECK_THROWS_WITH_AS(comparison_check(affine, zero, 1.3, 1.9, balls), doctest::Contains("2n/(lambda+1)"),
                       PreconditionError);
  CHECK_THROWS_AS(comparison_check(affine, zero, 2.0, 0.5, balls), PreconditionError);
}
