#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "morreylab/errors.hpp"
#include "morreylab/spaces.hpp"

using namespace morreylab;

namespace {

const Point kOrigin{0.0, 0.0};

ScalarField inverse_sqrt(const GridPtr& g) {
  return ScalarField::sample_singular(g, [](Point x) { return std::pow(norm(x), -0.5); }, kOrigin);
}

// r^-lambda int_{B_r(x)} |y|^-1/2 dy in polar coordinates about x.
double ball_mass_oracle(Point x, double r, double lambda) {
  using boost::math::quadrature::gauss_kronrod;
  auto ring = [&](double theta) {
    auto radial = [&](double rho) {
      const Point y{x.x + rho * std::cos(theta), x.y + rho * std::sin(theta)};
      const double d = norm(y);
      return d > 0.0 ? rho / std::sqrt(d) : 0.0;
    };
    return gauss_kronrod<double, 31>::integrate(radial, 0.0, r, 12, 1e-10);
  };
  return gauss_kronrod<double, 31>::integrate(ring, 0.0, 2.0 * std::numbers::pi, 12, 1e-9) /
         std::pow(r, lambda);
}

}  // namespace

TEST_CASE("ball families") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const BallFamily fam = BallFamily::standard(*g, {kOrigin});
  CHECK(fam.radii.size() >= 8);
  CHECK(fam.radii.front() == doctest::Approx(2.0));
  CHECK(fam.radii.back() >= 4.0 / 64 * (1 - 1e-12));
  CHECK(std::is_sorted(fam.radii.rbegin(), fam.radii.rend()));
  CHECK(std::find(fam.centers.begin(), fam.centers.end(), kOrigin) != fam.centers.end());
  BallFamily bad = fam;
  bad.radii.resize(5);
  CHECK_THROWS_AS(bad.validate(*g), PreconditionError);
  bad = fam;
  bad.radii.push_back(1.0 / 64);
  CHECK_THROWS_AS(bad.validate(*g), PreconditionError);
  bad = fam;
  bad.centers.push_back({3.0, 0.0});
  CHECK_THROWS_AS(bad.validate(*g), PreconditionError);
}

TEST_CASE("Morrey norm: constants and zero") {
  const auto sq = make_grid(DomainKind::UnitSquare, 1.0 / 64);
  const BallFamily fam = BallFamily::standard(*sq);
  const MorreyReport one = morrey_norm(ScalarField(sq, 1.0), {1.0, 0.0}, fam);
  CHECK(one.value == doctest::Approx(1.0).epsilon(0.02));
  CHECK(one.grid_h == doctest::Approx(1.0 / 64));
  CHECK(morrey_norm(ScalarField(sq, 0.0), {2.0, 1.0}, fam).value == 0.0);
  BallFamily empty;
  CHECK_THROWS_AS(morrey_norm(ScalarField(sq, 1.0), {1.0, 0.0}, empty), PreconditionError);
  ScalarField bad(sq, 1.0);
  bad[sq->index(10, 10)] = std::nan("");
  CHECK_THROWS_AS(morrey_norm(bad, {1.0, 0.0}, fam), PreconditionError);
}

TEST_CASE("Morrey norm of |x|^-1/2 at lambda = 3/2") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const MorreyReport rep = morrey_norm(inverse_sqrt(g), {1.0, 1.5}, BallFamily::standard(*g, {kOrigin}));
  const double exact = 2.0 * std::numbers::pi / 1.5;
  CHECK(rep.value == doctest::Approx(exact).epsilon(0.05));
  CHECK(norm(rep.argmax_center) < 1e-12);

  // Continuum search: no off-centre ball beats the origin-centred value.
  double best = 0.0;
  Point best_x;
  for (double x : {0.0, 0.05, 0.15, 0.3}) {
    for (double r : {0.1, 0.25, 0.5}) {
      const double v = ball_mass_oracle({x, 0.0}, r, 1.5);
      if (v > best) {
        best = v;
        best_x = {x, 0.0};
      }
    }
  }
  CHECK(best == doctest::Approx(exact).epsilon(1e-6));
  CHECK(best_x.x == 0.0);
}

TEST_CASE("Morrey norm properties") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const ScalarField f = inverse_sqrt(g) + ScalarField::sample(g, [](Point x) { return std::sin(4 * x.x); });
  const BallFamily fam = BallFamily::standard(*g, {kOrigin});
  const double base = morrey_norm(f, {1.5, 1.0}, fam).value;
  for (double c : {0.5, 3.0, 17.0}) {
    CHECK(morrey_norm(c * f, {1.5, 1.0}, fam).value == doctest::Approx(c * base).epsilon(1e-13));
  }
  for (double p : {1.0, 2.0}) {
    for (auto [l1, l2] : {std::pair{0.0, 0.5}, std::pair{0.5, 1.5}, std::pair{1.0, 1.9}}) {
      const double n1 = morrey_norm(f, {p, l1}, fam).value;
      const double n2 = morrey_norm(f, {p, l2}, fam).value;
      CHECK(n1 <= std::pow(g->diameter(), (l2 - l1) / p) * n2 * (1 + 1e-14));
    }
  }
  // L^{p,0} coincides with L^p.
  const ScalarField smooth = ScalarField::sample(g, [](Point x) { return 1.0 + x.x; });
  const double lp = std::sqrt(5.0 * std::numbers::pi / 4.0);
  CHECK(morrey_norm(smooth, {2.0, 0.0}, fam).value == doctest::Approx(lp).epsilon(0.03));
}

TEST_CASE("Stummel modulus: constants and errors") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const std::vector<Point> centers{kOrigin, {0.25, -0.125}};
  const ModulusReport one = stummel_modulus(ScalarField(g, 1.0), 1.0, 0.25, centers);
  CHECK(one.value == doctest::Approx(2.0 * std::numbers::pi * 0.25).epsilon(0.03));
  CHECK(stummel_modulus(ScalarField(g, 0.0), 1.0, 0.25, centers).value == 0.0);
  CHECK_THROWS_WITH_AS(stummel_modulus(ScalarField(g, 1.0), 2.0, 0.25, centers), "kernel requires p < n",
                       PreconditionError);
  CHECK_THROWS_AS(stummel_modulus(ScalarField(g, 1.0), 1.0, 2.0 / 128, centers), PreconditionError);

  const ScalarField f = inverse_sqrt(g);
  std::vector<double> radii{0.05, 0.1, 0.2, 0.3, 0.4};
  const auto prof = stummel_profile(f, 1.2, radii, centers);
  for (std::size_t k = 1; k < prof.size(); ++k) CHECK(prof[k].value >= prof[k - 1].value);
  for (double r : radii) {
    const double ratio = stummel_modulus(f, 1.0, r, centers).value / std::sqrt(r);
    CHECK(ratio < 20.0);
    CHECK(ratio > 1.0);
  }
}

TEST_CASE("Stummel decay slopes") {
  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  std::vector<double> radii;
  for (double r = 0.4; r >= 0.05 * (1 - 1e-9); r *= BallFamily::default_ratio) radii.push_back(r);
  const std::vector<Point> centers{kOrigin};
  CHECK(stummel_decay_slope(inverse_sqrt(g), 1.0, radii, centers).fit.slope == doctest::Approx(0.5).epsilon(0.1));
  CHECK(stummel_decay_slope(ScalarField(g, 1.0), 1.0, radii, centers).fit.slope ==
        doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_WITH_AS(stummel_decay_slope(ScalarField(g, 0.0), 1.0, radii, centers),
                       doctest::Contains("degenerate profile"), PreconditionError);
  const std::vector<double> short_span{0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
  CHECK_THROWS_AS(stummel_decay_slope(ScalarField(g, 1.0), 1.0, short_span, centers), PreconditionError);

  // Two narrow bumps: slope bounded below through the measured Morrey exponent.
  auto bumps = [](Point x) {
    double v = 0.0;
    for (Point c : {Point{0.125, 0.0}, Point{-0.3125, 0.1875}}) {
      const double t = distance(x, c) / 0.06;
      if (t < 1) v += std::pow(1 - t * t, 2) / 0.01;
    }
    return v;
  };
  const ScalarField f = ScalarField::sample(g, bumps);
  std::vector<Point> lattice;
  for (double x = -0.5; x <= 0.5; x += 0.05) {
    for (double y = -0.5; y <= 0.5; y += 0.05) lattice.push_back({x, y});
  }
  for (auto& c : lattice) c = g->node(g->nearest_node(c));
  const MorreyExponentFit lam = morrey_exponent(f, lattice, radii);
  const double p = 1.0;
  const DecayFit decay = stummel_decay_slope(f, p, radii, lattice);
  CHECK(decay.fit.slope >= lam.lambda_hat - 2 + p - 0.05);

  // Refining the grid leaves eta essentially unchanged.
  const auto fine = make_grid(DomainKind::UnitDisk, 1.0 / 256);
  const std::vector<Point> c1{{0.125, 0.0}};
  const double coarse_eta = stummel_modulus(f, p, 0.2, c1).value;
  const double fine_eta = stummel_modulus(ScalarField::sample(fine, bumps), p, 0.2, c1).value;
  CHECK(coarse_eta == doctest::Approx(fine_eta).epsilon(0.02));
}

TEST_CASE("embedding") {
  const auto sq = make_grid(DomainKind::UnitSquare, 1.0 / 64);
  const BallFamily fsq = BallFamily::standard(*sq);
  const EmbeddingReport c = check_embedding(ScalarField(sq, 1.0), {2.0, 0.0}, {1.0, 1.0}, fsq);
  CHECK(std::isfinite(c.ratio));
  CHECK(c.norm_from > 0.0);

  const auto g = make_grid(DomainKind::UnitDisk, 1.0 / 64);
  const BallFamily fam = BallFamily::standard(*g, {kOrigin});
  CHECK_NOTHROW(check_embedding(inverse_sqrt(g), {1.0, 1.9}, {1.0, 1.5}, fam));
  CHECK_THROWS_WITH_AS(check_embedding(inverse_sqrt(g), {1.0, 1.0}, {1.0, 1.5}, fam),
                       doctest::Contains("embedding hypothesis violated"), PreconditionError);
  CHECK_THROWS_AS(check_embedding_hypothesis({1.0, 1.5}, {2.0, 1.5}, 2), PreconditionError);

  const double r1 = check_embedding(inverse_sqrt(g), {2.0, 1.0}, {1.0, 1.5}, fam).ratio;
  const auto g2 = make_grid(DomainKind::UnitDisk, 1.0 / 128);
  const double r2 =
      check_embedding(inverse_sqrt(g2), {2.0, 1.0}, {1.0, 1.5}, BallFamily::standard(*g2, {kOrigin})).ratio;
  CHECK(r2 == doctest::Approx(r1).epsilon(0.05));
}

TEST_CASE("predicted exponent") {
  const ExponentPrediction a = predicted_alpha(2.0, 1.5, 2, 0.9);
  CHECK(a.alpha == doctest::Approx(0.5));
  CHECK(a.branch == Branch::Degenerate);
  const ExponentPrediction b = predicted_alpha(2.5, 2.5, 3, 0.9);
  CHECK(b.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(predicted_alpha(1.8, 1.9, 2).branch == Branch::Singular);
  CHECK(predicted_alpha(2.0, 1.9, 2, 0.3).alpha == doctest::Approx(0.3));

  CHECK_THROWS_WITH_AS(predicted_alpha(1.2, 1.5, 2), doctest::Contains("p ≤ 2n/(λ+1)"), PreconditionError);
  CHECK_THROWS_WITH_AS(predicted_alpha(2.0, 1.0, 2), doctest::Contains("λ ≤ n−1"), PreconditionError);
  CHECK_THROWS_WITH_AS(predicted_alpha(2.0, 2.0, 2), doctest::Contains("λ ≥ n"), PreconditionError);
  CHECK_THROWS_WITH_AS(predicted_alpha(2.5, 1.5, 2), doctest::Contains("p > n"), PreconditionError);
  CHECK_THROWS_WITH_AS(predicted_alpha(2.0, 1.5, 2, 1.0), doctest::Contains("γ ∉ (0,1)"), PreconditionError);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    const int n = 2 + static_cast<int>(unit(rng) * 3);
    const double lambda = n - 1 + unit(rng);
    const double p_lo = 2.0 * n / (lambda + 1.0);
    const double p = p_lo + (n - p_lo) * unit(rng);
    const double gamma = unit(rng);
    if (lambda <= n - 1 || lambda >= n || p <= p_lo || p > n || gamma <= 0.0) continue;
    const ExponentPrediction e = predicted_alpha(p, lambda, n, gamma);
    CHECK(e.alpha > 0.0);
    CHECK(e.alpha < 1.0);
    CHECK(singular_rate(2.0, lambda, n) == degenerate_rate(2.0, lambda, n));
    ++checked;
  }
}
