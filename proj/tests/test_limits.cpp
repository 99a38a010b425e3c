// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pplimit/convex_body.hpp"
#include "pplimit/limits.hpp"
#include "pplimit/models.hpp"
#include "pplimit/sampling.hpp"

using namespace pplimit;

namespace {

// Composite Simpson rule on [lo, hi] with n (even) panels.
template <class F>
double simpson(F&& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// Flat-triangle constant for the uniform law on [0, c]^2 by nested Simpson
// quadrature: int_0^1 s(1-s) ds times E|X1 - X2|^2 times the density 1/c^2.
double flat_triangle_beta_oracle(double c) {
  const double ds = simpson([](double s) { return s * (1.0 - s); }, 0.0, 1.0, 64);
  const double per_coord = simpson(
      [c](double a) { return simpson([a](double b) { return (a - b) * (a - b); }, 0.0, c, 64) / c; }, 0.0, c, 64) / c;
  return ds * 2.0 * per_coord / (c * c);
}

double pooled(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

TEST(WeibullSurvival, Examples) {
  EXPECT_EQ(weibull_survival(2.0, 3.0, 0.0, 1), 1.0);
  EXPECT_EQ(weibull_survival(2.0, 3.0, 0.0, 5), 1.0);
  EXPECT_NEAR(weibull_survival(std::log(2.0), 1.0, 1.0, 1), 0.5, 1e-15);
  EXPECT_NEAR(weibull_survival(1.0, 2.0, 1.0, 2), 2.0 / std::exp(1.0), 1e-15);
  EXPECT_EQ(weibull_survival(1.0, 1.0, kInf, 3), 0.0);
  EXPECT_THROW(weibull_survival(1.0, 1.0, 1.0, 0), ConfigError);
  EXPECT_THROW(weibull_survival(1.0, 1.0, -1.0, 1), ConfigError);
}

TEST(WeibullSurvival, LargeOrderDoesNotOverflow) {
  // Poisson(L) has P(N < m) -> 1 when m >> L and about 1/2 when m = L.
  EXPECT_NEAR(weibull_survival(1.0, 1.0, 10.0, 400), 1.0, 1e-12);
  const double s = weibull_survival(1.0, 1.0, 500.0, 500);
  EXPECT_GT(s, 0.45);
  EXPECT_LT(s, 0.55);
  EXPECT_TRUE(std::isfinite(weibull_survival(1.0, 1.0, 1e5, 200)));
}

TEST(WeibullSurvival, MonotoneInYAndM) {
  for (double tau : {0.5, 1.0, 2.0, 3.0}) {
    for (int m = 1; m <= 6; ++m) {
      double prev = 1.0;
      for (double y = 0.0; y <= 5.0; y += 0.01) {
        const double s = weibull_survival(1.7, tau, y, m);
        ASSERT_LE(s, prev + 1e-15);
        ASSERT_GE(s, 0.0);
        ASSERT_LE(s, weibull_survival(1.7, tau, y, m + 1) + 1e-15);
        prev = s;
      }
      EXPECT_LT(weibull_survival(1.7, tau, 1e4, m), 1e-12);
    }
  }
}

TEST(GilbertVoronoiLimit, ClosedForms) {
  const WeibullLimit sq = limit_gilbert_voronoi(ConvexBody::unit_cube(2));
  EXPECT_NEAR(sq.beta, 2.0 * kPi, 1e-14);
  EXPECT_EQ(sq.tau, 2.0);
  EXPECT_EQ(sq.gamma, 1.0);
  EXPECT_EQ(sq.provenance, Provenance::closed_form);
  const WeibullLimit cube = limit_gilbert_voronoi(ConvexBody::unit_cube(3));
  EXPECT_NEAR(cube.beta, 16.0 * kPi / 3.0, 1e-13);
  EXPECT_EQ(cube.tau, 3.0);
  EXPECT_NEAR(cube.gamma, 2.0 / 3.0, 1e-15);
  const WeibullLimit edge = limit_gilbert_voronoi(ConvexBody::unit_cube(2), PairStatistic::edge);
  EXPECT_NEAR(edge.beta, kPi / 2.0, 1e-14);
  // Inradius and edge differ by 2^d.
  EXPECT_NEAR(sq.beta / edge.beta, 4.0, 1e-13);
  EXPECT_THROW(limit_gilbert_voronoi(ConvexBody::unit_cube(1)), ConfigError);
}

TEST(FlatTriangleLimit, UniformSquareMatchesQuadrature) {
  const double oracle = flat_triangle_beta_oracle(1.0);
  EXPECT_NEAR(oracle, 1.0 / 18.0, 1e-12);
  const ConvexBody sq = ConvexBody::unit_cube(2);
  MonteCarloSettings s;
  s.samples = 400'000;
  s.seed = 3;
  const WeibullLimit lim = limit_flat_triangles(sq, Density::uniform(sq), s);
  EXPECT_EQ(lim.tau, 1.0);
  EXPECT_EQ(lim.gamma, 3.0);
  EXPECT_EQ(lim.provenance, Provenance::monte_carlo);
  EXPECT_GT(lim.beta_se, 0.0);
  EXPECT_NEAR(lim.beta, oracle, 3.0 * lim.beta_se);
  EXPECT_LT(lim.beta_se, 2e-4);
}

TEST(FlatTriangleLimit, UniformLawIsScaleInvariant) {
  // For a probability density on cK, phi scales by c^-2 and |x1 - x2|^2 by c^2.
  EXPECT_NEAR(flat_triangle_beta_oracle(3.0), flat_triangle_beta_oracle(1.0), 1e-12);
  MonteCarloSettings s;
  s.samples = 200'000;
  const ConvexBody big = ConvexBody::unit_cube(2).scaled(3.0);
  const WeibullLimit lim = limit_flat_triangles(big, Density::uniform(big), s);
  EXPECT_NEAR(lim.beta, 1.0 / 18.0, 3.0 * lim.beta_se);
}

TEST(FlatTriangleLimit, LinearDensityMatchesQuadrature) {
  // phi(x) = 1 + g.(x - c) on the unit square. phi is affine along the
  // segment, so the s integral equals (phi(x1) + phi(x2)) / 12; the remaining
  // 4-d integral uses a product Simpson rule.
  const Vec g = (Vec(2) << 0.6, -0.3).finished();
  auto phi = [&](double x, double y) { return 1.0 + g[0] * (x - 0.5) + g[1] * (y - 0.5); };
  const int n = 16;
  const double h = 1.0 / n;
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * h / 3.0;
  double oracle = 0.0;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b)
      for (int c = 0; c <= n; ++c)
        for (int e = 0; e <= n; ++e) {
          const double x1 = a * h, y1 = b * h, x2 = c * h, y2 = e * h;
          const double p1 = phi(x1, y1), p2 = phi(x2, y2);
          const double d2 = (x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2);
          oracle += w[a] * w[b] * w[c] * w[e] * p1 * p2 * (p1 + p2) / 12.0 * d2;
        }
  const ConvexBody sq = ConvexBody::unit_cube(2);
  MonteCarloSettings s;
  s.samples = 400'000;
  s.seed = 5;
  const WeibullLimit lim = limit_flat_triangles(sq, Density::linear(sq, g), s);
  EXPECT_NEAR(lim.beta, oracle, 3.0 * lim.beta_se);
}

TEST(KFlatLimit, HaarClosedForm) {
  EXPECT_NEAR(haar_bracket_mean(3, 1), kPi / 4.0, 1e-14);
  const WeibullLimit lim = limit_kflats(3, 1, 1.0, ConvexBody::unit_cube(3), DirectionLaw::haar());
  EXPECT_NEAR(lim.beta, kPi / 4.0, 1e-14);
  EXPECT_EQ(lim.tau, 1.0);
  EXPECT_EQ(lim.gamma, 2.0);
  const WeibullLimit l52 = limit_kflats(5, 2, 0.5, ConvexBody::unit_cube(5), DirectionLaw::haar());
  EXPECT_EQ(l52.tau, 2.0);
  EXPECT_EQ(l52.gamma, 1.0);
  EXPECT_THROW(limit_kflats(4, 2, 1.0, ConvexBody::unit_cube(4), DirectionLaw::haar()), ConfigError);
  EXPECT_THROW(limit_kflats(3, 1, 0.0, ConvexBody::unit_cube(3), DirectionLaw::haar()), ConfigError);
}

TEST(KFlatLimit, HaarBracketMatchesMonteCarlo) {
  MonteCarloSettings s;
  s.samples = 200'000;
  for (auto [d, k] : {std::pair{3, 1}, std::pair{4, 1}, std::pair{5, 2}}) {
    const MonteCarloValue mc = estimate_bracket_mean(d, k, DirectionLaw::haar(), s);
    EXPECT_NEAR(mc.mean, haar_bracket_mean(d, k), 3.0 * mc.se) << "d=" << d << " k=" << k;
  }
}

TEST(KFlatLimit, NonHaarLawUsesMonteCarlo) {
  MonteCarloSettings s;
  s.samples = 50'000;
  const WeibullLimit lim = limit_kflats(3, 1, 1.0, ConvexBody::unit_cube(3), DirectionLaw::axial(2, 0.9), s);
  EXPECT_EQ(lim.provenance, Provenance::monte_carlo);
  EXPECT_GT(lim.beta_se, 0.0);
  // Concentrating directions near one axis makes flats more parallel.
  EXPECT_LT(lim.beta, kPi / 4.0);
}

TEST(HyperplaneLimit, SeedsAgreeAndIntegrandIsPositive) {
  const HyperplaneMeasure mu(ConvexBody::ball(Vec::Zero(2), 1.0), 1.0);
  MonteCarloSettings a, b;
  a.samples = b.samples = 400'000;
  a.seed = 11;
  b.seed = 12;
  const WeibullLimit la = limit_hyperplane_simplices(mu, a);
  const WeibullLimit lb = limit_hyperplane_simplices(mu, b);
  EXPECT_GT(la.beta, 0.0);
  EXPECT_NEAR(la.beta, lb.beta, 3.0 * pooled(la.beta_se, lb.beta_se));
  EXPECT_EQ(la.tau, 0.5);
  EXPECT_EQ(la.gamma, 6.0);
  EXPECT_LT(la.excluded, la.samples / 1000 + 1);
}

TEST(HyperplaneLimit, ScalingWithWindowSize) {
  // Scaling K by c scales mu(H) by c^r and |u.z|^(r-1) by c^(r-1); the
  // simplex cut at unit distance from z is unchanged: beta ~ c^(3r - 1).
  for (double r : {1.0, 2.0}) {
    MonteCarloSettings s;
    s.samples = 300'000;
    s.seed = 21;
    const WeibullLimit small = limit_hyperplane_simplices(HyperplaneMeasure(ConvexBody::ball(Vec::Zero(2), 1.0), r), s);
    s.seed = 22;
    const WeibullLimit big = limit_hyperplane_simplices(HyperplaneMeasure(ConvexBody::ball(Vec::Zero(2), 2.0), r), s);
    const double f = std::pow(2.0, 3.0 * r - 1.0);
    EXPECT_NEAR(big.beta / f, small.beta, 3.0 * pooled(big.beta_se / f, small.beta_se)) << "r=" << r;
  }
  EXPECT_THROW(limit_hyperplane_simplices(HyperplaneMeasure(ConvexBody::centered_cube(3), 1.0)), ConfigError);
}

TEST(BinomialLimit, DividesByMassPower) {
  WeibullLimit lim;
  lim.beta = 6.0;
  lim.beta_se = 0.3;
  const WeibullLimit b = binomial_limit(lim, 2.0, 3);
  EXPECT_EQ(b.beta, 0.75);
  EXPECT_EQ(b.beta_se, 0.0375);
  EXPECT_EQ(b.tau, lim.tau);
}

TEST(ModelLimits, GammaTauPerModel) {
  ModelSpec gv;
  EXPECT_EQ(Model(gv).gamma(), 1.0);
  EXPECT_EQ(Model(gv).limit().tau, 2.0);
  ModelSpec ft;
  ft.kind = ModelKind::flat_triangles;
  ft.beta.samples = 1000;
  EXPECT_EQ(Model(ft).gamma(), 3.0);
  EXPECT_EQ(Model(ft).limit().tau, 1.0);
  ModelSpec kf;
  kf.kind = ModelKind::kflat_distance;
  kf.d = 3;
  kf.body = "unit-cube";
  kf.a = 2.0;
  EXPECT_EQ(Model(kf).gamma(), 4.0);
  EXPECT_EQ(Model(kf).limit().tau, 0.5);
  ModelSpec hs;
  hs.kind = ModelKind::hyperplane_simplices;
  hs.beta.samples = 1000;
  EXPECT_EQ(Model(hs).gamma(), 6.0);
  EXPECT_EQ(Model(hs).limit().tau, 0.5);
  // Binomial Gilbert/Voronoi on the unit square: mass 1, beta unchanged.
  gv.process = ProcessKind::binomial;
  EXPECT_NEAR(Model(gv).limit().beta, 2.0 * kPi, 1e-14);
}
