// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pplimit/convex_body.hpp"
#include "pplimit/experiment.hpp"
#include "pplimit/sampling.hpp"

using namespace pplimit;

namespace {

std::vector<ConvexBody> test_bodies() {
  return {ConvexBody::unit_cube(2),
          ConvexBody::unit_cube(3),
          ConvexBody::centered_cube(2),
          ConvexBody::box(Vec::Constant(2, -1.0), (Vec(2) << 2.0, 0.5).finished()),
          ConvexBody::ball(Vec::Zero(2), 1.0),
          ConvexBody::ball((Vec(3) << 1.0, 2.0, 3.0).finished(), 0.5),
          ConvexBody::polygon({{0.0, 0.0}, {2.0, 0.0}, {2.5, 1.0}, {1.0, 2.0}, {-0.5, 1.0}})};
}

}  // namespace

TEST(ConvexBody, Invariants) {
  for (const ConvexBody& b : test_bodies()) {
    EXPECT_GT(b.volume(), 0.0);
    EXPECT_GT(b.diameter(), 0.0);
    EXPECT_GE(b.circumradius(), 0.5 * b.diameter() - 1e-12);
    EXPECT_TRUE(b.contains(b.centroid()));
  }
}

TEST(ConvexBody, VolumesAndSupport) {
  EXPECT_DOUBLE_EQ(ConvexBody::unit_cube(3).volume(), 1.0);
  EXPECT_NEAR(ConvexBody::ball(Vec::Zero(2), 1.0).volume(), kPi, 1e-14);
  const ConvexBody tri = ConvexBody::polygon({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  EXPECT_NEAR(tri.volume(), 0.5, 1e-15);
  EXPECT_NEAR(tri.centroid()[0], 1.0 / 3.0, 1e-15);
  const ConvexBody sq = ConvexBody::centered_cube(2);
  const Vec u = (Vec(2) << std::cos(0.3), std::sin(0.3)).finished();
  EXPECT_NEAR(sq.support(u), 0.5 * (std::abs(u[0]) + std::abs(u[1])), 1e-15);
  EXPECT_TRUE(sq.contains_origin_in_interior());
  EXPECT_FALSE(ConvexBody::unit_cube(2).contains_origin_in_interior());
}

TEST(ConvexBody, RejectsBadInput) {
  EXPECT_THROW(ConvexBody::box(Vec::Zero(2), Vec::Zero(2)), ConfigError);
  EXPECT_THROW(ConvexBody::ball(Vec::Zero(2), 0.0), ConfigError);
  EXPECT_THROW(ConvexBody::polygon({{0.0, 0.0}, {1.0, 0.0}}), ConfigError);
  EXPECT_THROW(ConvexBody::polygon({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}), ConfigError);
  EXPECT_THROW(ConvexBody::polygon({{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.2}, {2.0, 2.0}, {0.0, 2.0}}), ConfigError);
}

TEST(SamplePoissonPoints, MeanAndVarianceOfCounts) {
  const ConvexBody sq = ConvexBody::unit_cube(2);
  const int R = 2000;
  const double t = 100.0;
  RunningStats counts;
  for (int r = 0; r < R; ++r) counts.add(static_cast<double>(sample_poisson_points(sq, t, derive_seed(1, {r})).size()));
  EXPECT_LE(std::abs(counts.mean() - t), 3.0 * std::sqrt(t / R));
  const double ratio = counts.variance() / counts.mean();
  EXPECT_GE(ratio, 0.9);
  EXPECT_LE(ratio, 1.1);
}

TEST(SamplePoissonPoints, DiskMeanCount) {
  const ConvexBody disk = ConvexBody::ball(Vec::Zero(2), 1.0);
  const int R = 2000;
  RunningStats counts;
  for (int r = 0; r < R; ++r) {
    const PointConfiguration c = sample_poisson_points(disk, 10.0, derive_seed(2, {r}));
    for (std::size_t i = 0; i < c.size(); ++i) ASSERT_LE(c.point(i).norm(), 1.0);
    counts.add(static_cast<double>(c.size()));
  }
  EXPECT_LE(std::abs(counts.mean() - 10.0 * kPi), 3.0 * std::sqrt(10.0 * kPi / R));
}

TEST(SamplePoissonPoints, Deterministic) {
  for (const ConvexBody& b : test_bodies()) {
    const PointConfiguration a = sample_poisson_points(b, 50.0, 42);
    const PointConfiguration c = sample_poisson_points(b, 50.0, 42);
    ASSERT_EQ(a.points.cols(), c.points.cols());
    EXPECT_TRUE(a.points == c.points);
    EXPECT_EQ(a.seed, 42u);
    EXPECT_EQ(a.process, ProcessKind::poisson);
  }
}

TEST(SamplePoissonPoints, PointsInsideAndUniform) {
  for (const ConvexBody& b : test_bodies()) {
    const PointConfiguration c = sample_poisson_points(b, 20000.0 / b.volume(), 7);
    RunningStats mean0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      ASSERT_TRUE(b.contains(c.point(i), 1e-12));
      mean0.add(c.point(i)[0]);
    }
    // The first coordinate of a uniform point has mean equal to the centroid's.
    EXPECT_NEAR(mean0.mean(), b.centroid()[0], 4.0 * mean0.standard_error());
  }
}

TEST(SamplePoissonPoints, RejectsNonPositiveIntensity) {
  EXPECT_THROW(sample_poisson_points(ConvexBody::unit_cube(2), 0.0, 1), ConfigError);
  EXPECT_THROW(sample_poisson_points(ConvexBody::unit_cube(2), -3.0, 1), ConfigError);
}

TEST(SampleBinomialPoints, ExactCountAndRange) {
  const ConvexBody sq = ConvexBody::unit_cube(2);
  const PointConfiguration c = sample_binomial_points(sq, 5, 3);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_TRUE((c.points.array() >= 0.0).all() && (c.points.array() <= 1.0).all());
  EXPECT_EQ(c.process, ProcessKind::binomial);
  EXPECT_EQ(sample_binomial_points(sq, 1, 3).size(), 1u);
  EXPECT_THROW(sample_binomial_points(sq, 0, 3), ConfigError);
}

TEST(SampleBinomialPoints, ConstantDensityCoordinateMeans) {
  const ConvexBody sq = ConvexBody::unit_cube(2);
  const WeightFunction constant{[](VecRef) { return 0.7; }, 0.7};
  const PointConfiguration c = sample_binomial_points(sq, 20000, constant, 11);
  ASSERT_EQ(c.size(), 20000u);
  for (int a = 0; a < 2; ++a) {
    RunningStats s;
    for (std::size_t i = 0; i < c.size(); ++i) s.add(c.point(i)[a]);
    EXPECT_NEAR(s.mean(), 0.5, 3.0 * s.standard_error());
  }
}

TEST(SampleBinomialPoints, LinearDensityMean) {
  // phi(x) = 1 + g.(x - c) on the unit square: E[x_1] = 1/2 + g_1 / 12.
  const ConvexBody sq = ConvexBody::unit_cube(2);
  const Density phi = Density::linear(sq, (Vec(2) << 1.2, -0.6).finished());
  const PointConfiguration c = sample_binomial_points(sq, 40000, phi, 5);
  RunningStats x0, x1;
  for (std::size_t i = 0; i < c.size(); ++i) {
    x0.add(c.point(i)[0]);
    x1.add(c.point(i)[1]);
  }
  EXPECT_NEAR(x0.mean(), 0.5 + 1.2 / 12.0, 3.0 * x0.standard_error());
  EXPECT_NEAR(x1.mean(), 0.5 - 0.6 / 12.0, 3.0 * x1.standard_error());
}

TEST(SampleBinomialPoints, LooseSupBoundAborts) {
  const ConvexBody sq = ConvexBody::unit_cube(2);
  const WeightFunction loose{[](VecRef) { return 1e-9; }, 1.0};
  EXPECT_THROW(sample_binomial_points(sq, 10, loose, 1), RuntimeError);
}

TEST(SampleBinomialPoints, DensityAboveBoundIsRejected) {
  const ConvexBody sq = ConvexBody::unit_cube(2);
  Rng rng = make_rng(1);
  const WeightFunction wrong{[](VecRef) { return 2.0; }, 1.0};
  EXPECT_THROW(sample_from_density(sq, wrong, rng), ConfigError);
}

TEST(HyperplaneMeasure, CenteredSquareMassIsTwoOverPi) {
  // Average of h_K(u) = (|u1| + |u2|) / 2 over the unit circle.
  const HyperplaneMeasure mu(ConvexBody::centered_cube(2), 1.0);
  EXPECT_NEAR(mu.total_mass(), 2.0 / kPi, 1e-8);
}

TEST(HyperplaneMeasure, DiskAndBallMasses) {
  // h_K = R for a centred ball: mu(H) = R^r / r.
  EXPECT_NEAR(HyperplaneMeasure(ConvexBody::ball(Vec::Zero(2), 2.0), 1.0).total_mass(), 2.0, 1e-10);
  EXPECT_NEAR(HyperplaneMeasure(ConvexBody::ball(Vec::Zero(2), 2.0), 2.0).total_mass(), 2.0, 1e-10);
  EXPECT_NEAR(HyperplaneMeasure(ConvexBody::ball(Vec::Zero(3), 1.5), 3.0).total_mass(), std::pow(1.5, 3) / 3.0, 1e-8);
  // Centred unit cube in R^3: E|u_i| = 1/2, so E h_K = 3/4.
  EXPECT_NEAR(HyperplaneMeasure(ConvexBody::centered_cube(3), 1.0).total_mass(), 0.75, 1e-6);
}

TEST(HyperplaneMeasure, RequiresOriginInside) {
  try {
    HyperplaneMeasure mu(ConvexBody::unit_cube(2), 1.0);
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("window must contain origin"), std::string::npos);
  }
  EXPECT_THROW(HyperplaneMeasure(ConvexBody::centered_cube(2), 0.5), ConfigError);
}

TEST(SampleHyperplaneProcess, EveryPlaneHitsWindowAndPIsUniform) {
  const ConvexBody sq = ConvexBody::centered_cube(2);
  const HyperplaneMeasure mu(sq, 1.0);
  Rng rng = make_rng(3);
  std::vector<double> ratio;
  for (int rep = 0; rep < 200; ++rep) {
    for (const Hyperplane& h : sample_hyperplane_process(mu, 100.0, rng)) {
      ASSERT_NEAR(h.normal.norm(), 1.0, 1e-12);
      ASSERT_GE(h.offset, 0.0);
      ASSERT_LE(h.offset, sq.support(h.normal));
      ratio.push_back(h.offset / sq.support(h.normal));
    }
  }
  std::sort(ratio.begin(), ratio.end());
  const double ks = ks_distance(ratio, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(ratio.size())));
}

TEST(SampleHyperplaneProcess, MeanCountAndDeterminism) {
  const ConvexBody sq = ConvexBody::centered_cube(2);
  RunningStats n;
  for (int r = 0; r < 2000; ++r)
    n.add(static_cast<double>(sample_hyperplane_process(sq, 1.0, 30.0, derive_seed(5, {r})).size()));
  const double mean = 30.0 * 2.0 / kPi;
  EXPECT_LE(std::abs(n.mean() - mean), 3.0 * std::sqrt(mean / 2000.0));
  const auto a = sample_hyperplane_process(sq, 1.0, 30.0, 9);
  const auto b = sample_hyperplane_process(sq, 1.0, 30.0, 9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].normal == b[i].normal);
    EXPECT_EQ(a[i].offset, b[i].offset);
  }
}

TEST(SampleHyperplaneProcess, OffsetMarginalForRTwo) {
  // Within a narrow direction bin h_K(u) is nearly constant, and p / h_K(u)
  // has distribution function x^r. Chi-square over 10 equal-probability bins.
  const ConvexBody disk = ConvexBody::ball(Vec::Zero(2), 1.0);
  const HyperplaneMeasure mu(disk, 2.0);
  Rng rng = make_rng(21);
  std::vector<int> bins(10, 0);
  int n = 0;
  while (n < 20000) {
    const Hyperplane h = mu.sample(rng);
    if (std::atan2(h.normal[1], h.normal[0]) < 0.0) continue;
    const double x = h.offset / disk.support(h.normal);
    ++bins[std::min(9, static_cast<int>(10.0 * x * x))];
    ++n;
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
  EXPECT_LT(chi2, 27.88);  // 0.999 quantile with 9 degrees of freedom
}

TEST(SampleHyperplaneProcess, BinomialCount) {
  const HyperplaneMeasure mu(ConvexBody::centered_cube(2), 1.0);
  Rng rng = make_rng(1);
  EXPECT_EQ(sample_hyperplane_binomial(mu, 17, rng).size(), 17u);
}

TEST(SampleKFlatProcess, MeanCount) {
  RunningStats n;
  for (int r = 0; r < 2000; ++r)
    n.add(static_cast<double>(sample_kflat_process(3, 1, 1.0, DirectionLaw::haar(), 10.0, derive_seed(3, {r})).size()));
  EXPECT_LE(std::abs(n.mean() - 10.0 * kPi), 3.0 * std::sqrt(10.0 * kPi / 2000.0));
}

TEST(SampleKFlatProcess, CanonicalForm) {
  const Vec center = (Vec(5) << 0.3, -0.2, 0.5, 1.0, 0.0).finished();
  for (int k = 1; k <= 2; ++k) {
    const auto flats = sample_kflat_process(5, k, 2.0, DirectionLaw::haar(), 5.0, 17, center);
    ASSERT_FALSE(flats.empty());
    for (const AffineFlat& f : flats) {
      EXPECT_NO_THROW(f.check_invariants());
      EXPECT_EQ(f.flat_dim(), k);
      // The flat meets the ball of radius rho around the centre.
      const Vec foot = f.base + f.basis * (f.basis.transpose() * (center - f.base));
      EXPECT_LE((foot - center).norm(), 2.0 + 1e-12);
    }
  }
}

TEST(SampleKFlatProcess, HaarDirectionSecondMoment) {
  Rng rng = make_rng(8);
  const DirectionLaw haar = DirectionLaw::haar();
  RunningStats s;
  for (int i = 0; i < 30000; ++i) {
    const Mat l = haar.sample(rng, 3, 1);
    s.add(l(0, 0) * l(0, 0));
  }
  EXPECT_NEAR(s.mean(), 1.0 / 3.0, 3.0 * s.standard_error());
}

TEST(SampleKFlatProcess, AxialLawTiltsTowardAxis) {
  // Density 1 + c (u_axis^2 - 1/3) on lines in R^3 gives E u_axis^2 = 1/3 + c * 4/45.
  Rng rng = make_rng(9);
  const DirectionLaw law = DirectionLaw::axial(2, 1.5);
  RunningStats s;
  for (int i = 0; i < 40000; ++i) {
    const Mat l = law.sample(rng, 3, 1);
    s.add(l(2, 0) * l(2, 0));
  }
  EXPECT_NEAR(s.mean(), 1.0 / 3.0 + 1.5 * 4.0 / 45.0, 3.0 * s.standard_error());
}

TEST(SampleKFlatProcess, RejectsIntersectingRegime) {
  try {
    sample_kflat_process(3, 2, 1.0, DirectionLaw::haar(), 1.0, 1);
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("non-intersecting regime requires 2k < d"), std::string::npos);
  }
  EXPECT_THROW(DirectionLaw::axial(0, 10.0).validate(3, 1), ConfigError);
}
