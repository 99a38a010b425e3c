// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "pplimit/experiment.hpp"

using namespace pplimit;

namespace {

ExperimentPlan voronoi_plan() {
  ExperimentPlan plan;
  plan.grid = {50.0, 100.0, 200.0};
  plan.replications = 300;
  plan.m_list = {1, 2};
  plan.y_grid = {0.2, 0.4, 0.6, 0.8};
  plan.seed = 17;
  return plan;
}

// Inverse-transform draws from the Weibull law with survival exp(-beta y^tau).
std::vector<double> weibull_sample(double beta, double tau, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  for (double& y : out) y = std::pow(-std::log(uniform01_open_low(rng)) / beta, 1.0 / tau);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(KsDistance, SingleSampleAtMedian) {
  const double median = std::sqrt(std::log(2.0) / (2.0 * kPi));
  WeibullLimit lim;
  lim.beta = 2.0 * kPi;
  lim.tau = 2.0;
  const std::vector<double> one{median};
  EXPECT_NEAR(ks_distance(one, 1, lim, 1), 0.5, 1e-12);
}

TEST(KsDistance, ExactLawSampleIsWithinKolmogorovBound) {
  WeibullLimit lim;
  lim.beta = 2.0 * kPi;
  lim.tau = 2.0;
  const std::size_t n = 10000;
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::vector<double> s = weibull_sample(lim.beta, lim.tau, n, seed);
    const double ks = ks_distance(s, n, lim, 1);
    EXPECT_GE(ks, 0.0);
    EXPECT_LE(ks, 1.0);
    within += ks <= 1.63 / std::sqrt(static_cast<double>(n)) ? 1 : 0;
  }
  EXPECT_GE(within, 19);
}

TEST(KsDistance, ShiftIncreasesDistance) {
  WeibullLimit lim;
  lim.beta = 1.0;
  lim.tau = 1.0;
  std::vector<double> s = weibull_sample(1.0, 1.0, 5000, 3);
  const double base = ks_distance(s, s.size(), lim, 1);
  double prev = base;
  for (double shift : {0.05, 0.1, 0.2, 0.4}) {
    std::vector<double> shifted = s;
    for (double& v : shifted) v += shift;
    const double ks = ks_distance(shifted, shifted.size(), lim, 1);
    EXPECT_GT(ks, prev);
    prev = ks;
  }
}

TEST(KsDistance, InfiniteValuesAndErrors) {
  const std::vector<double> none;
  EXPECT_EQ(ks_distance(none, 4, [](double) { return 0.5; }), 1.0);
  const std::vector<double> half{0.1, 0.2};
  // Two of four values are +inf: the ECDF never exceeds 1/2 while the cdf tends to 1.
  EXPECT_NEAR(ks_distance(half, 4, [](double y) { return 1.0 - std::exp(-y); }), 0.5, 1e-12);
  EXPECT_THROW(ks_distance(none, 0, [](double) { return 0.0; }), ConfigError);
  const std::vector<double> unsorted{0.3, 0.1};
  EXPECT_THROW(ks_distance(unsorted, [](double) { return 0.0; }), ConfigError);
}

TEST(TwoSampleKs, Basics) {
  EXPECT_EQ(two_sample_ks({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(two_sample_ks({1, 2}, {3, 4}), 1.0);
  EXPECT_NEAR(two_sample_ks({1, kInf}, {1, 2}), 0.5, 1e-15);
  EXPECT_THROW(two_sample_ks({}, {1.0}), ConfigError);
}

TEST(RateRegression, SyntheticPowerLaws) {
  const std::vector<double> t{125, 250, 500, 1000};
  std::vector<double> dev;
  for (double x : t) dev.push_back(3.0 / x);
  const RateFit a = rate_regression(t, dev);
  EXPECT_NEAR(a.slope, -1.0, 1e-12);
  EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(a.intercept, std::log(3.0), 1e-12);
  dev.clear();
  for (double x : t) dev.push_back(0.5 * std::pow(x, -2.0 / 2.0));
  EXPECT_NEAR(rate_regression(t, dev).slope, -1.0, 1e-12);
  dev.clear();
  for (double x : t) dev.push_back(std::pow(x, -2.0 / 3.0));
  EXPECT_NEAR(rate_regression(t, dev).slope, -2.0 / 3.0, 1e-12);
}

TEST(RateRegression, DropsNonPositiveDeviations) {
  const std::vector<double> t{1, 2, 4, 8};
  const std::vector<double> dev{1.0, 0.0, 0.25, -1.0};
  const RateFit f = rate_regression(t, dev);
  EXPECT_EQ(f.used, 2u);
  EXPECT_EQ(f.warnings.size(), 2u);
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  const RateFit none = rate_regression(t, std::vector<double>{0.0, 0.0, 0.0, 1.0});
  EXPECT_TRUE(std::isnan(none.slope));
  EXPECT_THROW(rate_regression(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ConfigError);
}

TEST(Threads, ResolveUsesEnvironment) {
  EXPECT_EQ(resolve_threads(3), 3u);
  ::setenv(kThreadsEnv, "5", 1);
  EXPECT_EQ(resolve_threads(0), 5u);
  EXPECT_EQ(resolve_threads(2), 2u);
  ::setenv(kThreadsEnv, "zero", 1);
  EXPECT_THROW(resolve_threads(0), ConfigError);
  ::unsetenv(kThreadsEnv);
  EXPECT_GE(resolve_threads(0), 1u);
}

TEST(Threads, ParallelForVisitsEachIndexOnce) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
  EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                 if (i == 57) throw RuntimeError("boom");
               }),
               RuntimeError);
}

TEST(RunExperiment, ValidatesPlan) {
  ExperimentPlan plan = voronoi_plan();
  plan.replications = 0;
  EXPECT_THROW(run_experiment(plan), ConfigError);
  plan = voronoi_plan();
  plan.grid = {200.0, 100.0};
  EXPECT_THROW(run_experiment(plan), ConfigError);
  plan = voronoi_plan();
  plan.m_list = {0};
  EXPECT_THROW(run_experiment(plan), ConfigError);
  plan = voronoi_plan();
  plan.grid.clear();
  EXPECT_THROW(run_experiment(plan), ConfigError);
}

TEST(RunExperiment, ReportShapeAndInvariants) {
  const ExperimentReport rep = run_experiment(voronoi_plan());
  EXPECT_EQ(rep.gamma, 1.0);
  EXPECT_NEAR(rep.limit.beta, 2.0 * kPi, 1e-14);
  ASSERT_EQ(rep.tables.size(), 6u);
  for (const OrderTable& tab : rep.tables) {
    EXPECT_GE(tab.ks, 0.0);
    EXPECT_LE(tab.ks, 1.0);
    EXPECT_EQ(tab.sample.size(), tab.finite);
    EXPECT_EQ(tab.finite + tab.infinite, 300u);
    EXPECT_EQ(tab.empirical_survival.size(), 4u);
    EXPECT_TRUE(std::is_sorted(tab.sample.begin(), tab.sample.end()));
  }
  EXPECT_EQ(rep.deviations.size(), 3u);
  ASSERT_TRUE(rep.rate.has_value());
  EXPECT_EQ(&rep.table(1, 2), &rep.tables[3]);
  EXPECT_THROW(rep.table(0, 3), ConfigError);
}

TEST(RunExperiment, SingleReplication) {
  ExperimentPlan plan = voronoi_plan();
  plan.replications = 1;
  const ExperimentReport rep = run_experiment(plan);
  for (const OrderTable& tab : rep.tables) EXPECT_EQ(tab.finite + tab.infinite, 1u);
  for (const OrderTable& tab : rep.tables) EXPECT_EQ(tab.sample.size(), 1u);
}

TEST(RunExperiment, BitIdenticalAcrossThreadBudgets) {
  ExperimentPlan plan = voronoi_plan();
  plan.estimate_bounds = true;
  plan.bound_y = {0.5};
  plan.bound_policy.outer_samples = 2000;
  plan.bound_policy.min_samples = 20'000;
  plan.threads = 1;
  const ExperimentReport one = run_experiment(plan);
  for (unsigned th : {2u, 4u, 8u}) {
    plan.threads = th;
    const ExperimentReport other = run_experiment(plan);
    EXPECT_TRUE(same_results(one, other)) << "threads=" << th;
    EXPECT_EQ(other.threads_used, th);
  }
  plan.seed += 1;
  EXPECT_FALSE(same_results(one, run_experiment(plan)));
}

TEST(RunExperiment, HigherOrderDominates) {
  ModelSpec spec;
  const Model model(spec, 3);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const ScaledOrderStatistics s = model.replicate(100.0, derive_seed(5, {i}), 3);
    ASSERT_TRUE(std::is_sorted(s.scaled.begin(), s.scaled.end()));
  }
  ExperimentPlan plan = voronoi_plan();
  plan.m_list = {1, 2, 3};
  const ExperimentReport rep = run_experiment(plan);
  for (std::size_t gi = 0; gi < plan.grid.size(); ++gi)
    for (int m = 1; m < 3; ++m)
      for (std::size_t y = 0; y < plan.y_grid.size(); ++y)
        EXPECT_LE(rep.table(gi, m).empirical_survival[y], rep.table(gi, m + 1).empirical_survival[y]);
}

TEST(RunExperiment, BinomialAndPoissonAgree) {
  ExperimentPlan poisson = voronoi_plan();
  poisson.grid = {300.0};
  poisson.replications = 1000;
  poisson.m_list = {1};
  ExperimentPlan binomial = poisson;
  binomial.model.process = ProcessKind::binomial;
  binomial.seed = 18;
  const ExperimentReport a = run_experiment(poisson);
  const ExperimentReport b = run_experiment(binomial);
  EXPECT_LE(two_sample_ks(a.tables[0].sample, b.tables[0].sample), 0.1);
}

TEST(RunExperiment, InfiniteRateFallsWithIntensity) {
  ExperimentPlan plan;
  plan.model.kind = ModelKind::hyperplane_simplices;
  plan.model.body = "centered-square";
  plan.model.beta.samples = 2000;
  const double mass = HyperplaneMeasure(ConvexBody::centered_cube(2), 1.0).total_mass();
  plan.grid = {4.0 / mass, 20.0 / mass};
  plan.replications = 300;
  const ExperimentReport rep = run_experiment(plan);
  EXPECT_GT(rep.tables[0].infinite, rep.tables[1].infinite);
}

TEST(RunExperiment, HyperplaneModelReportsNoRate) {
  ExperimentPlan plan;
  plan.model.kind = ModelKind::hyperplane_simplices;
  plan.model.beta.samples = 500;
  plan.grid = {5.0, 10.0, 20.0};
  plan.y_grid = {0.5, 1.0};
  plan.replications = 20;
  const ExperimentReport rep = run_experiment(plan);
  EXPECT_FALSE(rep.rate.has_value());
  EXPECT_EQ(rep.deviations.size(), 3u);
}
