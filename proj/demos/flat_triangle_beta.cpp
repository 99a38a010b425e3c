// SPDX-License-Identifier: Apache-2.0
//
// Limit constant of the flattest triangle for uniform and affine densities on
// the unit square, followed by one binomial simulation.

#include <cstdio>

#include "pplimit/pplimit.hpp"

int main() {
  using namespace pplimit;
  for (const char* density : {"uniform", "linear:0.5,0", "linear:0.9,0.9"}) {
    ModelSpec spec;
    spec.kind = ModelKind::flat_triangles;
    spec.density = density;
    spec.beta.samples = 200'000;
    const WeibullLimit lim = Model(spec).limit();
    std::printf("%-16s beta = %.6f +- %.6f\n", density, lim.beta, lim.beta_se);
  }

  ExperimentPlan plan;
  plan.model.kind = ModelKind::flat_triangles;
  plan.model.process = ProcessKind::binomial;
  plan.model.beta.samples = 200'000;
  plan.grid = {60.0};
  plan.replications = 500;
  plan.m_list = {1, 2};
  const ExperimentReport rep = run_experiment(plan);
  for (const OrderTable& t : rep.tables) std::printf("n = %g, m = %d: KS to limit = %.4f\n", t.param, t.m, t.ks);
  return 0;
}
