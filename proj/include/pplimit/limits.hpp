// SPDX-License-Identifier: Apache-2.0
//
// Weibull limit laws of the rescaled order statistics: scaling exponent gamma,
// shape tau and the constant beta for each geometric model.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pplimit/convex_body.hpp"
#include "pplimit/core.hpp"
#include "pplimit/geometry.hpp"
#include "pplimit/numerics.hpp"
#include "pplimit/rng.hpp"
#include "pplimit/sampling.hpp"

namespace pplimit {

enum class Provenance { closed_form, quadrature, monte_carlo };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::closed_form:
      return "closed-form";
    case Provenance::quadrature:
      return "quadrature";
    case Provenance::monte_carlo:
      return "monte-carlo";
  }
  return "?";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "closed-form") return Provenance::closed_form;
  if (s == "quadrature") return Provenance::quadrature;
  if (s == "monte-carlo") return Provenance::monte_carlo;
  throw ConfigError("unknown provenance '" + s + "'");
}

/// Limit of t^gamma xi_t: a Poisson process on R_+ with intensity
/// beta tau u^{tau-1} du, so that P(t^gamma M^(m) > y) -> survival(y, m).
struct WeibullLimit {
  double beta = 1.0;
  double tau = 1.0;
  double gamma = 1.0;
  double beta_se = 0.0;
  Provenance provenance = Provenance::closed_form;
  std::size_t samples = 0;   // Monte Carlo samples behind beta, if any
  std::size_t excluded = 0;  // degenerate samples skipped

  bool operator==(const WeibullLimit&) const = default;
};

/// exp(-L) sum_{i<m} L^i / i! with L = beta y^tau. Terms are accumulated as a
/// running product in log space, so neither i! nor exp(-L) over/underflows.
inline double weibull_survival(double beta, double tau, double y, int m) {
  if (m < 1) throw ConfigError("weibull_survival: order m must be >= 1");
  if (y < 0.0) throw ConfigError("weibull_survival: y must be >= 0");
  if (y == 0.0) return 1.0;
  if (std::isinf(y)) return 0.0;
  const double lambda = beta * std::pow(y, tau);
  if (lambda == 0.0) return 1.0;
  if (m == 1) return std::exp(-lambda);
  const double log_lambda = std::log(lambda);
  double log_term = -lambda;
  double sum = std::exp(log_term);
  for (int i = 1; i < m; ++i) {
    log_term += log_lambda - std::log(static_cast<double>(i));
    sum += std::exp(log_term);
  }
  return std::min(sum, 1.0);
}

inline double weibull_survival(const WeibullLimit& lim, double y, int m) {
  return weibull_survival(lim.beta, lim.tau, y, m);
}

/// Which pair statistic the Gilbert/Voronoi model reports.
enum class PairStatistic {
  inradius,  // half the distance: minimal nucleus-centred Voronoi inradius
  edge,      // the distance itself: shortest Gilbert-graph edge
};

/// Pair statistic of a Poisson process with intensity t on K, scaled by t^{2/d}.
inline WeibullLimit limit_gilbert_voronoi(const ConvexBody& body, PairStatistic stat = PairStatistic::inradius) {
  const int d = body.dim();
  if (d < 2) throw ConfigError("gilbert_voronoi model requires d >= 2");
  WeibullLimit lim;
  lim.tau = d;
  lim.gamma = 2.0 / d;
  lim.provenance = Provenance::closed_form;
  if (stat == PairStatistic::inradius)
    lim.beta = std::pow(2.0, d - 1) * unit_ball_volume(d) * body.volume();
  else
    lim.beta = 0.5 * unit_ball_volume(d) * body.volume();
  return lim;
}

struct MonteCarloSettings {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int gauss_order = 32;

  bool operator==(const MonteCarloSettings&) const = default;
};

struct MonteCarloValue {
  double mean = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
};

/// Double integral of [L, M] under Haar x Haar on G(d, k), in closed form:
/// C(d-k, k) kappa_{d-k}^2 / (C(d, k) kappa_d kappa_{d-2k}).
inline double haar_bracket_mean(int d, int k) {
  if (k < 1 || 2 * k >= d) throw ConfigError("non-intersecting regime requires 2k < d");
  const double num = binomial_coefficient(d - k, k) * std::pow(unit_ball_volume(d - k), 2);
  const double den = binomial_coefficient(d, k) * unit_ball_volume(d) * unit_ball_volume(d - 2 * k);
  return num / den;
}

/// Monte Carlo estimate of E[L, M] for L, M independent with the given law.
inline MonteCarloValue estimate_bracket_mean(int d, int k, const DirectionLaw& law, const MonteCarloSettings& s) {
  if (k < 1 || 2 * k >= d) throw ConfigError("non-intersecting regime requires 2k < d");
  if (s.samples < 2) throw ConfigError("estimate_bracket_mean: need at least 2 samples");
  law.validate(d, k);
  Rng rng = make_rng(s.seed);
  RunningStats acc;
  for (std::size_t i = 0; i < s.samples; ++i) {
    const Mat l = law.sample(rng, d, k);
    const Mat m = law.sample(rng, d, k);
    acc.add(subspace_bracket(l, m));
  }
  return {acc.mean(), acc.standard_error(), acc.count(), 0};
}

/// Distance-power functional d(E, F)^a of non-intersecting k-flats with
/// midpoint in K; tau = (d-2k)/a, gamma = 2a/(d-2k),
/// beta = (vol(K)/2) kappa_{d-2k} E[L, M].
inline WeibullLimit limit_kflats(int d, int k, double a, const ConvexBody& body, const DirectionLaw& law,
                                 const MonteCarloSettings& s = {}) {
  if (k < 1 || 2 * k >= d) throw ConfigError("non-intersecting regime requires 2k < d");
  if (!(a > 0.0)) throw ConfigError("k-flat distance power a must be positive");
  if (body.dim() != d) throw ConfigError("window dimension does not match d");
  WeibullLimit lim;
  lim.tau = (d - 2 * k) / a;
  lim.gamma = 2.0 * a / (d - 2 * k);
  const double prefactor = 0.5 * body.volume() * unit_ball_volume(d - 2 * k);
  if (law.kind() == DirectionLaw::Kind::haar) {
    lim.beta = prefactor * haar_bracket_mean(d, k);
    lim.provenance = Provenance::closed_form;
  } else {
    const MonteCarloValue mc = estimate_bracket_mean(d, k, law, s);
    lim.beta = prefactor * mc.mean;
    lim.beta_se = prefactor * mc.se;
    lim.samples = mc.samples;
    lim.provenance = Provenance::monte_carlo;
  }
  return lim;
}

/// Flatness pi - (largest angle) of triangles from a planar process with
/// probability density phi on K; tau = 1, gamma = 3 and
/// beta = int int int_0^1 s(1-s) phi(s x1 + (1-s) x2) |x1 - x2|^2 ds mu(dx1) mu(dx2),
/// by Monte Carlo over (x1, x2) and a Gauss rule in s.
inline WeibullLimit limit_flat_triangles(const ConvexBody& body, const Density& phi, const MonteCarloSettings& s = {}) {
  if (body.dim() != 2) throw ConfigError("flat_triangles model is planar (d = 2)");
  if (s.samples < 2) throw ConfigError("limit_flat_triangles: need at least 2 samples");
  const QuadratureRule rule = gauss_legendre(s.gauss_order, 0.0, 1.0);
  Rng rng = make_rng(s.seed);
  RunningStats acc;
  Vec x1(2), x2(2), mid(2);
  for (std::size_t i = 0; i < s.samples; ++i) {
    x1 = sample_from_density(body, phi, rng);
    x2 = sample_from_density(body, phi, rng);
    const double dist2 = (x1 - x2).squaredNorm();
    double inner = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double sq = rule.nodes[q];
      mid = sq * x1 + (1.0 - sq) * x2;
      const double f = phi(mid);
      if (!std::isfinite(f)) throw RuntimeError("limit_flat_triangles: non-finite density value");
      inner += rule.weights[q] * sq * (1.0 - sq) * f;
    }
    acc.add(inner * dist2);
  }
  WeibullLimit lim;
  lim.tau = 1.0;
  lim.gamma = 3.0;
  lim.beta = acc.mean();
  lim.beta_se = acc.standard_error();
  lim.samples = acc.count();
  lim.provenance = Provenance::monte_carlo;
  return lim;
}

/// Smallest simplex (contained in K) of a hyperplane process with distance
/// exponent r; tau = 1/d, gamma = d(d+1) and
///   beta = 1/(d+1)! int_{H^d} int_{S^{d-1}} 1{z in K} |u.z|^{r-1}
///          vol([H_1..H_d, z + H_{1,u}])^{-1/d} du mu^d(dH),
/// z = H_1 cap ... cap H_d, estimated by Monte Carlo with H_i ~ mu / mu(H).
/// Only d = 2 is supported.
inline WeibullLimit limit_hyperplane_simplices(const HyperplaneMeasure& measure, const MonteCarloSettings& s = {}) {
  const int d = measure.dim();
  if (d != 2) throw ConfigError("hyperplane_simplices limit constant is only supported for d = 2");
  if (s.samples < 2) throw ConfigError("limit_hyperplane_simplices: need at least 2 samples");
  const ConvexBody& body = measure.body();
  const double r = measure.r();
  Rng rng = make_rng(s.seed);
  RunningStats acc;
  std::size_t excluded = 0;
  std::vector<Hyperplane> planes(d + 1);
  SmallMat a(d, d);
  SmallVec rhs(d);
  for (std::size_t i = 0; i < s.samples; ++i) {
    for (int j = 0; j < d; ++j) {
      planes[j] = measure.sample(rng);
      a.row(j) = planes[j].normal.transpose();
      rhs[j] = planes[j].offset;
    }
    const Vec u = uniform_on_sphere(rng, d);
    Eigen::JacobiSVD<SmallMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[d - 1] > 0.0) || sv[0] / sv[d - 1] > kMaxConditionNumber) {
      ++excluded;
      continue;
    }
    const Vec z = svd.solve(rhs);
    if (!body.contains(z)) {
      acc.add(0.0);
      continue;
    }
    planes[d] = Hyperplane::make(u, 1.0 + u.dot(z));
    const SimplexResult simplex = simplex_from_hyperplanes(planes, body);
    if (simplex.degenerate || !(simplex.volume > 0.0)) {
      ++excluded;
      continue;
    }
    const double weight = std::pow(std::abs(u.dot(z)), r - 1.0);
    acc.add(weight * std::pow(simplex.volume, -1.0 / d));
  }
  const double prefactor = std::pow(measure.total_mass(), d) / factorial(d + 1);
  WeibullLimit lim;
  lim.tau = 1.0 / d;
  lim.gamma = d * (d + 1.0);
  lim.beta = prefactor * acc.mean();
  lim.beta_se = prefactor * acc.standard_error();
  lim.samples = acc.count();
  lim.excluded = excluded;
  lim.provenance = Provenance::monte_carlo;
  return lim;
}

/// Limit constant for the binomial process with n points drawn from mu / mu(X):
/// beta computed for the normalised measure, i.e. beta / mu(X)^k.
inline WeibullLimit binomial_limit(WeibullLimit poisson_limit, double total_mass, int arity) {
  const double f = std::pow(total_mass, arity);
  poisson_limit.beta /= f;
  poisson_limit.beta_se /= f;
  return poisson_limit;
}

}  // namespace pplimit
