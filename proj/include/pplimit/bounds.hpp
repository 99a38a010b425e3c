// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimates of the Poisson-approximation bound terms
//   alpha_t(y1, y2) = (1/k!) int 1{t^-g y1 < f <= t^-g y2} d(t mu)^k
//   r_t(y) = max_l int ( int 1{f <= t^-g y} d(t mu)^{k-l} )^2 d(t mu)^l
// and their binomial counterparts with (n)_j in place of (t mu(X))^j.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pplimit/core.hpp"
#include "pplimit/numerics.hpp"
#include "pplimit/rng.hpp"

namespace pplimit {

/// A finite measure mu on a space of elements together with a symmetric
/// functional of k elements. sample() draws from mu / mu(X); value() returns
/// +inf for rejected or degenerate tuples.
template <class M>
concept TupleMeasure = requires(const M& m, Rng& rng, std::span<const typename M::Element> xs) {
  typename M::Element;
  { m.arity() } -> std::convertible_to<std::size_t>;
  { m.total_mass() } -> std::convertible_to<double>;
  { m.sample(rng) } -> std::same_as<typename M::Element>;
  { m.value(xs) } -> std::convertible_to<double>;
};

/// Optional proposal for pair functionals: sample_near(rng, x, v) returns
/// (z, w) with E[w g(z)] = E_{mu/mu(X)}[g] for every g vanishing on
/// {z : f(x, z) > v}.
template <class M>
concept LocalizedTupleMeasure =
    TupleMeasure<M> && requires(const M& m, Rng& rng, const typename M::Element& x, double v) {
      { m.sample_near(rng, x, v) } -> std::same_as<std::pair<typename M::Element, double>>;
    };

/// Poisson intensity t or binomial size n.
struct IntensitySpec {
  ProcessKind process = ProcessKind::poisson;
  double value = 1.0;

  /// (t mu(X))^j or (n)_j.
  double scale(int j, double total_mass) const {
    if (process == ProcessKind::poisson) return std::pow(value * total_mass, j);
    return falling_factorial(value, j);
  }
};

struct BoundPolicy {
  std::size_t min_samples = 100'000;
  std::size_t max_samples = 20'000'000;
  double target_hits = 100.0;
  std::size_t outer_samples = 100'000;  // r: draws of (x_1..x_l)
  std::size_t min_inner = 8;            // r: draws per inner replica
  std::size_t max_inner = 4096;
  std::uint64_t seed = 1;
  bool localize = true;  // use sample_near when the measure provides it

  bool operator==(const BoundPolicy&) const = default;
};

struct BoundEstimate {
  std::string model;
  ProcessKind process = ProcessKind::poisson;
  double parameter = 0.0;  // t or n
  double y1 = 0.0, y2 = 0.0;
  double alpha = 0.0, alpha_se = 0.0;
  double r = 0.0, r_se = 0.0;
  int r_ell = 0;  // maximizing l
  std::size_t alpha_samples = 0, r_samples = 0;
  bool alpha_no_hit = false, r_no_hit = false;
  std::uint64_t seed = 0;

  bool operator==(const BoundEstimate&) const = default;
};

namespace detail {

template <TupleMeasure M>
bool localized(const M& m, const BoundPolicy& p) {
  if constexpr (LocalizedTupleMeasure<M>)
    return p.localize && m.arity() == 2;
  else
    return false;
}

/// One weighted draw of a k-tuple from (mu/mu(X))^k with the first `fixed`
/// entries given. Returns weight * 1{lo < f <= hi}.
template <TupleMeasure M>
double tuple_draw(const M& m, Rng& rng, std::vector<typename M::Element>& xs, std::size_t fixed, double lo, double hi,
                  bool local) {
  double w = 1.0;
  const std::size_t k = m.arity();
  if constexpr (LocalizedTupleMeasure<M>) {
    if (local) {
      if (fixed == 0) xs[0] = m.sample(rng);
      auto [z, wz] = m.sample_near(rng, xs[0], hi);
      if (wz == 0.0) return 0.0;
      xs[1] = std::move(z);
      w = wz;
      const double v = m.value(std::span<const typename M::Element>(xs.data(), k));
      return (v > lo && v <= hi) ? w : 0.0;
    }
  }
  for (std::size_t i = fixed; i < k; ++i) xs[i] = m.sample(rng);
  const double v = m.value(std::span<const typename M::Element>(xs.data(), k));
  return (v > lo && v <= hi) ? w : 0.0;
}

}  // namespace detail

/// Raw thresholds t^-gamma y for a rescaled window.
inline double raw_threshold(double y, double gamma, const IntensitySpec& in) {
  if (std::isinf(y)) return y;
  return y * std::pow(in.value, -gamma);
}

/// alpha_t(y1, y2) by Monte Carlo over k i.i.d. draws from mu / mu(X). The
/// sample count is max(min_samples, target_hits / hit rate), capped at
/// max_samples; with no hit the estimate is 0 and alpha_no_hit is set.
template <TupleMeasure M>
BoundEstimate estimate_alpha(const M& m, const IntensitySpec& in, double gamma, double y1, double y2,
                             const BoundPolicy& p) {
  if (!(y1 <= y2)) throw ConfigError("estimate_alpha: need y1 <= y2");
  if (p.min_samples < 2 || p.max_samples < p.min_samples) throw ConfigError("estimate_alpha: bad sample limits");
  BoundEstimate est;
  est.process = in.process;
  est.parameter = in.value;
  est.y1 = y1;
  est.y2 = y2;
  est.seed = p.seed;
  if (y1 == y2) return est;

  const std::size_t k = m.arity();
  const double lo = raw_threshold(y1, gamma, in), hi = raw_threshold(y2, gamma, in);
  const bool local = detail::localized(m, p);
  Rng rng = make_rng(derive_seed(p.seed, {0xa1fa}));
  std::vector<typename M::Element> xs(k);
  RunningStats acc;
  std::size_t hits = 0;
  std::size_t target = p.min_samples;
  while (acc.count() < target) {
    const double v = detail::tuple_draw(m, rng, xs, 0, lo, hi, local);
    if (v != 0.0) ++hits;
    acc.add(v);
    if (acc.count() == target && target < p.max_samples) {
      const double rate = static_cast<double>(hits) / static_cast<double>(acc.count());
      const double want = rate > 0.0 ? std::ceil(p.target_hits / rate) : static_cast<double>(p.max_samples);
      target = static_cast<std::size_t>(std::min<double>(std::max<double>(want, target), p.max_samples));
    }
  }
  const double scale = in.scale(static_cast<int>(k), m.total_mass()) / factorial(static_cast<int>(k));
  est.alpha = scale * acc.mean();
  est.alpha_se = scale * acc.standard_error();
  est.alpha_samples = acc.count();
  est.alpha_no_hit = hits == 0;
  return est;
}

/// r_t(y): for each l in 1..k-1 the inner integral over the remaining k-l
/// elements is estimated twice independently and the two estimates are
/// multiplied, which is unbiased for the square. The maximum over l is kept.
/// r = 0 when k = 1.
template <TupleMeasure M>
BoundEstimate estimate_r(const M& m, const IntensitySpec& in, double gamma, double y, const BoundPolicy& p) {
  if (!(y >= 0.0)) throw ConfigError("estimate_r: y must be >= 0");
  if (p.outer_samples < 2 || p.min_inner < 1 || p.max_inner < p.min_inner)
    throw ConfigError("estimate_r: bad sample limits");
  BoundEstimate est;
  est.process = in.process;
  est.parameter = in.value;
  est.y2 = y;
  est.seed = p.seed;
  const std::size_t k = m.arity();
  if (k < 2) return est;

  const double hi = raw_threshold(y, gamma, in);
  const double lo = -kInf;
  const bool local = detail::localized(m, p);
  std::vector<typename M::Element> xs(k);
  est.r_no_hit = true;

  for (std::size_t ell = 1; ell < k; ++ell) {
    Rng rng = make_rng(derive_seed(p.seed, {0x4e, ell}));
    // Pilot for the inner hit rate.
    std::size_t pilot_hits = 0;
    const std::size_t pilot = std::min<std::size_t>(p.min_samples, 20'000);
    for (std::size_t i = 0; i < pilot; ++i) {
      for (std::size_t j = 0; j < ell; ++j) xs[j] = m.sample(rng);
      if (detail::tuple_draw(m, rng, xs, ell, lo, hi, local) != 0.0) ++pilot_hits;
    }
    const double rate = static_cast<double>(pilot_hits) / static_cast<double>(pilot);
    std::size_t inner = p.max_inner;
    if (rate > 0.0)
      inner = static_cast<std::size_t>(
          std::clamp(std::ceil(4.0 / rate), static_cast<double>(p.min_inner), static_cast<double>(p.max_inner)));

    RunningStats acc;
    bool any = false;
    for (std::size_t o = 0; o < p.outer_samples; ++o) {
      for (std::size_t j = 0; j < ell; ++j) xs[j] = m.sample(rng);
      double rep[2];
      for (double& r : rep) {
        double s = 0.0;
        for (std::size_t i = 0; i < inner; ++i) s += detail::tuple_draw(m, rng, xs, ell, lo, hi, local);
        r = s / static_cast<double>(inner);
      }
      const double prod = rep[0] * rep[1];
      if (prod != 0.0) any = true;
      acc.add(prod);
    }
    const double scale = in.scale(static_cast<int>(2 * k - ell), m.total_mass());
    const double r = scale * acc.mean();
    est.r_samples += acc.count() * 2 * inner;
    if (any) est.r_no_hit = false;
    if (ell == 1 || r > est.r) {
      est.r = r;
      est.r_se = scale * acc.standard_error();
      est.r_ell = static_cast<int>(ell);
    }
  }
  return est;
}

/// |nu - alpha| + r, the bound with its unknown constant set to 1. A shape
/// diagnostic for rate fits only, not a certified bound.
inline double theorem_bound_shape(double alpha, double r, double nu) { return std::abs(nu - alpha) + r; }

/// Binomial form: adds alpha / n.
inline double theorem_bound_shape(double alpha, double r, double nu, double n) {
  if (!(n > 0.0)) throw ConfigError("theorem_bound_shape: n must be positive");
  return std::abs(nu - alpha) + r + alpha / n;
}

}  // namespace pplimit
