// SPDX-License-Identifier: Apache-2.0
//
// The four geometric models: configuration, one replication (sample, scan,
// rescale), the limit law and the tuple measure used by the bound estimators.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "pplimit/bounds.hpp"
#include "pplimit/convex_body.hpp"
#include "pplimit/core.hpp"
#include "pplimit/geometry.hpp"
#include "pplimit/limits.hpp"
#include "pplimit/rng.hpp"
#include "pplimit/sampling.hpp"
#include "pplimit/ustat.hpp"

namespace pplimit {

enum class ModelKind { gilbert_voronoi, hyperplane_simplices, flat_triangles, kflat_distance };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::gilbert_voronoi:
      return "gilbert_voronoi";
    case ModelKind::hyperplane_simplices:
      return "hyperplane_simplices";
    case ModelKind::flat_triangles:
      return "flat_triangles";
    case ModelKind::kflat_distance:
      return "kflat_distance";
  }
  return "?";
}

inline ModelKind model_from_string(const std::string& s) {
  if (s == "gilbert_voronoi") return ModelKind::gilbert_voronoi;
  if (s == "hyperplane_simplices") return ModelKind::hyperplane_simplices;
  if (s == "flat_triangles") return ModelKind::flat_triangles;
  if (s == "kflat_distance") return ModelKind::kflat_distance;
  throw ConfigError("unknown model '" + s +
                    "' (expected gilbert_voronoi, hyperplane_simplices, flat_triangles or kflat_distance)");
}

inline const char* to_string(PairStatistic s) { return s == PairStatistic::inradius ? "inradius" : "edge"; }

inline PairStatistic pair_statistic_from_string(const std::string& s) {
  if (s == "inradius") return PairStatistic::inradius;
  if (s == "edge") return PairStatistic::edge;
  throw ConfigError("unknown pair statistic '" + s + "' (expected inradius or edge)");
}

/// Model parameters. Windows, densities and direction laws are given as
/// short strings, see parse_body, parse_density and parse_directions.
struct ModelSpec {
  ModelKind kind = ModelKind::gilbert_voronoi;
  ProcessKind process = ProcessKind::poisson;
  int d = 2;
  int k = 1;       // flat dimension (kflat_distance)
  double r = 1.0;  // distance exponent (hyperplane_simplices)
  double a = 1.0;  // distance power (kflat_distance)
  std::string body = "unit-square";
  std::string density = "uniform";    // flat_triangles
  std::string directions = "haar";    // kflat_distance
  PairStatistic pair_statistic = PairStatistic::inradius;
  double y_max = 0.0;  // kflat_distance censoring level; 0 picks a limit-law quantile
  MonteCarloSettings beta;
  std::size_t max_tuples = 200'000'000;

  bool operator==(const ModelSpec&) const = default;
};

// ---------------------------------------------------------------------------
// String descriptions

namespace detail {

inline std::vector<double> parse_number_list(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse number '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError(what + ": trailing characters in '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline std::pair<std::string, std::string> split_tag(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) return {text, {}};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

}  // namespace detail

/// Window descriptions:
///   unit-square, unit-cube, centered-square, centered-cube, unit-disk, unit-ball,
///   box:x0,x1,..;y0,y1,..      (lower and upper corner)
///   ball:c0,c1,..;radius
///   polygon:x,y;x,y;x,y;...    (d = 2)
inline ConvexBody parse_body(const std::string& text, int d) {
  if (d < 1 || d > kMaxDim) throw ConfigError("dimension d must be between 1 and " + std::to_string(kMaxDim));
  const auto [tag, rest] = detail::split_tag(text);
  auto need_dim = [&](int want) {
    if (d != want) throw ConfigError("body '" + tag + "' is " + std::to_string(want) + "-dimensional but d = " + std::to_string(d));
  };
  if (tag == "unit-square") return need_dim(2), ConvexBody::unit_cube(2);
  if (tag == "centered-square") return need_dim(2), ConvexBody::centered_cube(2);
  if (tag == "unit-disk") return need_dim(2), ConvexBody::ball(Vec::Zero(2), 1.0);
  if (tag == "unit-cube") return ConvexBody::unit_cube(d);
  if (tag == "centered-cube") return ConvexBody::centered_cube(d);
  if (tag == "unit-ball") return ConvexBody::ball(Vec::Zero(d), 1.0);
  if (tag == "box") {
    const auto semi = rest.find(';');
    if (semi == std::string::npos) throw ConfigError("box: expected 'box:lower;upper'");
    const auto lo = detail::parse_number_list(rest.substr(0, semi), ',', "box");
    const auto hi = detail::parse_number_list(rest.substr(semi + 1), ',', "box");
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
      throw ConfigError("box: corners must have d = " + std::to_string(d) + " coordinates");
    return ConvexBody::box(detail::to_vec(lo), detail::to_vec(hi));
  }
  if (tag == "ball") {
    const auto semi = rest.find(';');
    if (semi == std::string::npos) throw ConfigError("ball: expected 'ball:centre;radius'");
    const auto c = detail::parse_number_list(rest.substr(0, semi), ',', "ball");
    const auto r = detail::parse_number_list(rest.substr(semi + 1), ',', "ball");
    if (static_cast<int>(c.size()) != d || r.size() != 1)
      throw ConfigError("ball: centre must have d coordinates and one radius");
    return ConvexBody::ball(detail::to_vec(c), r[0]);
  }
  if (tag == "polygon") {
    need_dim(2);
    std::vector<Eigen::Vector2d> v;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto xy = detail::parse_number_list(item, ',', "polygon");
      if (xy.size() != 2) throw ConfigError("polygon: each vertex needs two coordinates");
      v.emplace_back(xy[0], xy[1]);
    }
    return ConvexBody::polygon(v);
  }
  throw ConfigError("unknown body '" + text + "'");
}

/// "uniform" or "linear:g0,g1,.." (affine density with the given gradient).
inline Density parse_density(const std::string& text, const ConvexBody& body) {
  const auto [tag, rest] = detail::split_tag(text);
  if (tag == "uniform") return Density::uniform(body);
  if (tag == "linear") return Density::linear(body, detail::to_vec(detail::parse_number_list(rest, ',', "density")));
  throw ConfigError("unknown density '" + text + "' (expected uniform or linear:g0,g1,..)");
}

/// "haar" or "axial:axis,strength".
inline DirectionLaw parse_directions(const std::string& text) {
  const auto [tag, rest] = detail::split_tag(text);
  if (tag == "haar") return DirectionLaw::haar();
  if (tag == "axial") {
    const auto v = detail::parse_number_list(rest, ',', "directions");
    if (v.size() != 2 || v[0] != std::floor(v[0])) throw ConfigError("directions: expected axial:axis,strength");
    return DirectionLaw::axial(static_cast<int>(v[0]), v[1]);
  }
  throw ConfigError("unknown direction law '" + text + "' (expected haar or axial:axis,strength)");
}

namespace detail {

inline void check_tuple_cap(std::size_t n, std::size_t k, std::size_t cap) {
  const double tuples = binomial_coefficient(static_cast<int>(std::min<std::size_t>(n, 1u << 30)), static_cast<int>(k));
  if (tuples > static_cast<double>(cap))
    throw RuntimeError("resource cap exceeded: " + std::to_string(n) + " objects give " + std::to_string(tuples) +
                       " tuples, more than max_tuples = " + std::to_string(cap));
}

inline std::size_t count_parameter(double value) {
  if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("binomial n must be a positive integer");
  return static_cast<std::size_t>(value);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gilbert_voronoi

class GilbertVoronoiModel {
 public:
  /// Lebesgue measure on K with f = factor * |x1 - x2|.
  struct Measure {
    using Element = Vec;
    ConvexBody body;
    double factor = 0.5;

    std::size_t arity() const { return 2; }
    double total_mass() const { return body.volume(); }
    Vec sample(Rng& rng) const { return body.sample_uniform(rng); }
    double value(std::span<const Vec> xs) const { return factor * pair_distance(xs[0], xs[1]); }

    /// Uniform proposal on the cube of half-width v / factor around x, which
    /// contains every z with f(x, z) <= v.
    std::pair<Vec, double> sample_near(Rng& rng, const Vec& x, double v) const {
      const double rho = v / factor;
      if (!std::isfinite(rho)) return {sample(rng), 1.0};
      const int d = body.dim();
      Vec z(d);
      for (int i = 0; i < d; ++i) z[i] = x[i] + rho * (2.0 * uniform01(rng) - 1.0);
      if (!body.contains(z)) return {std::move(z), 0.0};
      return {std::move(z), std::pow(2.0 * rho, d) / body.volume()};
    }
  };

  explicit GilbertVoronoiModel(const ModelSpec& spec) : spec_(spec), body_(parse_body(spec.body, spec.d)) {
    if (spec.d < 2) throw ConfigError("gilbert_voronoi model requires d >= 2");
  }

  double gamma() const { return 2.0 / spec_.d; }
  std::size_t arity() const { return 2; }
  double factor() const { return spec_.pair_statistic == PairStatistic::inradius ? 0.5 : 1.0; }
  double total_mass() const { return body_.volume(); }

  WeibullLimit limit() const {
    const WeibullLimit lim = limit_gilbert_voronoi(body_, spec_.pair_statistic);
    return spec_.process == ProcessKind::poisson ? lim : binomial_limit(lim, body_.volume(), 2);
  }

  PointConfiguration sample(double param, std::uint64_t seed) const {
    return spec_.process == ProcessKind::poisson ? sample_poisson_points(body_, param, seed)
                                                 : sample_binomial_points(body_, detail::count_parameter(param), seed);
  }

  ScaledOrderStatistics replicate(double param, std::uint64_t seed, std::size_t m_max) const {
    const PointConfiguration c = sample(param, seed);
    TupleScanResult scan = min_pair_distance_grid(c.points, m_max);
    for (double& v : scan.values) v *= factor();
    return scale_order_statistics(scan, "gilbert_voronoi", gamma(), param, seed);
  }

  Measure measure(double /*param*/, double /*y_max*/) const { return Measure{body_, factor()}; }

 private:
  ModelSpec spec_;
  ConvexBody body_;
};

// ---------------------------------------------------------------------------
// hyperplane_simplices

class HyperplaneSimplexModel {
 public:
  /// Hyperplanes hitting K with f = area of the simplex if it lies in K.
  struct Measure {
    using Element = Hyperplane;
    const HyperplaneMeasure* mu;

    std::size_t arity() const { return static_cast<std::size_t>(mu->dim()) + 1; }
    double total_mass() const { return mu->total_mass(); }
    Hyperplane sample(Rng& rng) const { return mu->sample(rng); }
    double value(std::span<const Hyperplane> hs) const {
      const SimplexResult s = simplex_from_hyperplanes(hs, mu->body());
      return (s.degenerate || !s.contained) ? kInf : s.volume;
    }
  };

  /// The window is translated so that its centroid is the origin.
  explicit HyperplaneSimplexModel(const ModelSpec& spec)
      : spec_(spec), measure_(parse_body(spec.body, spec.d).centered(), spec.r) {}

  double gamma() const { return spec_.d * (spec_.d + 1.0); }
  std::size_t arity() const { return static_cast<std::size_t>(spec_.d) + 1; }
  double total_mass() const { return measure_.total_mass(); }
  const HyperplaneMeasure& hyperplane_measure() const { return measure_; }

  WeibullLimit limit() const {
    const WeibullLimit lim = limit_hyperplane_simplices(measure_, spec_.beta);
    return spec_.process == ProcessKind::poisson ? lim
                                                 : binomial_limit(lim, measure_.total_mass(), spec_.d + 1);
  }

  std::vector<Hyperplane> sample(double param, std::uint64_t seed) const {
    Rng rng = make_rng(seed);
    return spec_.process == ProcessKind::poisson
               ? sample_hyperplane_process(measure_, param, rng)
               : sample_hyperplane_binomial(measure_, detail::count_parameter(param), rng);
  }

  ScaledOrderStatistics replicate(double param, std::uint64_t seed, std::size_t m_max) const {
    const std::vector<Hyperplane> planes = sample(param, seed);
    detail::check_tuple_cap(planes.size(), arity(), spec_.max_tuples);
    const ConvexBody& body = measure_.body();
    std::vector<Hyperplane> subset(arity());
    const auto spec = make_functional(
        arity(),
        [&](std::span<const std::size_t> idx, double) {
          for (std::size_t i = 0; i < idx.size(); ++i) subset[i] = planes[idx[i]];
          const SimplexResult s = simplex_from_hyperplanes(subset, body);
          if (s.degenerate) return Evaluation::degenerate();
          if (!s.contained) return Evaluation::reject();
          return Evaluation::accept(s.volume);
        },
        "hyperplane_simplices");
    return scale_order_statistics(scan_tuples(planes.size(), spec, m_max), "hyperplane_simplices", gamma(), param,
                                  seed);
  }

  Measure measure(double /*param*/, double /*y_max*/) const { return Measure{&measure_}; }

 private:
  ModelSpec spec_;
  HyperplaneMeasure measure_;
};

// ---------------------------------------------------------------------------
// flat_triangles

class FlatTriangleModel {
 public:
  /// Probability measure phi dx on K with f = pi - largest angle.
  struct Measure {
    using Element = Vec;
    const ConvexBody* body;
    const Density* phi;

    std::size_t arity() const { return 3; }
    double total_mass() const { return 1.0; }
    Vec sample(Rng& rng) const { return sample_from_density(*body, *phi, rng); }
    double value(std::span<const Vec> xs) const {
      try {
        return triangle_flatness(xs[0], xs[1], xs[2]);
      } catch (const GeometryError&) {
        return kInf;
      }
    }
  };

  explicit FlatTriangleModel(const ModelSpec& spec)
      : spec_(spec), body_(parse_body(spec.body, spec.d)), phi_(parse_density(spec.density, body_)) {
    if (spec.d != 2) throw ConfigError("flat_triangles model is planar (d = 2)");
  }

  double gamma() const { return 3.0; }
  std::size_t arity() const { return 3; }
  double total_mass() const { return 1.0; }

  WeibullLimit limit() const { return limit_flat_triangles(body_, phi_, spec_.beta); }

  PointConfiguration sample(double param, std::uint64_t seed) const {
    return spec_.process == ProcessKind::poisson
               ? sample_poisson_points(body_, phi_, param, seed)
               : sample_binomial_points(body_, detail::count_parameter(param), phi_, seed);
  }

  ScaledOrderStatistics replicate(double param, std::uint64_t seed, std::size_t m_max) const {
    const PointConfiguration c = sample(param, seed);
    detail::check_tuple_cap(c.size(), 3, spec_.max_tuples);
    const Mat& pts = c.points;
    const auto spec = make_functional(
        3,
        [&pts](std::span<const std::size_t> idx, double cutoff) {
          try {
            const double v = triangle_flatness_bounded(pts.col(static_cast<Eigen::Index>(idx[0])),
                                                       pts.col(static_cast<Eigen::Index>(idx[1])),
                                                       pts.col(static_cast<Eigen::Index>(idx[2])), cutoff);
            return std::isinf(v) ? Evaluation::reject() : Evaluation::accept(v);
          } catch (const GeometryError&) {
            return Evaluation::degenerate();
          }
        },
        "flat_triangles");
    return scale_order_statistics(scan_tuples(c.size(), spec, m_max), "flat_triangles", gamma(), param, seed);
  }

  Measure measure(double /*param*/, double /*y_max*/) const { return Measure{&body_, &phi_}; }

 private:
  ModelSpec spec_;
  ConvexBody body_;
  Density phi_;
};

// ---------------------------------------------------------------------------
// kflat_distance

class KFlatModel {
 public:
  /// Flats meeting the ball B(centroid, rho) with f = d(E, F)^a when the
  /// midpoint lies in K.
  struct Measure {
    using Element = AffineFlat;
    KFlatWindowMeasure mu;
    const ConvexBody* body;
    double a = 1.0;

    std::size_t arity() const { return 2; }
    double total_mass() const { return mu.total_mass(); }
    AffineFlat sample(Rng& rng) const { return mu.sample(rng); }
    double value(std::span<const AffineFlat> fs) const {
      const FlatDistanceResult r = flat_distance(fs[0], fs[1]);
      if (r.degenerate || !body->contains(r.midpoint)) return kInf;
      return std::pow(r.distance, a);
    }
  };

  KFlatModel(const ModelSpec& spec, std::size_t m_max)
      : spec_(spec), body_(parse_body(spec.body, spec.d)), law_(parse_directions(spec.directions)) {
    if (spec.k < 1 || 2 * spec.k >= spec.d) throw ConfigError("non-intersecting regime requires 2k < d");
    if (!(spec.a > 0.0)) throw ConfigError("k-flat distance power a must be positive");
    if (spec.process != ProcessKind::poisson)
      throw ConfigError("kflat_distance has an infinite intensity measure; only the poisson process is defined");
    law_.validate(spec.d, spec.k);
    limit_ = limit_kflats(spec.d, spec.k, spec.a, body_, law_, spec.beta);
    y_max_ = spec.y_max > 0.0 ? spec.y_max : default_y_max(limit_, std::max<std::size_t>(m_max, 1));
  }

  /// The point where the order-m limit survival drops to 1e-9.
  static double default_y_max(const WeibullLimit& lim, std::size_t m) {
    double hi = 1.0;
    while (weibull_survival(lim, hi, static_cast<int>(m)) > 1e-9) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (weibull_survival(lim, mid, static_cast<int>(m)) > 1e-9 ? lo : hi) = mid;
    }
    return hi;
  }

  double gamma() const { return 2.0 * spec_.a / (spec_.d - 2 * spec_.k); }
  std::size_t arity() const { return 2; }
  double y_max() const { return y_max_; }
  WeibullLimit limit() const { return limit_; }

  /// Largest distance that can be reported at intensity t.
  double delta_max(double t, double y) const { return std::pow(y * std::pow(t, -gamma()), 1.0 / spec_.a); }
  double window_radius(double t, double y) const { return body_.circumradius() + delta_max(t, y); }
  double total_mass(double t) const { return window(t, y_max_).total_mass(); }

  KFlatWindowMeasure window(double t, double y) const {
    return KFlatWindowMeasure(spec_.d, spec_.k, window_radius(t, y), law_, body_.centroid());
  }

  /// Values above y_max (rescaled) are censored and reported as +inf.
  /// Flats of the process at intensity t meeting the censoring window.
  std::vector<AffineFlat> sample(double t, std::uint64_t seed) const {
    Rng rng = make_rng(seed);
    return sample_kflat_process(window(t, y_max_), t, rng);
  }

  ScaledOrderStatistics replicate(double t, std::uint64_t seed, std::size_t m_max) const {
    const std::vector<AffineFlat> flats = sample(t, seed);
    detail::check_tuple_cap(flats.size(), 2, spec_.max_tuples);
    const Vec& c = body_.centroid();
    const double rk = body_.circumradius();
    const double vmax = y_max_ * std::pow(t, -gamma());
    std::vector<Vec> foot(flats.size());
    std::vector<double> foot_dist(flats.size());
    for (std::size_t i = 0; i < flats.size(); ++i) {
      const AffineFlat& f = flats[i];
      foot[i] = f.base + f.basis * (f.basis.transpose() * (c - f.base));
      foot_dist[i] = (foot[i] - c).norm();
    }
    const double a = spec_.a;
    const auto spec = make_functional(
        2,
        [&](std::span<const std::size_t> idx, double cutoff) {
          const double vcut = std::min(cutoff, vmax);
          const double dcut = std::pow(vcut, 1.0 / a) * (1.0 + 1e-9);
          const double ball = rk + 0.5 * dcut;
          const double ri = ball * ball - foot_dist[idx[0]] * foot_dist[idx[0]];
          const double rj = ball * ball - foot_dist[idx[1]] * foot_dist[idx[1]];
          if (ri < 0.0 || rj < 0.0) return Evaluation::reject();
          if ((foot[idx[0]] - foot[idx[1]]).norm() > dcut + std::sqrt(ri) + std::sqrt(rj)) return Evaluation::reject();
          const FlatDistanceResult r = flat_distance(flats[idx[0]], flats[idx[1]]);
          if (r.degenerate) return Evaluation::degenerate();
          if (!body_.contains(r.midpoint)) return Evaluation::reject();
          const double v = std::pow(r.distance, a);
          return v > vmax ? Evaluation::reject() : Evaluation::accept(v);
        },
        "kflat_distance");
    return scale_order_statistics(scan_tuples(flats.size(), spec, m_max), "kflat_distance", gamma(), t, seed);
  }

  /// Window large enough for thresholds up to max(y, y_max).
  Measure measure(double t, double y) const { return Measure{window(t, std::max(y, y_max_)), &body_, spec_.a}; }

 private:
  ModelSpec spec_;
  ConvexBody body_;
  DirectionLaw law_;
  WeibullLimit limit_;
  double y_max_ = 0.0;
};

// ---------------------------------------------------------------------------

/// One sampled configuration: points, hyperplanes or flats depending on the model.
struct SampledConfiguration {
  ModelKind kind = ModelKind::gilbert_voronoi;
  ProcessKind process = ProcessKind::poisson;
  double parameter = 0.0;
  std::uint64_t seed = 0;
  Mat points;  // one column per point
  std::vector<Hyperplane> hyperplanes;
  std::vector<AffineFlat> flats;

  std::size_t size() const {
    return static_cast<std::size_t>(points.cols()) + hyperplanes.size() + flats.size();
  }
};

/// Type-erased model.
class Model {
 public:
  Model(const ModelSpec& spec, std::size_t m_max = 1) : spec_(spec), impl_(make(spec, m_max)) {}

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  std::string tag() const { return to_string(spec_.kind); }

  double gamma() const {
    return std::visit([](const auto& m) { return m.gamma(); }, impl_);
  }
  std::size_t arity() const {
    return std::visit([](const auto& m) { return m.arity(); }, impl_);
  }
  WeibullLimit limit() const {
    return std::visit([](const auto& m) { return m.limit(); }, impl_);
  }

  /// One replication at intensity t (Poisson) or size n (binomial).
  ScaledOrderStatistics replicate(double param, std::uint64_t seed, std::size_t m_max) const {
    if (!(param > 0.0)) throw ConfigError("intensity / size parameter must be positive");
    return std::visit([&](const auto& m) { return m.replicate(param, seed, m_max); }, impl_);
  }

  /// The configuration used by replicate(param, seed, .).
  SampledConfiguration sample(double param, std::uint64_t seed) const {
    if (!(param > 0.0)) throw ConfigError("intensity / size parameter must be positive");
    SampledConfiguration c;
    c.kind = spec_.kind;
    c.process = spec_.process;
    c.parameter = param;
    c.seed = seed;
    std::visit(
        [&](const auto& m) {
          auto s = m.sample(param, seed);
          if constexpr (std::is_same_v<decltype(s), PointConfiguration>)
            c.points = std::move(s.points);
          else if constexpr (std::is_same_v<decltype(s), std::vector<Hyperplane>>)
            c.hyperplanes = std::move(s);
          else
            c.flats = std::move(s);
        },
        impl_);
    return c;
  }

  BoundEstimate alpha(double param, double y1, double y2, const BoundPolicy& p) const {
    BoundEstimate e = std::visit(
        [&](const auto& m) {
          return estimate_alpha(m.measure(param, y2), intensity(param), m.gamma(), y1, y2, p);
        },
        impl_);
    e.model = tag();
    return e;
  }

  BoundEstimate r(double param, double y, const BoundPolicy& p) const {
    BoundEstimate e = std::visit(
        [&](const auto& m) { return estimate_r(m.measure(param, y), intensity(param), m.gamma(), y, p); }, impl_);
    e.model = tag();
    return e;
  }

  BoundEstimate bounds(double param, double y, const BoundPolicy& p) const {
    BoundEstimate e = alpha(param, 0.0, y, p);
    const BoundEstimate er = r(param, y, p);
    e.r = er.r;
    e.r_se = er.r_se;
    e.r_ell = er.r_ell;
    e.r_samples = er.r_samples;
    e.r_no_hit = er.r_no_hit;
    return e;
  }

  IntensitySpec intensity(double param) const { return {spec_.process, param}; }

 private:
  using Impl = std::variant<GilbertVoronoiModel, HyperplaneSimplexModel, FlatTriangleModel, KFlatModel>;

  static Impl make(const ModelSpec& spec, std::size_t m_max) {
    if (spec.d < 1 || spec.d > kMaxDim) throw ConfigError("dimension d must be between 1 and " + std::to_string(kMaxDim));
    if (spec.max_tuples < 1) throw ConfigError("max_tuples must be positive");
    switch (spec.kind) {
      case ModelKind::gilbert_voronoi:
        return GilbertVoronoiModel(spec);
      case ModelKind::hyperplane_simplices:
        return HyperplaneSimplexModel(spec);
      case ModelKind::flat_triangles:
        return FlatTriangleModel(spec);
      case ModelKind::kflat_distance:
        return KFlatModel(spec, m_max);
    }
    throw ConfigError("unknown model");
  }

  ModelSpec spec_;
  Impl impl_;
};

}  // namespace pplimit
