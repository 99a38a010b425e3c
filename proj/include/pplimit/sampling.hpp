// SPDX-License-Identifier: Apache-2.0
//
// Samplers for the underlying random inputs: Poisson and binomial point sets
// in a window, hyperplane processes with distance exponent r, and
// translation-invariant k-flat processes restricted to a ball.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pplimit/convex_body.hpp"
#include "pplimit/core.hpp"
#include "pplimit/numerics.hpp"
#include "pplimit/rng.hpp"

namespace pplimit {

namespace detail {

// Rejection loops give up once this many proposals have been made with an
// acceptance rate below kMinAcceptance.
inline constexpr std::size_t kRejectionProbe = 10'000'000;
inline constexpr double kMinAcceptance = 1e-6;

inline void check_rejection_efficiency(std::size_t trials, std::size_t accepted, const char* what) {
  if (trials >= kRejectionProbe && static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(trials)) {
    throw RuntimeError(std::string(what) + ": rejection efficiency below 1e-6 after " + std::to_string(trials) +
                       " proposals; the density sup bound is far too loose");
  }
}

}  // namespace detail

template <class D>
concept BoundedDensity = requires(const D& f, const Vec& x) {
  { f(x) } -> std::convertible_to<double>;
  { f.sup() } -> std::convertible_to<double>;
};

/// A finite density with an explicit sup bound, for callers that do not use Density.
struct WeightFunction {
  std::function<double(VecRef)> weight;
  double bound = 1.0;
  double operator()(VecRef x) const { return weight(x); }
  double sup() const { return bound; }
};

struct PointConfiguration {
  Mat points;  // one column per point
  int dim = 0;
  ProcessKind process = ProcessKind::poisson;
  double parameter = 0.0;  // t for Poisson, n for binomial
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  auto point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }
};

/// Draws one point with law proportional to f on K by rejection from the uniform law.
template <BoundedDensity D>
Vec sample_from_density(const ConvexBody& body, const D& f, Rng& rng) {
  const double bound = f.sup();
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("density sup bound must be positive and finite");
  std::size_t trials = 0;
  for (;;) {
    Vec x = body.sample_uniform(rng);
    ++trials;
    const double w = f(x);
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("density evaluated to a negative or non-finite value");
    if (w > bound * (1.0 + 1e-12)) throw ConfigError("density exceeds its declared sup bound");
    if (uniform01(rng) * bound < w) return x;
    detail::check_rejection_efficiency(trials, 0, "sample_from_density");
  }
}

inline void fill_uniform_points(const ConvexBody& body, std::size_t n, Rng& rng, Mat& out) {
  out.resize(body.dim(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) body.sample_uniform_into(rng, out.col(static_cast<Eigen::Index>(i)).data());
#ifdef PPLIMIT_CHECK_INVARIANTS
  for (Eigen::Index i = 0; i < out.cols(); ++i)
    if (!body.contains(out.col(i), 1e-12)) throw RuntimeError("sampled point outside the window");
#endif
}

template <BoundedDensity D>
void fill_density_points(const ConvexBody& body, const D& f, std::size_t n, Rng& rng, Mat& out) {
  const double bound = f.sup();
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("density sup bound must be positive and finite");
  out.resize(body.dim(), static_cast<Eigen::Index>(n));
  std::size_t trials = 0, accepted = 0;
  Vec x(body.dim());
  while (accepted < n) {
    x = body.sample_uniform(rng);
    ++trials;
    const double w = f(x);
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("density evaluated to a negative or non-finite value");
    if (uniform01(rng) * bound < w) out.col(static_cast<Eigen::Index>(accepted++)) = x;
    detail::check_rejection_efficiency(trials, accepted, "sample_binomial_points");
  }
}

/// Poisson process with intensity t * Lebesgue restricted to K.
inline PointConfiguration sample_poisson_points(const ConvexBody& body, double t, std::uint64_t seed) {
  if (!(t > 0.0)) throw ConfigError("sample_poisson_points: intensity t must be positive");
  Rng rng = make_rng(seed);
  PointConfiguration c{Mat(), body.dim(), ProcessKind::poisson, t, seed};
  fill_uniform_points(body, poisson_count(rng, t * body.volume()), rng, c.points);
  return c;
}

/// Poisson process with intensity t * mu, where mu has probability density f on K.
template <BoundedDensity D>
PointConfiguration sample_poisson_points(const ConvexBody& body, const D& f, double t, std::uint64_t seed) {
  if (!(t > 0.0)) throw ConfigError("sample_poisson_points: intensity t must be positive");
  Rng rng = make_rng(seed);
  PointConfiguration c{Mat(), body.dim(), ProcessKind::poisson, t, seed};
  fill_density_points(body, f, poisson_count(rng, t), rng, c.points);
  return c;
}

/// n i.i.d. uniform points in K.
inline PointConfiguration sample_binomial_points(const ConvexBody& body, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_binomial_points: n must be >= 1");
  Rng rng = make_rng(seed);
  PointConfiguration c{Mat(), body.dim(), ProcessKind::binomial, static_cast<double>(n), seed};
  fill_uniform_points(body, n, rng, c.points);
  return c;
}

/// n i.i.d. points with law proportional to f on K (rejection sampling).
template <BoundedDensity D>
PointConfiguration sample_binomial_points(const ConvexBody& body, std::size_t n, const D& f, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_binomial_points: n must be >= 1");
  Rng rng = make_rng(seed);
  PointConfiguration c{Mat(), body.dim(), ProcessKind::binomial, static_cast<double>(n), seed};
  fill_density_points(body, f, n, rng, c.points);
  return c;
}

// ---------------------------------------------------------------------------
// Hyperplanes

/// The hyperplane {x : <normal, x> = offset} with |normal| = 1 and offset >= 0.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;

  static Hyperplane make(Vec u, double p) {
    const double n = u.norm();
    if (!(n > 0.0)) throw GeometryError("hyperplane normal must be non-zero");
    u /= n;
    p /= n;
    if (p < 0.0) {
      u = -u;
      p = -p;
    }
    return Hyperplane{std::move(u), p};
  }

  int dim() const { return static_cast<int>(normal.size()); }
  double signed_distance(VecRef x) const { return normal.dot(x) - offset; }

  void check_invariants() const {
    if (std::abs(normal.norm() - 1.0) > 1e-12) throw GeometryError("hyperplane normal is not a unit vector");
    if (offset < 0.0) throw GeometryError("hyperplane offset is negative");
  }
};

/// The finite measure on hyperplanes hitting K,
///   mu(g) = int_{S^{d-1}} int_0^{h_K(u)} g(u^perp + p u) p^{r-1} dp du,
/// with du the normalised spherical measure. Requires the origin inside K.
class HyperplaneMeasure {
 public:
  HyperplaneMeasure(ConvexBody body, double r) : body_(std::move(body)), r_(r) {
    if (!(r_ >= 1.0)) throw ConfigError("hyperplane distance exponent r must be >= 1");
    if (!body_.contains_origin_in_interior()) throw ConfigError("window must contain origin");
    const int d = body_.dim();
    if (d < 2 || d > 3) throw ConfigError("hyperplane measure: only d = 2 or d = 3 supported");
    sup_weight_ = std::pow(body_.max_norm(), r_);
    mass_ = integrate_support_power() / r_;
  }

  const ConvexBody& body() const { return body_; }
  double r() const { return r_; }
  int dim() const { return body_.dim(); }
  /// mu(H) = int h_K(u)^r / r du.
  double total_mass() const { return mass_; }

  /// One hyperplane from mu / mu(H).
  Hyperplane sample(Rng& rng) const {
    const int d = body_.dim();
    std::size_t trials = 0;
    for (;;) {
      Vec u = uniform_on_sphere(rng, d);
      const double h = body_.support(u);
      ++trials;
      if (uniform01(rng) * sup_weight_ < std::pow(h, r_)) {
        const double p = h * std::pow(uniform01_open_low(rng), 1.0 / r_);
        Hyperplane plane{std::move(u), p};
#ifdef PPLIMIT_CHECK_INVARIANTS
        plane.check_invariants();
#endif
        return plane;
      }
      detail::check_rejection_efficiency(trials, 0, "HyperplaneMeasure::sample");
    }
  }

 private:
  double integrate_support_power() const {
    const int d = body_.dim();
    if (d == 2) {
      constexpr int n = 1 << 14;
      double s = 0.0;
      Vec u(2);
      for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * kPi * (i + 0.5) / n;
        u << std::cos(phi), std::sin(phi);
        s += std::pow(body_.support(u), r_);
      }
      return s / n;
    }
    // d == 3: Gauss-Legendre in z = cos(theta) on each hemisphere and in the
    // azimuth on each quadrant, so that axis-aligned kinks of h_K fall on
    // panel boundaries.
    std::vector<QuadratureRule> azimuth;
    for (int q = 0; q < 4; ++q) azimuth.push_back(gauss_legendre(64, q * kPi / 2.0, (q + 1) * kPi / 2.0));
    double s = 0.0;
    Vec u(3);
    for (const QuadratureRule& rule : {gauss_legendre(128, -1.0, 0.0), gauss_legendre(128, 0.0, 1.0)}) {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = rule.nodes[i];
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double inner = 0.0;
        for (const QuadratureRule& az : azimuth)
          for (std::size_t j = 0; j < az.nodes.size(); ++j) {
            u << rho * std::cos(az.nodes[j]), rho * std::sin(az.nodes[j]), z;
            inner += az.weights[j] * std::pow(body_.support(u), r_);
          }
        s += rule.weights[i] * inner / (4.0 * kPi);
      }
    }
    return s;
  }

  ConvexBody body_;
  double r_;
  double sup_weight_ = 1.0;
  double mass_ = 0.0;
};

/// Poisson hyperplane process with intensity measure t * mu.
inline std::vector<Hyperplane> sample_hyperplane_process(const HyperplaneMeasure& measure, double t, Rng& rng) {
  if (!(t > 0.0)) throw ConfigError("sample_hyperplane_process: intensity t must be positive");
  const std::size_t n = poisson_count(rng, t * measure.total_mass());
  std::vector<Hyperplane> planes;
  planes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) planes.push_back(measure.sample(rng));
  return planes;
}

inline std::vector<Hyperplane> sample_hyperplane_process(const ConvexBody& body, double r, double t,
                                                         std::uint64_t seed) {
  const HyperplaneMeasure measure(body, r);
  Rng rng = make_rng(seed);
  return sample_hyperplane_process(measure, t, rng);
}

/// n i.i.d. hyperplanes with law mu / mu(H).
inline std::vector<Hyperplane> sample_hyperplane_binomial(const HyperplaneMeasure& measure, std::size_t n,
                                                          Rng& rng) {
  std::vector<Hyperplane> planes;
  planes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) planes.push_back(measure.sample(rng));
  return planes;
}

// ---------------------------------------------------------------------------
// k-flats

/// The affine flat base + span(basis); base is orthogonal to the directions.
struct AffineFlat {
  Mat basis;  // d x k, orthonormal columns
  Vec base;

  int dim() const { return static_cast<int>(base.size()); }
  int flat_dim() const { return static_cast<int>(basis.cols()); }

  void check_invariants() const {
    const Mat gram = basis.transpose() * basis;
    if ((gram - Mat::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff() > 1e-10)
      throw GeometryError("flat basis is not orthonormal");
    if ((basis.transpose() * base).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, base.norm()))
      throw GeometryError("flat base point is not orthogonal to the flat directions");
  }
};

/// Direction distribution on the Grassmannian G(d, k): Haar, or a density with
/// respect to Haar sampled by rejection.
class DirectionLaw {
 public:
  enum class Kind { haar, axial, custom };

  static DirectionLaw haar() { return DirectionLaw(Kind::haar); }

  /// Density 1 + c (|P_L e_axis|^2 - k/d) with respect to Haar; it integrates to 1
  /// and is non-negative when -d/(d-k) <= c <= d/k.
  static DirectionLaw axial(int axis, double strength) {
    DirectionLaw law(Kind::axial);
    law.axis_ = axis;
    law.strength_ = strength;
    return law;
  }

  static DirectionLaw custom(std::function<double(const Mat&)> density, double sup) {
    if (!(sup > 0.0)) throw ConfigError("direction density sup bound must be positive");
    DirectionLaw law(Kind::custom);
    law.custom_ = std::move(density);
    law.custom_sup_ = sup;
    return law;
  }

  Kind kind() const { return kind_; }
  int axis() const { return axis_; }
  double strength() const { return strength_; }

  void validate(int d, int k) const {
    if (kind_ != Kind::axial) return;
    if (axis_ < 0 || axis_ >= d) throw ConfigError("direction law axis out of range");
    const double lo = 1.0 - strength_ * k / d;
    const double hi = 1.0 + strength_ * (1.0 - static_cast<double>(k) / d);
    if (lo < 0.0 || hi < 0.0) throw ConfigError("axial direction density would be negative");
  }

  /// Density with respect to the Haar probability measure.
  double density(const Mat& basis) const {
    switch (kind_) {
      case Kind::haar:
        return 1.0;
      case Kind::axial: {
        const double d = static_cast<double>(basis.rows());
        const double k = static_cast<double>(basis.cols());
        const double proj = basis.row(axis_).squaredNorm();
        return 1.0 + strength_ * (proj - k / d);
      }
      case Kind::custom:
        return custom_(basis);
    }
    return 1.0;
  }

  double sup(int d, int k) const {
    switch (kind_) {
      case Kind::haar:
        return 1.0;
      case Kind::axial:
        return std::max(1.0 - strength_ * k / d, 1.0 + strength_ * (1.0 - static_cast<double>(k) / d));
      case Kind::custom:
        return custom_sup_;
    }
    return 1.0;
  }

  /// A d x d orthogonal matrix whose first k columns span a sample L from the
  /// law and whose remaining columns span L^perp.
  Mat sample_frame(Rng& rng, int d, int k) const {
    const double bound = sup(d, k);
    std::size_t trials = 0;
    for (;;) {
      Mat g(d, d);
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) g(i, j) = standard_normal(rng);
      Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
      ++trials;
      if (kind_ == Kind::haar) return q;
      const double w = density(q.leftCols(k));
      if (w < 0.0) throw ConfigError("direction density evaluated negative");
      if (uniform01(rng) * bound < w) return q;
      detail::check_rejection_efficiency(trials, 0, "DirectionLaw::sample_frame");
    }
  }

  Mat sample(Rng& rng, int d, int k) const { return sample_frame(rng, d, k).leftCols(k); }

 private:
  explicit DirectionLaw(Kind kind) : kind_(kind) {}

  Kind kind_;
  int axis_ = 0;
  double strength_ = 0.0;
  std::function<double(const Mat&)> custom_;
  double custom_sup_ = 1.0;
};

/// The measure mu of translation-invariant k-flats, restricted to flats that
/// meet the ball of radius rho around centre. Its total mass is
/// kappa_{d-k} rho^{d-k}.
class KFlatWindowMeasure {
 public:
  KFlatWindowMeasure(int d, int k, double rho, DirectionLaw law, Vec center = Vec())
      : d_(d), k_(k), rho_(rho), law_(std::move(law)), center_(center.size() ? std::move(center) : Vec::Zero(d)) {
    if (k < 1 || d < 1) throw ConfigError("k-flat model needs d >= 1 and k >= 1");
    if (2 * k >= d) throw ConfigError("non-intersecting regime requires 2k < d");
    if (!(rho > 0.0)) throw ConfigError("k-flat window radius must be positive");
    if (center_.size() != d) throw ConfigError("k-flat window centre has the wrong dimension");
    law_.validate(d, k);
  }

  int dim() const { return d_; }
  int flat_dim() const { return k_; }
  double radius() const { return rho_; }
  const Vec& center() const { return center_; }
  const DirectionLaw& law() const { return law_; }
  double total_mass() const { return unit_ball_volume(d_ - k_) * std::pow(rho_, d_ - k_); }

  AffineFlat sample(Rng& rng) const {
    const Mat frame = law_.sample_frame(rng, d_, k_);
    const auto complement = frame.rightCols(d_ - k_);
    const Vec offset = uniform_in_ball(rng, d_ - k_, rho_);
    AffineFlat f;
    f.basis = frame.leftCols(k_);
    f.base = complement * (complement.transpose() * center_ + offset);
#ifdef PPLIMIT_CHECK_INVARIANTS
    f.check_invariants();
#endif
    return f;
  }

 private:
  int d_, k_;
  double rho_;
  DirectionLaw law_;
  Vec center_;
};

inline std::vector<AffineFlat> sample_kflat_process(const KFlatWindowMeasure& measure, double t, Rng& rng) {
  if (!(t > 0.0)) throw ConfigError("sample_kflat_process: intensity t must be positive");
  const std::size_t n = poisson_count(rng, t * measure.total_mass());
  std::vector<AffineFlat> flats;
  flats.reserve(n);
  for (std::size_t i = 0; i < n; ++i) flats.push_back(measure.sample(rng));
  return flats;
}

/// Poisson k-flat process of intensity t restricted to flats meeting the
/// ball of radius rho (around centre, default the origin).
inline std::vector<AffineFlat> sample_kflat_process(int d, int k, double rho, const DirectionLaw& law, double t,
                                                    std::uint64_t seed, Vec center = Vec()) {
  const KFlatWindowMeasure measure(d, k, rho, law, std::move(center));
  Rng rng = make_rng(seed);
  return sample_kflat_process(measure, t, rng);
}

}  // namespace pplimit
