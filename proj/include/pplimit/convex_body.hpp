// SPDX-License-Identifier: Apache-2.0
//
// Observation windows: axis-parallel boxes, balls and convex polygons.

#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "pplimit/core.hpp"
#include "pplimit/rng.hpp"

namespace pplimit {

class ConvexBody {
 public:
  enum class Kind { box, ball, polygon };

  static ConvexBody box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() < 1)
      throw ConfigError("box: corner vectors must have equal, positive dimension");
    if (((upper - lower).array() <= 0.0).any()) throw ConfigError("box: upper corner must exceed lower corner");
    ConvexBody b(Kind::box, static_cast<int>(lower.size()));
    b.lower_ = std::move(lower);
    b.upper_ = std::move(upper);
    b.volume_ = (b.upper_ - b.lower_).prod();
    b.diameter_ = (b.upper_ - b.lower_).norm();
    b.centroid_ = 0.5 * (b.lower_ + b.upper_);
    b.circumradius_ = 0.5 * b.diameter_;
    return b;
  }

  static ConvexBody unit_cube(int d) { return box(Vec::Zero(d), Vec::Ones(d)); }

  /// The cube [-1/2, 1/2]^d, which contains the origin in its interior.
  static ConvexBody centered_cube(int d) { return box(Vec::Constant(d, -0.5), Vec::Constant(d, 0.5)); }

  static ConvexBody ball(Vec center, double radius) {
    if (center.size() < 1) throw ConfigError("ball: empty centre");
    if (!(radius > 0.0)) throw ConfigError("ball: radius must be positive");
    const int d = static_cast<int>(center.size());
    ConvexBody b(Kind::ball, d);
    b.radius_ = radius;
    b.volume_ = unit_ball_volume(d) * std::pow(radius, d);
    b.diameter_ = 2.0 * radius;
    b.circumradius_ = radius;
    b.lower_ = center.array() - radius;
    b.upper_ = center.array() + radius;
    b.centroid_ = std::move(center);
    return b;
  }

  /// Convex polygon in the plane; vertices in either orientation, no repeats.
  static ConvexBody polygon(const std::vector<Eigen::Vector2d>& vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw ConfigError("polygon: need at least 3 vertices");
    std::vector<Eigen::Vector2d> v = vertices;
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = v[i];
      const auto& q = v[(i + 1) % n];
      area2 += p.x() * q.y() - q.x() * p.y();
    }
    if (area2 < 0.0) {
      std::reverse(v.begin(), v.end());
      area2 = -area2;
    }
    if (!(area2 > 0.0)) throw ConfigError("polygon: zero area");
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d e1 = v[(i + 1) % n] - v[i];
      const Eigen::Vector2d e2 = v[(i + 2) % n] - v[(i + 1) % n];
      if (e1.x() * e2.y() - e1.y() * e2.x() <= 0.0) throw ConfigError("polygon: vertices are not strictly convex");
    }
    ConvexBody b(Kind::polygon, 2);
    b.vertices_ = v;
    b.volume_ = 0.5 * area2;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = v[i];
      const auto& q = v[(i + 1) % n];
      const double cr = p.x() * q.y() - q.x() * p.y();
      c += (p + q) * cr;
    }
    c /= (3.0 * area2);
    b.centroid_ = c;
    b.lower_ = Vec::Constant(2, kInf);
    b.upper_ = Vec::Constant(2, -kInf);
    double diam = 0.0, circ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      b.lower_ = b.lower_.cwiseMin(Vec(v[i]));
      b.upper_ = b.upper_.cwiseMax(Vec(v[i]));
      circ = std::max(circ, (v[i] - c).norm());
      for (std::size_t j = i + 1; j < n; ++j) diam = std::max(diam, (v[i] - v[j]).norm());
    }
    b.diameter_ = diam;
    b.circumradius_ = circ;
    return b;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double volume() const { return volume_; }
  double diameter() const { return diameter_; }
  /// Radius of the smallest centroid-centred ball that contains the body.
  double circumradius() const { return circumradius_; }
  const Vec& centroid() const { return centroid_; }
  const Vec& bbox_lower() const { return lower_; }
  const Vec& bbox_upper() const { return upper_; }
  double radius() const { return radius_; }
  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }

  bool contains(VecRef x, double tol = 0.0) const {
    switch (kind_) {
      case Kind::box:
        return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
      case Kind::ball:
        return (x - centroid_).norm() <= radius_ + tol;
      case Kind::polygon: {
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
          const Eigen::Vector2d e = vertices_[(i + 1) % n] - vertices_[i];
          const double cr = e.x() * (x[1] - vertices_[i].y()) - e.y() * (x[0] - vertices_[i].x());
          if (cr < -tol * e.norm()) return false;
        }
        return true;
      }
    }
    return false;
  }

  /// Support function h_K(u) = sup { <x, u> : x in K }.
  double support(VecRef u) const {
    switch (kind_) {
      case Kind::box: {
        double h = 0.0;
        for (int i = 0; i < dim_; ++i) h += std::max(u[i] * lower_[i], u[i] * upper_[i]);
        return h;
      }
      case Kind::ball:
        return centroid_.dot(u) + radius_ * u.norm();
      case Kind::polygon: {
        double h = -kInf;
        for (const auto& v : vertices_) h = std::max(h, v.x() * u[0] + v.y() * u[1]);
        return h;
      }
    }
    return 0.0;
  }

  /// sup { |x| : x in K }.
  double max_norm() const {
    switch (kind_) {
      case Kind::box: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += std::max(lower_[i] * lower_[i], upper_[i] * upper_[i]);
        return std::sqrt(s);
      }
      case Kind::ball:
        return centroid_.norm() + radius_;
      case Kind::polygon: {
        double m = 0.0;
        for (const auto& v : vertices_) m = std::max(m, v.norm());
        return m;
      }
    }
    return 0.0;
  }

  /// True when a ball of radius margin around the origin lies in K.
  bool contains_origin_in_interior(double margin = 1e-12) const {
    if (kind_ == Kind::ball) return centroid_.norm() + margin < radius_;
    const Vec zero = Vec::Zero(dim_);
    if (!contains(zero)) return false;
    // The origin is interior iff h_K(u) > 0 for every direction; check the facet normals.
    if (kind_ == Kind::box) return (lower_.array() < -margin).all() && (upper_.array() > margin).all();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d e = vertices_[(i + 1) % n] - vertices_[i];
      const double cr = e.x() * (-vertices_[i].y()) - e.y() * (-vertices_[i].x());
      if (cr <= margin * e.norm()) return false;
    }
    return true;
  }

  /// Uniform point in K (direct for boxes, rejection from the bounding box otherwise).
  Vec sample_uniform(Rng& rng) const {
    Vec x(dim_);
    sample_uniform_into(rng, x.data());
    return x;
  }

  /// Same draw as sample_uniform, written to out[0..d).
  void sample_uniform_into(Rng& rng, double* out) const {
    if (kind_ == Kind::ball) {
      const Vec u = uniform_in_ball(rng, dim_, radius_);
      for (int i = 0; i < dim_; ++i) out[i] = centroid_[i] + u[i];
      return;
    }
    for (;;) {
      for (int i = 0; i < dim_; ++i) out[i] = lower_[i] + (upper_[i] - lower_[i]) * uniform01(rng);
      if (kind_ == Kind::box || contains(Eigen::Map<const Vec>(out, dim_))) return;
    }
  }

  ConvexBody translated(VecRef shift) const {
    switch (kind_) {
      case Kind::box:
        return box(lower_ + shift, upper_ + shift);
      case Kind::ball:
        return ball(centroid_ + shift, radius_);
      case Kind::polygon: {
        std::vector<Eigen::Vector2d> v = vertices_;
        for (auto& p : v) p += Eigen::Vector2d(shift[0], shift[1]);
        return polygon(v);
      }
    }
    return *this;
  }

  /// Image under x -> c x (c > 0).
  ConvexBody scaled(double c) const {
    if (!(c > 0.0)) throw ConfigError("scaled: factor must be positive");
    switch (kind_) {
      case Kind::box:
        return box(c * lower_, c * upper_);
      case Kind::ball:
        return ball(c * centroid_, c * radius_);
      case Kind::polygon: {
        std::vector<Eigen::Vector2d> v = vertices_;
        for (auto& p : v) p *= c;
        return polygon(v);
      }
    }
    return *this;
  }

  /// Same body shifted so that its centroid is the origin.
  ConvexBody centered() const { return translated(-centroid_); }

 private:
  ConvexBody(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  int dim_;
  Vec lower_, upper_, centroid_;
  double radius_ = 0.0;
  std::vector<Eigen::Vector2d> vertices_;
  double volume_ = 0.0, diameter_ = 0.0, circumradius_ = 0.0;
};

/// Probability density on K with respect to Lebesgue measure: either uniform,
/// or affine  phi(x) = (1 + g.(x - centroid)) / vol(K)  which stays normalised.
class Density {
 public:
  static Density uniform(const ConvexBody& body) { return Density(body, Vec::Zero(body.dim())); }

  static Density linear(const ConvexBody& body, Vec gradient) {
    if (gradient.size() != body.dim()) throw ConfigError("density gradient dimension does not match the window");
    const Vec& c = body.centroid();
    const double low = 1.0 - (body.support(-gradient) + gradient.dot(c));
    if (low < 0.0) throw ConfigError("linear density would be negative somewhere on the window");
    return Density(body, std::move(gradient));
  }

  double operator()(VecRef x) const {
    if (uniform_) return inv_volume_;
    return (1.0 + gradient_.dot(x - centroid_)) * inv_volume_;
  }

  double sup() const { return sup_; }
  double lipschitz() const { return gradient_.norm() * inv_volume_; }
  bool is_uniform() const { return uniform_; }
  const Vec& gradient() const { return gradient_; }

 private:
  Density(const ConvexBody& body, Vec gradient)
      : gradient_(std::move(gradient)), centroid_(body.centroid()), inv_volume_(1.0 / body.volume()) {
    uniform_ = gradient_.isZero(0.0);
    sup_ = uniform_ ? inv_volume_ : (1.0 + body.support(gradient_) - gradient_.dot(centroid_)) * inv_volume_;
  }

  Vec gradient_;
  Vec centroid_;
  double inv_volume_;
  double sup_ = 0.0;
  bool uniform_ = true;
};

}  // namespace pplimit
