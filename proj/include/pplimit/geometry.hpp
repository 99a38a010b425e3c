// SPDX-License-Identifier: Apache-2.0
//
// Deterministic geometric functionals evaluated on tuples: pair distance,
// triangle angles, simplices cut out by hyperplanes, flat-to-flat distance
// and the subspace bracket [L, M].
//
// Each kernel first puts its arguments into a canonical order, so the result
// is bitwise independent of argument order.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/SVD>

#include "pplimit/convex_body.hpp"
#include "pplimit/core.hpp"
#include "pplimit/sampling.hpp"

namespace pplimit {

// Degeneracy thresholds. Both events have probability zero under every
// sampled law; affected tuples are flagged and excluded.
inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kRankTolerance = 1e-10;

inline double pair_distance(VecRef a, VecRef b) {
  if (a.size() != b.size()) throw GeometryError("pair_distance: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

namespace detail {

inline bool lex_less(VecRef a, VecRef b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return false;
}

struct AngleParts {
  double cross;   // |u x v| at the vertex opposite the longest side
  double dot;     // u . v
  double uu, vv;  // squared lengths of the two adjacent sides
};

inline AngleParts largest_angle_parts(VecRef p0, VecRef p1, VecRef p2) {
  if (p0.size() != 2 || p1.size() != 2 || p2.size() != 2) throw GeometryError("triangle angles need planar points");
  std::array<const VecRef*, 3> v{&p0, &p1, &p2};
  std::sort(v.begin(), v.end(), [](const VecRef* x, const VecRef* y) { return lex_less(*x, *y); });
  const VecRef& a = *v[0];
  const VecRef& b = *v[1];
  const VecRef& c = *v[2];
  const double ab2 = (a - b).squaredNorm();
  const double bc2 = (b - c).squaredNorm();
  const double ca2 = (c - a).squaredNorm();
  if (ab2 == 0.0 || bc2 == 0.0 || ca2 == 0.0) throw GeometryError("degenerate triangle");
  double ux, uy, vx, vy;
  if (ab2 >= bc2 && ab2 >= ca2) {
    ux = a[0] - c[0], uy = a[1] - c[1], vx = b[0] - c[0], vy = b[1] - c[1];
  } else if (bc2 >= ca2) {
    ux = b[0] - a[0], uy = b[1] - a[1], vx = c[0] - a[0], vy = c[1] - a[1];
  } else {
    ux = a[0] - b[0], uy = a[1] - b[1], vx = c[0] - b[0], vy = c[1] - b[1];
  }
  return {std::abs(ux * vy - uy * vx), ux * vx + uy * vy, ux * ux + uy * uy, vx * vx + vy * vy};
}

}  // namespace detail

/// Largest interior angle of the planar triangle (x1, x2, x3), in (0, pi];
/// collinear points give pi.
inline double largest_angle(VecRef x1, VecRef x2, VecRef x3) {
  const auto p = detail::largest_angle_parts(x1, x2, x3);
  return std::atan2(p.cross, p.dot);
}

/// pi minus the largest angle, computed without cancellation.
inline double triangle_flatness(VecRef x1, VecRef x2, VecRef x3) {
  const auto p = detail::largest_angle_parts(x1, x2, x3);
  return std::atan2(p.cross, -p.dot);
}

/// Same value as triangle_flatness when it is <= cutoff; otherwise may return
/// +inf without evaluating the arctangent (flatness >= its sine).
inline double triangle_flatness_bounded(VecRef x1, VecRef x2, VecRef x3, double cutoff) {
  const auto p = detail::largest_angle_parts(x1, x2, x3);
  if (p.cross * p.cross > cutoff * cutoff * p.uu * p.vv * (1.0 + 1e-12)) return kInf;
  return std::atan2(p.cross, -p.dot);
}

/// All three interior angles (used by the property tests).
inline std::array<double, 3> triangle_angles(VecRef a, VecRef b, VecRef c) {
  auto angle_at = [](VecRef apex, VecRef p, VecRef q) {
    const Vec u = p - apex, v = q - apex;
    return std::atan2(std::abs(u[0] * v[1] - u[1] * v[0]), u.dot(v));
  };
  if ((a - b).squaredNorm() == 0.0 || (b - c).squaredNorm() == 0.0 || (c - a).squaredNorm() == 0.0)
    throw GeometryError("degenerate triangle");
  return {angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)};
}

// ---------------------------------------------------------------------------

struct SimplexResult {
  std::vector<Vec> vertices;  // d + 1 vertices
  double volume = 0.0;
  bool contained = false;  // all vertices inside the window
  bool degenerate = false;
};

inline double simplex_volume(std::span<const Vec> vertices) {
  const int d = static_cast<int>(vertices.size()) - 1;
  if (d < 1) return 0.0;
  SmallMat m(d, d);
  for (int j = 0; j < d; ++j) m.col(j) = vertices[j + 1] - vertices[0];
  return std::abs(m.determinant()) / factorial(d);
}

/// Simplex bounded by d + 1 hyperplanes in R^d. Vertex j solves the system of
/// the d planes other than j. Near-parallel subsets (condition number above
/// kMaxConditionNumber) set the degenerate flag.
inline SimplexResult simplex_from_hyperplanes(std::span<const Hyperplane> planes, const ConvexBody& body) {
  const int d = body.dim();
  if (static_cast<int>(planes.size()) != d + 1) throw GeometryError("simplex_from_hyperplanes: need d + 1 hyperplanes");
  if (d > kMaxDim) throw GeometryError("simplex_from_hyperplanes: dimension too large");
  std::array<int, kMaxDim + 1> order{};
  std::iota(order.begin(), order.begin() + d + 1, 0);
  std::sort(order.begin(), order.begin() + d + 1, [&](int i, int j) {
    const Hyperplane& a = planes[i];
    const Hyperplane& b = planes[j];
    if (detail::lex_less(a.normal, b.normal)) return true;
    if (detail::lex_less(b.normal, a.normal)) return false;
    return a.offset < b.offset;
  });

  SimplexResult res;
  res.vertices.reserve(d + 1);
  SmallMat a(d, d);
  SmallVec rhs(d);
  for (int omit = 0; omit <= d; ++omit) {
    int row = 0;
    for (int j = 0; j <= d; ++j) {
      if (j == omit) continue;
      const Hyperplane& h = planes[order[j]];
      if (h.dim() != d) throw GeometryError("simplex_from_hyperplanes: dimension mismatch");
      a.row(row) = h.normal.transpose();
      rhs[row] = h.offset;
      ++row;
    }
    Eigen::JacobiSVD<SmallMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[d - 1] > 0.0) || sv[0] / sv[d - 1] > kMaxConditionNumber) {
      res.degenerate = true;
      res.vertices.clear();
      return res;
    }
    res.vertices.emplace_back(svd.solve(rhs));
  }
  res.volume = simplex_volume(res.vertices);
  res.contained = std::all_of(res.vertices.begin(), res.vertices.end(), [&](const Vec& v) { return body.contains(v); });
  return res;
}

// ---------------------------------------------------------------------------

struct FlatDistanceResult {
  double distance = 0.0;
  Vec midpoint;
  Vec closest_first;   // realizing point on the first argument
  Vec closest_second;  // realizing point on the second argument
  bool degenerate = false;
};

namespace detail {

inline bool flat_less(const AffineFlat& e, const AffineFlat& f) {
  if (lex_less(e.base, f.base)) return true;
  if (lex_less(f.base, e.base)) return false;
  const Eigen::Index n = e.basis.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (e.basis.data()[i] < f.basis.data()[i]) return true;
    if (f.basis.data()[i] < e.basis.data()[i]) return false;
  }
  return false;
}

}  // namespace detail

/// Distance between two k-flats and the midpoint of the segment joining the
/// realizing points; parallel direction spans set the degenerate flag.
inline FlatDistanceResult flat_distance(const AffineFlat& first, const AffineFlat& second) {
  const int d = first.dim();
  const int k = first.flat_dim();
  if (second.dim() != d || second.flat_dim() != k) throw GeometryError("flat_distance: flats of different type");
  if (d > kMaxDim || 2 * k > kMaxDim) throw GeometryError("flat_distance: dimension too large");
  const bool swap = detail::flat_less(second, first);
  const AffineFlat& e = swap ? second : first;
  const AffineFlat& f = swap ? first : second;

  SmallMat a(d, 2 * k);
  a.leftCols(k) = e.basis;
  a.rightCols(k) = -f.basis;
  const SmallVec b = f.base - e.base;
  Eigen::JacobiSVD<SmallMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();

  FlatDistanceResult res;
  if (!(sv[2 * k - 1] > kRankTolerance * sv[0])) {
    res.degenerate = true;
    return res;
  }
  const SmallVec coef = svd.solve(b);
  Vec pe = e.base + e.basis * coef.head(k);
  Vec pf = f.base + f.basis * coef.tail(k);
  res.distance = (pe - pf).norm();
  res.midpoint = 0.5 * (pe + pf);
  if (swap) std::swap(pe, pf);
  res.closest_first = std::move(pe);
  res.closest_second = std::move(pf);
  return res;
}

/// [L, M]: the 2k-volume of the parallelepiped spanned by orthonormal bases of
/// L and M, i.e. sqrt(det(A^T A)) with A = [U V].
inline double subspace_bracket(MatRef u, MatRef v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw GeometryError("subspace_bracket: basis shapes differ");
  if (2 * u.cols() > u.rows()) throw GeometryError("subspace_bracket: requires 2k <= d");
  Mat a(u.rows(), 2 * u.cols());
  a << u, v;
  const double det = (a.transpose() * a).determinant();
  return std::sqrt(std::clamp(det, 0.0, 1.0));
}

}  // namespace pplimit
