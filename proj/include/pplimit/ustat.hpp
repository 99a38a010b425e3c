// SPDX-License-Identifier: Apache-2.0
//
// Extremal order statistics of U-statistic point processes: every unordered
// k-subset of a configuration is mapped through a symmetric functional and the
// m_max smallest accepted values are kept.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pplimit/core.hpp"
#include "pplimit/geometry.hpp"

namespace pplimit {

/// Outcome of evaluating the functional on one tuple.
struct Evaluation {
  enum class Status { accepted, rejected, degenerate };
  Status status = Status::rejected;
  double value = kInf;

  static Evaluation accept(double v) { return {Status::accepted, v}; }
  static Evaluation reject() { return {Status::rejected, kInf}; }
  static Evaluation degenerate() { return {Status::degenerate, kInf}; }
};

/// Evaluator over index tuples. The cutoff is a hint: an evaluator may reject a
/// tuple whose value certainly exceeds it, but any value <= cutoff must be
/// returned exactly as it would be with cutoff = +inf.
template <class F>
concept TupleEvaluator = requires(const F& f, std::span<const std::size_t> idx, double cutoff) {
  { f(idx, cutoff) } -> std::same_as<Evaluation>;
};

template <TupleEvaluator F>
struct FunctionalSpec {
  std::size_t arity = 2;
  F evaluate;
  std::string model;
};

template <TupleEvaluator F>
FunctionalSpec<F> make_functional(std::size_t arity, F evaluate, std::string model = {}) {
  return FunctionalSpec<F>{arity, std::move(evaluate), std::move(model)};
}

/// The m_max smallest accepted values (ascending, padded with +inf) and the
/// number of degenerate tuples skipped.
struct TupleScanResult {
  std::vector<double> values;
  std::size_t degenerate = 0;
  std::size_t tuples = 0;  // tuples handed to the evaluator
};

struct ScaledOrderStatistics {
  std::string model;
  double gamma = 0.0;
  double scale = 1.0;          // intensity^gamma
  std::vector<double> raw;     // M^(1) <= ... <= M^(m_max); +inf when missing
  std::vector<double> scaled;  // raw * scale
  std::uint64_t seed = 0;
  std::size_t degenerate = 0;
};

inline ScaledOrderStatistics scale_order_statistics(const TupleScanResult& scan, std::string model, double gamma,
                                                    double intensity, std::uint64_t seed) {
  ScaledOrderStatistics out;
  out.model = std::move(model);
  out.gamma = gamma;
  out.scale = std::pow(intensity, gamma);
  out.raw = scan.values;
  out.scaled.reserve(scan.values.size());
  for (double v : scan.values) out.scaled.push_back(v * out.scale);
  out.seed = seed;
  out.degenerate = scan.degenerate;
  return out;
}

/// Bounded max-heap holding the m smallest values pushed so far.
class SmallestValues {
 public:
  explicit SmallestValues(std::size_t m) : m_(m) {
    if (m_ == 0) throw ConfigError("m_max must be >= 1");
  }

  double cutoff() const { return heap_.size() < m_ ? kInf : heap_.top(); }

  void push(double v) {
    if (heap_.size() < m_) {
      heap_.push(v);
    } else if (v < heap_.top()) {
      heap_.pop();
      heap_.push(v);
    }
  }

  std::size_t size() const { return heap_.size(); }

  std::vector<double> sorted() && {
    std::vector<double> out;
    out.reserve(m_);
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    out.resize(m_, kInf);
    return out;
  }

 private:
  std::size_t m_;
  std::priority_queue<double> heap_;
};

/// Calls visit(span of k ascending indices) for every k-subset of {0..n-1}
/// in lexicographic order. Returns the number of subsets visited.
template <class Visit>
std::size_t for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
  if (k == 0 || k > n) return 0;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::size_t count = 0;
  for (;;) {
    visit(std::span<const std::size_t>(idx));
    ++count;
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return count;
}

/// Scans all unordered k-subsets of n items. Unordered subsets are the unit
/// counted by xi = (1/k!) sum over ordered tuples of distinct points.
template <TupleEvaluator F>
TupleScanResult scan_tuples(std::size_t n_items, const FunctionalSpec<F>& spec, std::size_t m_max) {
  SmallestValues heap(m_max);
  TupleScanResult res;
  res.tuples = for_each_subset(n_items, spec.arity, [&](std::span<const std::size_t> idx) {
    const Evaluation e = spec.evaluate(idx, heap.cutoff());
    if (e.status == Evaluation::Status::degenerate) {
      ++res.degenerate;
    } else if (e.status == Evaluation::Status::accepted) {
      heap.push(e.value);
    }
  });
  res.values = std::move(heap).sorted();
  return res;
}

/// Number of k-subsets whose value v satisfies y1 < v * scale <= y2.
template <TupleEvaluator F>
std::size_t count_in_window(std::size_t n_items, const FunctionalSpec<F>& spec, double y1, double y2, double scale) {
  if (!(y1 <= y2)) throw ConfigError("count_in_window: need y1 <= y2");
  if (y1 == y2) return 0;
  std::size_t count = 0;
  const double cutoff = std::isfinite(y2) ? (y2 / scale) * (1.0 + 1e-9) : kInf;
  for_each_subset(n_items, spec.arity, [&](std::span<const std::size_t> idx) {
    const Evaluation e = spec.evaluate(idx, cutoff);
    if (e.status != Evaluation::Status::accepted) return;
    const double s = e.value * scale;
    if (s > y1 && s <= y2) ++count;
  });
  return count;
}

/// Pair-distance functional on the columns of a point matrix.
inline auto pair_distance_functional(const Mat& points) {
  return make_functional(
      2,
      [&points](std::span<const std::size_t> idx, double) {
        return Evaluation::accept(pair_distance(points.col(static_cast<Eigen::Index>(idx[0])),
                                                points.col(static_cast<Eigen::Index>(idx[1]))));
      },
      "pair_distance");
}

namespace detail {

// Same arithmetic as pair_distance, on raw columns.
inline double raw_distance(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace detail

/// The m_max smallest pairwise distances of the columns of points, found with
/// a uniform grid. Returns exactly what scan_tuples gives for the pair-distance
/// functional.
///
/// With cell size h every pair at distance <= h lies in neighbouring cells.
/// Starting from about one point per cell the cell size doubles until at
/// least m_max pairs within distance h have been found, or a single cell
/// covers all points.
inline TupleScanResult min_pair_distance_grid(const Mat& points, std::size_t m_max) {
  const Eigen::Index d = points.rows();
  const std::size_t n = static_cast<std::size_t>(points.cols());
  TupleScanResult res;
  if (m_max == 0) throw ConfigError("m_max must be >= 1");
  if (n < 2) {
    res.values.assign(m_max, kInf);
    return res;
  }
  if (d < 1 || d > kMaxDim) throw ConfigError("min_pair_distance_grid: unsupported dimension");

  const Vec lo = points.rowwise().minCoeff();
  const Vec hi = points.rowwise().maxCoeff();
  const double extent = (hi - lo).norm();

  auto brute_force = [&] {
    SmallestValues heap(m_max);
    const double* p = points.data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) heap.push(detail::raw_distance(p + i * d, p + j * d, d));
    res.values = std::move(heap).sorted();
    res.tuples = n * (n - 1) / 2;
    return res;
  };
  if (!(extent > 0.0) || n <= 8) return brute_force();

  // Half stencil: offsets in {-1,0,1}^d whose last non-zero entry is +1.
  std::vector<std::array<int, kMaxDim>> half;
  {
    std::size_t n_offsets = 1;
    for (Eigen::Index a = 0; a < d; ++a) n_offsets *= 3;
    for (std::size_t off = 0; off < n_offsets; ++off) {
      std::array<int, kMaxDim> o{};
      std::size_t rem = off;
      int last = 0;
      for (Eigen::Index a = 0; a < d; ++a) {
        o[a] = static_cast<int>(rem % 3) - 1;
        rem /= 3;
        if (o[a] != 0) last = o[a];
      }
      if (last == 1) half.push_back(o);
    }
  }

  // About one point per cell of the bounding box; flat boxes fall back to the
  // diagonal.
  double box_volume = 1.0;
  for (Eigen::Index a = 0; a < d; ++a) box_volume *= hi[a] - lo[a];
  double h = box_volume > 0.0 ? std::pow(box_volume / static_cast<double>(n), 1.0 / static_cast<double>(d))
                              : std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d)) * extent;
  std::vector<std::int64_t> dims(d), stride(d);
  std::vector<std::size_t> cell_of(n), cell_start, fill;
  std::vector<std::int64_t> raw_coord(n * d);
  std::vector<std::int64_t> coord(n * d);  // cell coordinates, in sorted order
  std::vector<double> sorted(n * d);       // point coordinates, in sorted order

  for (;;) {
    std::int64_t total = 1;
    bool single = true;
    for (Eigen::Index a = 0; a < d; ++a) {
      dims[a] = static_cast<std::int64_t>(std::floor((hi[a] - lo[a]) / h)) + 1;
      if (dims[a] > 1) single = false;
      stride[a] = total;
      total *= dims[a];
    }
    if (single) return brute_force();

    const double inv_h = 1.0 / h;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t lin = 0;
      for (Eigen::Index a = 0; a < d; ++a) {
        std::int64_t c = static_cast<std::int64_t>((points(a, static_cast<Eigen::Index>(i)) - lo[a]) * inv_h);
        c = std::clamp<std::int64_t>(c, 0, dims[a] - 1);
        raw_coord[i * d + a] = c;
        lin += c * stride[a];
      }
      cell_of[i] = static_cast<std::size_t>(lin);
    }
    // Counting sort by cell.
    cell_start.assign(static_cast<std::size_t>(total) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++cell_start[cell_of[i] + 1];
    for (std::size_t c = 0; c < static_cast<std::size_t>(total); ++c) cell_start[c + 1] += cell_start[c];
    fill.assign(cell_start.begin(), cell_start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = fill[cell_of[i]]++;
      for (Eigen::Index a = 0; a < d; ++a) {
        sorted[s * d + a] = points(a, static_cast<Eigen::Index>(i));
        coord[s * d + a] = raw_coord[i * d + a];
      }
    }

    // Margin so that floating-point rounding of the cell coordinates can never
    // hide a pair that is counted as found.
    // Squared distances are compared first; the square root is taken only for
    // candidates, with the same arithmetic as pair_distance.
    const double h_found = h * (1.0 - 1e-9);
    const double h_found2 = h_found * h_found;
    SmallestValues heap(m_max);
    double cut2 = kInf;
    std::size_t within = 0, evaluated = 0;
    const double* base = sorted.data();
    auto visit = [&](const double* p, std::size_t from, std::size_t to) {
      evaluated += to - from;
      for (std::size_t s = from; s < to; ++s) {
        const double* q = base + s * d;
        double s2;
        if (d == 2) {
          const double d0 = p[0] - q[0], d1 = p[1] - q[1];
          s2 = 0.0 + d0 * d0;
          s2 += d1 * d1;
        } else {
          s2 = 0.0;
          for (Eigen::Index a = 0; a < d; ++a) {
            const double diff = p[a] - q[a];
            s2 += diff * diff;
          }
        }
        if (s2 <= h_found2) ++within;
        if (s2 <= cut2) {
          heap.push(std::sqrt(s2));
          const double c = heap.cutoff();
          cut2 = c * c * (1.0 + 1e-12);
        }
      }
    };
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = sorted.data() + i * d;
      const std::int64_t* ci = coord.data() + i * d;
      std::int64_t lin = 0;
      for (Eigen::Index a = 0; a < d; ++a) lin += ci[a] * stride[a];
      visit(p, i + 1, cell_start[static_cast<std::size_t>(lin) + 1]);
      for (const auto& o : half) {
        std::int64_t nl = 0;
        bool inside = true;
        for (Eigen::Index a = 0; a < d; ++a) {
          const std::int64_t c = ci[a] + o[a];
          if (c < 0 || c >= dims[a]) {
            inside = false;
            break;
          }
          nl += c * stride[a];
        }
        if (inside) visit(p, cell_start[static_cast<std::size_t>(nl)], cell_start[static_cast<std::size_t>(nl) + 1]);
      }
    }
    res.tuples += evaluated;
    if (within >= m_max) {
      res.values = std::move(heap).sorted();
      return res;
    }
    h *= 2.0;
  }
}

}  // namespace pplimit
