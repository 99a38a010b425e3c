// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pplimit/core.hpp"

namespace pplimit {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [lo, hi] (Golub-Welsch).
inline QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0) {
  if (n < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  Mat jacobi = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.nodes[i] = mid + half * eig.eigenvalues()[i];
    rule.weights[i] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

/// Welford accumulator for Monte Carlo means and standard errors.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace pplimit
