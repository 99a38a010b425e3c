// SPDX-License-Identifier: Apache-2.0
//
// Shared vocabulary types, error classes and small numeric helpers.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pplimit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;
using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

// Fixed-capacity storage for the tiny systems solved inside tuple scans;
// keeps the hot loops free of heap allocation.
inline constexpr int kMaxDim = 8;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

/// Invalid user-supplied parameters (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failures while running a valid computation (maps to CLI exit code 3).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric input outside a kernel's domain (e.g. coincident triangle vertices).
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ProcessKind { poisson, binomial };

inline const char* to_string(ProcessKind kind) {
  return kind == ProcessKind::poisson ? "poisson" : "binomial";
}

inline ProcessKind process_from_string(const std::string& s) {
  if (s == "poisson") return ProcessKind::poisson;
  if (s == "binomial") return ProcessKind::binomial;
  throw ConfigError("unknown process type '" + s + "' (expected poisson or binomial)");
}

/// Volume of the d-dimensional unit ball, kappa_d.
inline double unit_ball_volume(int d) {
  if (d < 0) throw ConfigError("unit_ball_volume: negative dimension");
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

/// Descending factorial (n)_k = n (n-1) ... (n-k+1).
inline double falling_factorial(double n, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= (n - i);
  return f;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace pplimit
