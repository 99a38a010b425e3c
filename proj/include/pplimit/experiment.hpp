// SPDX-License-Identifier: Apache-2.0
//
// Seeded replication harness: sample, scan, rescale, aggregate the ECDFs and
// compare them with the Weibull limit across a grid of intensities.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pplimit/bounds.hpp"
#include "pplimit/core.hpp"
#include "pplimit/limits.hpp"
#include "pplimit/models.hpp"
#include "pplimit/rng.hpp"

namespace pplimit {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kThreadsEnv = "PPLIMIT_THREADS";

// ---------------------------------------------------------------------------
// Statistics

/// KS distance between the ECDF of `total` observations, of which the
/// sorted finite ones are given and the rest are +inf, and the distribution
/// function cdf. Checked at both one-sided limits of every sample point and
/// in the limit x -> inf.
template <class Cdf>
double ks_distance(std::span<const double> sorted, std::size_t total, Cdf&& cdf) {
  if (total == 0) throw ConfigError("ks_distance: empty sample");
  if (sorted.size() > total) throw ConfigError("ks_distance: more finite values than observations");
  const double n = static_cast<double>(total);
  double d = static_cast<double>(total - sorted.size()) / n;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!std::isfinite(sorted[i])) throw ConfigError("ks_distance: sample must be finite");
    if (i > 0 && sorted[i] < sorted[i - 1]) throw ConfigError("ks_distance: sample must be sorted");
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

/// Kolmogorov-Smirnov distance between the ECDF of a sorted finite sample and
/// the distribution function cdf, checked at both one-sided limits of every
/// sample point.
template <class Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
  return ks_distance(sorted, sorted.size(), std::forward<Cdf>(cdf));
}

/// KS distance to the order-m Weibull limit law.
inline double ks_distance(std::span<const double> sorted, std::size_t total, const WeibullLimit& lim, int m) {
  return ks_distance(sorted, total, [&](double y) { return 1.0 - weibull_survival(lim, std::max(y, 0.0), m); });
}

/// Two-sample KS distance; +inf values are allowed in both samples.
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    if (std::isinf(x)) break;
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  while (i < a.size() && std::isfinite(a[i])) ++i;
  while (j < b.size() && std::isfinite(b[j])) ++j;
  return std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
}

struct RateFit {
  double slope = std::nan("");
  double intercept = std::nan("");
  double r_squared = std::nan("");
  std::size_t used = 0;
  std::vector<std::string> warnings;

  bool operator==(const RateFit& o) const {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return same(slope, o.slope) && same(intercept, o.intercept) && same(r_squared, o.r_squared) && used == o.used &&
           warnings == o.warnings;
  }
};

/// Least squares of log(deviation) on log(t). Non-positive or non-finite
/// deviations are dropped with a warning.
inline RateFit rate_regression(std::span<const double> params, std::span<const double> deviations) {
  if (params.size() != deviations.size()) throw ConfigError("rate_regression: size mismatch");
  if (params.size() < 3) throw ConfigError("rate_regression: need at least 3 grid values");
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(deviations[i] > 0.0) || !std::isfinite(deviations[i]) || !(params[i] > 0.0)) {
      fit.warnings.push_back("dropped non-positive deviation at grid value " + std::to_string(params[i]));
      continue;
    }
    xs.push_back(std::log(params[i]));
    ys.push_back(std::log(deviations[i]));
  }
  fit.used = xs.size();
  if (xs.size() < 2) {
    fit.warnings.push_back("fewer than 2 usable deviations; no fit");
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) {
    fit.warnings.push_back("grid values are all equal; no fit");
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Plan and report

struct ExperimentPlan {
  ModelSpec model;
  std::vector<double> grid;  // t values (Poisson) or n values (binomial)
  std::size_t replications = 100;
  std::vector<int> m_list{1};
  std::vector<double> y_grid;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: PPLIMIT_THREADS, else hardware concurrency
  bool estimate_bounds = false;
  std::vector<double> bound_y;  // empty: use y_grid
  BoundPolicy bound_policy;
  bool keep_samples = true;  // store the ECDF samples in the report

  bool operator==(const ExperimentPlan&) const = default;
};

/// Results for one (t, m).
struct OrderTable {
  double param = 0.0;
  int m = 1;
  std::vector<double> sample;  // sorted finite scaled values (empty unless kept)
  std::size_t finite = 0;
  std::size_t infinite = 0;
  double ks = 0.0;
  std::vector<double> empirical_survival, limit_survival, gap;  // over the y-grid
  double mean_gap = 0.0;                                        // signed average of gap

  bool operator==(const OrderTable&) const = default;
};

struct BoundRow {
  double param = 0.0;
  double y = 0.0;
  double nu = 0.0;  // beta y^tau
  double shape = 0.0;
  BoundEstimate estimate;

  bool operator==(const BoundRow&) const = default;
};

struct ExperimentReport {
  std::string schema = "pplimit.report/v1";
  std::string version = kVersion;
  ExperimentPlan plan;
  double gamma = 0.0;
  WeibullLimit limit;
  std::vector<OrderTable> tables;            // grid-major, then m_list order
  std::vector<std::size_t> degenerate;       // per grid value
  std::vector<double> deviations;            // per grid value, |mean_gap| of m_list[0]
  std::optional<RateFit> rate;               // when the grid has >= 3 values
  std::vector<BoundRow> bounds;
  std::vector<std::string> warnings;
  // Timings; not part of the results.
  unsigned threads_used = 1;
  double wall_seconds = 0.0;

  const OrderTable& table(std::size_t grid_index, int m) const {
    const auto pos = std::find(plan.m_list.begin(), plan.m_list.end(), m);
    const std::size_t idx = grid_index * plan.m_list.size() + static_cast<std::size_t>(pos - plan.m_list.begin());
    if (pos != plan.m_list.end() && idx < tables.size()) return tables[idx];
    throw ConfigError("no table for grid index " + std::to_string(grid_index) + " and m = " + std::to_string(m));
  }
};

/// Equality of everything except timings and the thread budget.
inline bool same_results(const ExperimentReport& a, const ExperimentReport& b) {
  ExperimentPlan pa = a.plan, pb = b.plan;
  pa.threads = pb.threads = 0;
  return a.schema == b.schema && a.version == b.version && pa == pb && a.gamma == b.gamma &&
         a.limit == b.limit && a.tables == b.tables && a.degenerate == b.degenerate && a.deviations == b.deviations &&
         a.rate == b.rate && a.bounds == b.bounds && a.warnings == b.warnings;
}

// ---------------------------------------------------------------------------
// Execution

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError(std::string(kThreadsEnv) + " must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `threads` threads. Each index is
/// processed exactly once; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  constexpr std::size_t chunk = 16;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(chunk);
      if (start >= n || failed.load()) return;
      const std::size_t stop = std::min(n, start + chunk);
      try {
        for (std::size_t i = start; i < stop; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void validate_plan(const ExperimentPlan& plan) {
  if (plan.replications < 1) throw ConfigError("replications must be >= 1");
  if (plan.grid.empty()) throw ConfigError("grid must not be empty");
  if (!std::is_sorted(plan.grid.begin(), plan.grid.end())) throw ConfigError("grid must be sorted");
  for (double g : plan.grid)
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("grid values must be positive and finite");
  if (plan.m_list.empty()) throw ConfigError("m_list must not be empty");
  for (int m : plan.m_list)
    if (m < 1) throw ConfigError("m_list entries must be >= 1");
  if (!std::is_sorted(plan.y_grid.begin(), plan.y_grid.end())) throw ConfigError("y_grid must be sorted");
  for (double y : plan.y_grid)
    if (!(y >= 0.0) || !std::isfinite(y)) throw ConfigError("y_grid values must be finite and >= 0");
  for (double y : plan.bound_y)
    if (!(y >= 0.0) || !std::isfinite(y)) throw ConfigError("bound_y values must be finite and >= 0");
}

inline ExperimentReport run_experiment(const ExperimentPlan& plan) {
  validate_plan(plan);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m_max = static_cast<std::size_t>(*std::max_element(plan.m_list.begin(), plan.m_list.end()));
  const Model model(plan.model, m_max);

  ExperimentReport rep;
  rep.plan = plan;
  rep.gamma = model.gamma();
  rep.limit = model.limit();
  rep.threads_used = resolve_threads(plan.threads);
  const std::size_t R = plan.replications;

  std::vector<double> values(R * m_max);
  std::vector<std::size_t> degenerate(R);
  for (std::size_t gi = 0; gi < plan.grid.size(); ++gi) {
    const double param = plan.grid[gi];
    parallel_for(R, rep.threads_used, [&](std::size_t i) {
      const ScaledOrderStatistics s = model.replicate(param, derive_seed(plan.seed, {gi, i}), m_max);
      std::copy(s.scaled.begin(), s.scaled.end(), values.begin() + static_cast<std::ptrdiff_t>(i * m_max));
      degenerate[i] = s.degenerate;
    });
    std::size_t deg = 0;
    for (std::size_t d : degenerate) deg += d;
    rep.degenerate.push_back(deg);

    for (int m : plan.m_list) {
      OrderTable tab;
      tab.param = param;
      tab.m = m;
      std::vector<double> finite;
      finite.reserve(R);
      for (std::size_t i = 0; i < R; ++i) {
        const double v = values[i * m_max + static_cast<std::size_t>(m - 1)];
        if (std::isfinite(v)) finite.push_back(v);
      }
      std::sort(finite.begin(), finite.end());
      tab.finite = finite.size();
      tab.infinite = R - finite.size();
      tab.ks = ks_distance(finite, R, rep.limit, m);
      double gap_sum = 0.0;
      for (double y : plan.y_grid) {
        const auto above = static_cast<double>(finite.end() - std::upper_bound(finite.begin(), finite.end(), y));
        const double emp = (above + static_cast<double>(tab.infinite)) / static_cast<double>(R);
        const double lim = weibull_survival(rep.limit, y, m);
        tab.empirical_survival.push_back(emp);
        tab.limit_survival.push_back(lim);
        tab.gap.push_back(emp - lim);
        gap_sum += emp - lim;
      }
      tab.mean_gap = plan.y_grid.empty() ? 0.0 : gap_sum / static_cast<double>(plan.y_grid.size());
      if (plan.keep_samples) tab.sample = std::move(finite);
      rep.tables.push_back(std::move(tab));
    }

    if (plan.estimate_bounds) {
      const std::vector<double>& ys = plan.bound_y.empty() ? plan.y_grid : plan.bound_y;
      for (std::size_t yi = 0; yi < ys.size(); ++yi) {
        BoundPolicy policy = plan.bound_policy;
        policy.seed = derive_seed(plan.seed, {0xb0, gi, yi});
        BoundRow row;
        row.param = param;
        row.y = ys[yi];
        row.estimate = model.bounds(param, ys[yi], policy);
        row.nu = rep.limit.beta * std::pow(ys[yi], rep.limit.tau);
        row.shape = plan.model.process == ProcessKind::poisson
                        ? theorem_bound_shape(row.estimate.alpha, row.estimate.r, row.nu)
                        : theorem_bound_shape(row.estimate.alpha, row.estimate.r, row.nu, param);
        rep.bounds.push_back(row);
      }
    }
  }

  if (!plan.y_grid.empty()) {
    for (std::size_t gi = 0; gi < plan.grid.size(); ++gi)
      rep.deviations.push_back(std::abs(rep.table(gi, plan.m_list.front()).mean_gap));
    // No rate is known for the hyperplane model: its boundary term has no uniform asymptotics.
    if (plan.model.kind == ModelKind::hyperplane_simplices) {
      rep.warnings.push_back("rate_regression: skipped for hyperplane_simplices (no known rate)");
    } else if (plan.grid.size() >= 3) {
      rep.rate = rate_regression(plan.grid, rep.deviations);
      for (const auto& w : rep.rate->warnings) rep.warnings.push_back("rate_regression: " + w);
    }
  }
  for (std::size_t gi = 0; gi < plan.grid.size(); ++gi)
    if (rep.degenerate[gi] > 0)
      rep.warnings.push_back(std::to_string(rep.degenerate[gi]) + " degenerate tuples excluded at grid value " +
                             std::to_string(plan.grid[gi]));

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pplimit
