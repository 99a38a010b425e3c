// SPDX-License-Identifier: Apache-2.0
//
// Run configuration and report serialization (JSON, schema pplimit.report/v1)
// and the flat CSV survival tables.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pplimit/experiment.hpp"

namespace pplimit {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "pplimit.report/v1";

struct RunConfig {
  ExperimentPlan plan;
  std::string report_path = "report.json";
  std::string table_dir;  // empty: <report stem>_tables next to the report

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

/// Reads fields of one JSON object, rejecting unknown keys and naming the
/// offending field in every diagnostic.
class FieldReader {
 public:
  FieldReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + ": wrong type (" + std::string(it->type_name()) + ")");
    }
  }

  /// Number that may be written as null for NaN.
  void get_number(const char* key, double& out) {
    seen_.push_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (it->is_null()) {
      out = std::nan("");
      return;
    }
    if (!it->is_number()) throw ConfigError(where(key) + ": expected a number");
    out = it->get<double>();
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const Json& child(const char* key) {
    seen_.push_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) throw ConfigError(where(key) + ": missing");
    return *it;
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? std::string("config") : path_;
    if (key) p += std::string(".") + key;
    return p;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError(where(it.key().c_str()) + ": unknown field");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

template <class F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline std::vector<double> read_numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (x.is_null())
      out.push_back(std::nan(""));
    else if (x.is_number())
      out.push_back(x.get<double>());
    else
      throw ConfigError(where + ": expected numbers");
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config

inline Json render_model(const ModelSpec& m) {
  return Json{{"name", to_string(m.kind)},
              {"process", to_string(m.process)},
              {"d", m.d},
              {"k", m.k},
              {"r", m.r},
              {"a", m.a},
              {"body", m.body},
              {"density", m.density},
              {"directions", m.directions},
              {"pair_statistic", to_string(m.pair_statistic)},
              {"y_max", m.y_max},
              {"max_tuples", m.max_tuples},
              {"beta", {{"samples", m.beta.samples}, {"seed", m.beta.seed}, {"gauss_order", m.beta.gauss_order}}}};
}

inline Json render_config(const RunConfig& c) {
  const ExperimentPlan& p = c.plan;
  const BoundPolicy& b = p.bound_policy;
  return Json{{"model", render_model(p.model)},
              {"experiment",
               {{"grid", p.grid},
                {"replications", p.replications},
                {"m", p.m_list},
                {"y_grid", p.y_grid},
                {"seed", p.seed},
                {"threads", p.threads},
                {"keep_samples", p.keep_samples}}},
              {"bounds",
               {{"enabled", p.estimate_bounds},
                {"y", p.bound_y},
                {"min_samples", b.min_samples},
                {"max_samples", b.max_samples},
                {"target_hits", b.target_hits},
                {"outer_samples", b.outer_samples},
                {"min_inner", b.min_inner},
                {"max_inner", b.max_inner},
                {"seed", b.seed},
                {"localize", b.localize}}},
              {"output", {{"report", c.report_path}, {"tables", c.table_dir}}}};
}

inline ModelSpec parse_model(const Json& j, const std::string& path = "model") {
  ModelSpec m;
  detail::FieldReader r(j, path);
  std::string name = to_string(m.kind), process = to_string(m.process), stat = to_string(m.pair_statistic);
  r.get("name", name);
  r.get("process", process);
  m.kind = detail::with_field(r.where("name"), [&] { return model_from_string(name); });
  m.process = detail::with_field(r.where("process"), [&] { return process_from_string(process); });
  r.get("d", m.d);
  r.get("k", m.k);
  r.get("r", m.r);
  r.get("a", m.a);
  r.get("body", m.body);
  r.get("density", m.density);
  r.get("directions", m.directions);
  r.get("pair_statistic", stat);
  m.pair_statistic = detail::with_field(r.where("pair_statistic"), [&] { return pair_statistic_from_string(stat); });
  r.get("y_max", m.y_max);
  r.get("max_tuples", m.max_tuples);
  if (r.has("beta")) {
    detail::FieldReader b(r.child("beta"), r.where("beta"));
    b.get("samples", m.beta.samples);
    b.get("seed", m.beta.seed);
    b.get("gauss_order", m.beta.gauss_order);
    b.finish();
  }
  r.finish();
  return m;
}

/// Model-specific consistency checks with field-addressed messages.
inline void validate_model(const ModelSpec& m, const std::string& path = "model") {
  auto fail = [&](const char* field, const std::string& msg) { throw ConfigError(path + "." + field + ": " + msg); };
  if (m.d < 1 || m.d > kMaxDim) fail("d", "must be between 1 and " + std::to_string(kMaxDim));
  switch (m.kind) {
    case ModelKind::gilbert_voronoi:
      if (m.d < 2) fail("d", "gilbert_voronoi requires d >= 2");
      break;
    case ModelKind::hyperplane_simplices:
      if (m.d < 2 || m.d > 3) fail("d", "hyperplane_simplices supports d = 2 or 3");
      if (!(m.r >= 1.0)) fail("r", "distance exponent must be >= 1");
      break;
    case ModelKind::flat_triangles:
      if (m.d != 2) fail("d", "flat_triangles is planar (d = 2)");
      break;
    case ModelKind::kflat_distance:
      if (m.k < 1) fail("k", "must be >= 1");
      if (2 * m.k >= m.d) fail("k", "non-intersecting regime requires 2k < d (k = " + std::to_string(m.k) +
                                        ", d = " + std::to_string(m.d) + ")");
      if (!(m.a > 0.0)) fail("a", "must be positive");
      if (m.process != ProcessKind::poisson) fail("process", "kflat_distance is only defined for the poisson process");
      if (!(m.y_max >= 0.0)) fail("y_max", "must be >= 0");
      break;
  }
  if (m.max_tuples < 1) fail("max_tuples", "must be positive");
  if (m.beta.samples < 2) fail("beta.samples", "must be >= 2");
  if (m.beta.gauss_order < 1) fail("beta.gauss_order", "must be >= 1");
  detail::with_field(path + ".body", [&] { return parse_body(m.body, m.d); });
  if (m.kind == ModelKind::flat_triangles)
    detail::with_field(path + ".density", [&] { return parse_density(m.density, parse_body(m.body, m.d)); });
  if (m.kind == ModelKind::kflat_distance)
    detail::with_field(path + ".directions", [&] {
      const DirectionLaw law = parse_directions(m.directions);
      law.validate(m.d, m.k);
      return 0;
    });
}

inline RunConfig parse_config(const Json& j) {
  RunConfig c;
  detail::FieldReader r(j, "");
  if (r.has("model")) c.plan.model = parse_model(r.child("model"), "model");
  if (r.has("experiment")) {
    detail::FieldReader e(r.child("experiment"), "experiment");
    e.get("grid", c.plan.grid);
    e.get("replications", c.plan.replications);
    e.get("m", c.plan.m_list);
    e.get("y_grid", c.plan.y_grid);
    e.get("seed", c.plan.seed);
    e.get("threads", c.plan.threads);
    e.get("keep_samples", c.plan.keep_samples);
    e.finish();
  }
  if (r.has("bounds")) {
    detail::FieldReader b(r.child("bounds"), "bounds");
    BoundPolicy& p = c.plan.bound_policy;
    b.get("enabled", c.plan.estimate_bounds);
    b.get("y", c.plan.bound_y);
    b.get("min_samples", p.min_samples);
    b.get("max_samples", p.max_samples);
    b.get("target_hits", p.target_hits);
    b.get("outer_samples", p.outer_samples);
    b.get("min_inner", p.min_inner);
    b.get("max_inner", p.max_inner);
    b.get("seed", p.seed);
    b.get("localize", p.localize);
    b.finish();
  }
  if (r.has("output")) {
    detail::FieldReader o(r.child("output"), "output");
    o.get("report", c.report_path);
    o.get("tables", c.table_dir);
    o.finish();
  }
  r.finish();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw RuntimeError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw RuntimeError("write to '" + path + "' failed");
}

inline RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const RuntimeError& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_config_text(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void validate_config(const RunConfig& c) {
  validate_model(c.plan.model);
  detail::with_field("experiment", [&] {
    validate_plan(c.plan);
    return 0;
  });
}

// ---------------------------------------------------------------------------
// Report

inline Json render_limit(const WeibullLimit& l) {
  return Json{{"beta", l.beta},         {"tau", l.tau},         {"gamma", l.gamma},
              {"beta_se", l.beta_se},   {"provenance", to_string(l.provenance)},
              {"samples", l.samples},   {"excluded", l.excluded}};
}

inline WeibullLimit parse_limit(const Json& j) {
  WeibullLimit l;
  detail::FieldReader r(j, "limit");
  r.get_number("beta", l.beta);
  r.get_number("tau", l.tau);
  r.get_number("gamma", l.gamma);
  r.get_number("beta_se", l.beta_se);
  std::string prov = to_string(l.provenance);
  r.get("provenance", prov);
  l.provenance = provenance_from_string(prov);
  r.get("samples", l.samples);
  r.get("excluded", l.excluded);
  r.finish();
  return l;
}

inline Json render_bound(const BoundEstimate& b) {
  return Json{{"model", b.model},
              {"process", to_string(b.process)},
              {"parameter", b.parameter},
              {"y1", b.y1},
              {"y2", b.y2},
              {"alpha", b.alpha},
              {"alpha_se", b.alpha_se},
              {"r", b.r},
              {"r_se", b.r_se},
              {"r_ell", b.r_ell},
              {"alpha_samples", b.alpha_samples},
              {"r_samples", b.r_samples},
              {"alpha_no_hit", b.alpha_no_hit},
              {"r_no_hit", b.r_no_hit},
              {"seed", b.seed}};
}

inline BoundEstimate parse_bound(const Json& j) {
  BoundEstimate b;
  detail::FieldReader r(j, "bound");
  std::string process = to_string(b.process);
  r.get("model", b.model);
  r.get("process", process);
  b.process = process_from_string(process);
  r.get_number("parameter", b.parameter);
  r.get_number("y1", b.y1);
  r.get_number("y2", b.y2);
  r.get_number("alpha", b.alpha);
  r.get_number("alpha_se", b.alpha_se);
  r.get_number("r", b.r);
  r.get_number("r_se", b.r_se);
  r.get("r_ell", b.r_ell);
  r.get("alpha_samples", b.alpha_samples);
  r.get("r_samples", b.r_samples);
  r.get("alpha_no_hit", b.alpha_no_hit);
  r.get("r_no_hit", b.r_no_hit);
  r.get("seed", b.seed);
  r.finish();
  return b;
}

/// The report embeds the full plan (output paths are not part of it).
inline Json render_report(const ExperimentReport& rep) {
  Json tables = Json::array();
  for (const auto& t : rep.tables)
    tables.push_back(Json{{"param", t.param},
                          {"m", t.m},
                          {"finite", t.finite},
                          {"infinite", t.infinite},
                          {"ks", t.ks},
                          {"mean_gap", t.mean_gap},
                          {"empirical_survival", detail::numbers(t.empirical_survival)},
                          {"limit_survival", detail::numbers(t.limit_survival)},
                          {"gap", detail::numbers(t.gap)},
                          {"sample", detail::numbers(t.sample)}});
  Json bounds = Json::array();
  for (const auto& b : rep.bounds)
    bounds.push_back(
        Json{{"param", b.param}, {"y", b.y}, {"nu", b.nu}, {"shape", b.shape}, {"estimate", render_bound(b.estimate)}});
  Json rate = nullptr;
  if (rep.rate)
    rate = Json{{"slope", detail::number(rep.rate->slope)},
                {"intercept", detail::number(rep.rate->intercept)},
                {"r_squared", detail::number(rep.rate->r_squared)},
                {"used", rep.rate->used},
                {"warnings", rep.rate->warnings}};
  RunConfig cfg;
  cfg.plan = rep.plan;
  Json config = render_config(cfg);
  config.erase("output");
  return Json{{"schema", rep.schema},
              {"version", rep.version},
              {"config", config},
              {"gamma", rep.gamma},
              {"limit", render_limit(rep.limit)},
              {"tables", tables},
              {"degenerate", rep.degenerate},
              {"deviations", detail::numbers(rep.deviations)},
              {"rate", rate},
              {"bounds", bounds},
              {"warnings", rep.warnings},
              {"timings", {{"threads", rep.threads_used}, {"wall_seconds", rep.wall_seconds}}}};
}

inline ExperimentReport parse_report(const Json& j) {
  ExperimentReport rep;
  detail::FieldReader r(j, "report");
  r.get("schema", rep.schema);
  if (rep.schema != kReportSchema) throw ConfigError("unsupported report schema '" + rep.schema + "'");
  r.get("version", rep.version);
  rep.plan = parse_config(r.child("config")).plan;
  r.get_number("gamma", rep.gamma);
  rep.limit = parse_limit(r.child("limit"));
  for (const auto& t : r.child("tables")) {
    OrderTable tab;
    detail::FieldReader f(t, "report.tables[]");
    f.get_number("param", tab.param);
    f.get("m", tab.m);
    f.get("finite", tab.finite);
    f.get("infinite", tab.infinite);
    f.get_number("ks", tab.ks);
    f.get_number("mean_gap", tab.mean_gap);
    tab.empirical_survival = detail::read_numbers(f.child("empirical_survival"), "empirical_survival");
    tab.limit_survival = detail::read_numbers(f.child("limit_survival"), "limit_survival");
    tab.gap = detail::read_numbers(f.child("gap"), "gap");
    tab.sample = detail::read_numbers(f.child("sample"), "sample");
    f.finish();
    rep.tables.push_back(std::move(tab));
  }
  r.get("degenerate", rep.degenerate);
  rep.deviations = detail::read_numbers(r.child("deviations"), "deviations");
  const Json& rate = r.child("rate");
  if (!rate.is_null()) {
    RateFit fit;
    detail::FieldReader f(rate, "report.rate");
    f.get_number("slope", fit.slope);
    f.get_number("intercept", fit.intercept);
    f.get_number("r_squared", fit.r_squared);
    f.get("used", fit.used);
    f.get("warnings", fit.warnings);
    f.finish();
    rep.rate = fit;
  }
  for (const auto& b : r.child("bounds")) {
    BoundRow row;
    detail::FieldReader f(b, "report.bounds[]");
    f.get_number("param", row.param);
    f.get_number("y", row.y);
    f.get_number("nu", row.nu);
    f.get_number("shape", row.shape);
    row.estimate = parse_bound(f.child("estimate"));
    f.finish();
    rep.bounds.push_back(std::move(row));
  }
  r.get("warnings", rep.warnings);
  if (r.has("timings")) {
    detail::FieldReader f(r.child("timings"), "report.timings");
    f.get("threads", rep.threads_used);
    f.get_number("wall_seconds", rep.wall_seconds);
    f.finish();
  }
  r.finish();
  return rep;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Plot table for one (t, m): header and one row per y-grid value.
inline std::string render_table_csv(const OrderTable& t, const std::vector<double>& y_grid) {
  std::string out = "y,empirical_survival,limit_survival,gap\n";
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    out += format_number(y_grid[i]) + "," + format_number(t.empirical_survival.at(i)) + "," +
           format_number(t.limit_survival.at(i)) + "," + format_number(t.gap.at(i)) + "\n";
  }
  return out;
}

inline std::string table_file_name(const OrderTable& t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "table_p%.12g_m%d.csv", t.param, t.m);
  return buf;
}

inline std::string default_table_dir(const std::string& report_path) {
  std::filesystem::path p(report_path);
  return (p.parent_path() / (p.stem().string() + "_tables")).string();
}

/// Writes the CSV tables into dir; returns the file paths.
inline std::vector<std::string> write_tables(const ExperimentReport& rep, const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& t : rep.tables) {
    const std::string path = (std::filesystem::path(dir) / table_file_name(t)).string();
    write_text_file(path, render_table_csv(t, rep.plan.y_grid));
    files.push_back(path);
  }
  return files;
}

/// Writes the JSON report and one CSV table per (t, m). Returns all paths written.
inline std::vector<std::string> write_report(const ExperimentReport& rep, const std::string& path,
                                             const std::string& table_dir = {}) {
  write_text_file(path, render_report(rep).dump(1) + "\n");
  std::vector<std::string> files{path};
  const auto tables = write_tables(rep, table_dir.empty() ? default_table_dir(path) : table_dir);
  files.insert(files.end(), tables.begin(), tables.end());
  return files;
}

/// A sampled configuration as JSON: points as coordinate rows, hyperplanes as
/// (normal, offset), flats as (basis columns, base point).
inline Json render_sample(const SampledConfiguration& c) {
  Json j{{"schema", "pplimit.sample/v1"},
         {"model", to_string(c.kind)},
         {"process", to_string(c.process)},
         {"parameter", c.parameter},
         {"seed", c.seed},
         {"size", c.size()}};
  auto vec = [](const auto& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  if (c.points.cols() > 0) {
    Json pts = Json::array();
    for (Eigen::Index i = 0; i < c.points.cols(); ++i) pts.push_back(vec(c.points.col(i)));
    j["points"] = std::move(pts);
  }
  if (!c.hyperplanes.empty()) {
    Json hs = Json::array();
    for (const Hyperplane& h : c.hyperplanes) hs.push_back({{"normal", vec(h.normal)}, {"offset", h.offset}});
    j["hyperplanes"] = std::move(hs);
  }
  if (!c.flats.empty()) {
    Json fs = Json::array();
    for (const AffineFlat& f : c.flats) {
      Json basis = Json::array();
      for (Eigen::Index i = 0; i < f.basis.cols(); ++i) basis.push_back(vec(f.basis.col(i)));
      fs.push_back({{"basis", std::move(basis)}, {"base", vec(f.base)}});
    }
    j["flats"] = std::move(fs);
  }
  return j;
}

inline ExperimentReport read_report(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_report(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": malformed report: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace pplimit
