// SPDX-License-Identifier: Apache-2.0
//
// pplimit: command-line front end.
//
//   pplimit sample  sample one configuration and write it as JSON
//   pplimit beta    print the limit law (beta, tau, gamma, SE)
//   pplimit bounds  print alpha / r estimates
//   pplimit run     run an experiment and write the report and tables
//   pplimit report  render an existing report to CSV tables
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pplimit/pplimit.hpp"

namespace {

using namespace pplimit;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Command-line values; an option overrides the config only when given.
struct Options {
  std::string config_path;
  bool print_config = false;

  std::string model, process, body, density, directions, pair_statistic;
  int d = 0, k = 0;
  double r = 0.0, a = 0.0, y_max = 0.0;
  bool haar = false;
  std::size_t beta_samples = 0, max_tuples = 0;
  std::uint64_t beta_seed = 0;
  int gauss_order = 0;
  unsigned threads = 0;

  std::vector<double> grid;
  std::size_t replications = 0;
  std::vector<int> m_list;
  std::vector<double> y_grid;
  std::uint64_t seed = 0;
  bool no_samples = false;

  bool bounds = false;
  std::vector<double> bound_y;
  std::size_t min_samples = 0, max_samples = 0, outer_samples = 0;
  double target_hits = 0.0;
  bool no_localize = false;

  std::string output, tables, input;
  double param = 0.0;
  bool json = false;
};

struct Registered {
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  template <class T, class Apply>
  void add(CLI::App* app, const std::string& name, T& target, const std::string& help, Apply apply) {
    CLI::Option* opt = app->add_option(name, target, help);
    setters.emplace_back(opt, [apply](RunConfig& c) { apply(c); });
  }
  void add_flag(CLI::App* app, const std::string& name, bool& target, const std::string& help,
                std::function<void(RunConfig&)> apply) {
    CLI::Option* opt = app->add_flag(name, target, help);
    setters.emplace_back(opt, std::move(apply));
  }
  void apply(RunConfig& c) const {
    for (const auto& [opt, f] : setters)
      if (opt->count() > 0) f(c);
  }
};

void add_config_options(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_flag("--print-config", o.print_config, "print the effective config and exit");
}

void add_model_options(CLI::App* app, Options& o, Registered& reg) {
  reg.add(app, "--model", o.model, "gilbert_voronoi | hyperplane_simplices | flat_triangles | kflat_distance",
          [&o](RunConfig& c) { c.plan.model.kind = model_from_string(o.model); });
  reg.add(app, "--process", o.process, "poisson | binomial",
          [&o](RunConfig& c) { c.plan.model.process = process_from_string(o.process); });
  reg.add(app, "--d", o.d, "ambient dimension", [&o](RunConfig& c) { c.plan.model.d = o.d; });
  reg.add(app, "--k", o.k, "flat dimension (kflat_distance)", [&o](RunConfig& c) { c.plan.model.k = o.k; });
  reg.add(app, "--r", o.r, "distance exponent (hyperplane_simplices)", [&o](RunConfig& c) { c.plan.model.r = o.r; });
  reg.add(app, "--a", o.a, "distance power (kflat_distance)", [&o](RunConfig& c) { c.plan.model.a = o.a; });
  reg.add(app, "--body", o.body, "window, e.g. unit-square, unit-cube, box:0,0;2,1, ball:0,0;1",
          [&o](RunConfig& c) { c.plan.model.body = o.body; });
  reg.add(app, "--density", o.density, "uniform | linear:g1,g2 (flat_triangles)",
          [&o](RunConfig& c) { c.plan.model.density = o.density; });
  reg.add(app, "--directions", o.directions, "haar | axial:axis,strength (kflat_distance)",
          [&o](RunConfig& c) { c.plan.model.directions = o.directions; });
  reg.add_flag(app, "--haar", o.haar, "Haar direction law (same as --directions haar)",
               [](RunConfig& c) { c.plan.model.directions = "haar"; });
  reg.add(app, "--pair-statistic", o.pair_statistic, "inradius | edge (gilbert_voronoi)",
          [&o](RunConfig& c) { c.plan.model.pair_statistic = pair_statistic_from_string(o.pair_statistic); });
  reg.add(app, "--y-max", o.y_max, "censoring level (kflat_distance); 0 picks a default",
          [&o](RunConfig& c) { c.plan.model.y_max = o.y_max; });
  reg.add(app, "--beta-samples", o.beta_samples, "Monte Carlo samples for beta",
          [&o](RunConfig& c) { c.plan.model.beta.samples = o.beta_samples; });
  reg.add(app, "--beta-seed", o.beta_seed, "seed for the beta Monte Carlo",
          [&o](RunConfig& c) { c.plan.model.beta.seed = o.beta_seed; });
  reg.add(app, "--gauss-order", o.gauss_order, "Gauss-Legendre order for beta quadrature",
          [&o](RunConfig& c) { c.plan.model.beta.gauss_order = o.gauss_order; });
  reg.add(app, "--max-tuples", o.max_tuples, "cap on enumerated tuples per replication",
          [&o](RunConfig& c) { c.plan.model.max_tuples = o.max_tuples; });
}

void add_threads_option(CLI::App* app, Options& o, Registered& reg) {
  reg.add(app, "--threads", o.threads, "thread budget (0: PPLIMIT_THREADS or hardware)",
          [&o](RunConfig& c) { c.plan.threads = o.threads; });
}

void add_bound_options(CLI::App* app, Options& o, Registered& reg) {
  reg.add(app, "--min-samples", o.min_samples, "minimum Monte Carlo samples for alpha",
          [&o](RunConfig& c) { c.plan.bound_policy.min_samples = o.min_samples; });
  reg.add(app, "--max-samples", o.max_samples, "maximum Monte Carlo samples for alpha",
          [&o](RunConfig& c) { c.plan.bound_policy.max_samples = o.max_samples; });
  reg.add(app, "--target-hits", o.target_hits, "hits aimed for when sizing the alpha sample",
          [&o](RunConfig& c) { c.plan.bound_policy.target_hits = o.target_hits; });
  reg.add(app, "--outer-samples", o.outer_samples, "outer draws for r",
          [&o](RunConfig& c) { c.plan.bound_policy.outer_samples = o.outer_samples; });
  reg.add_flag(app, "--no-localize", o.no_localize, "disable the localized pair proposal",
               [](RunConfig& c) { c.plan.bound_policy.localize = false; });
}

RunConfig merged_config(const Options& o, const Registered& reg) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  reg.apply(c);
  return c;
}

void print_config(const RunConfig& c) { std::cout << render_config(c).dump(2) << "\n"; }

std::string fmt(double v, const char* spec = "%.15g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int cmd_sample(const Options& o, const RunConfig& c) {
  validate_model(c.plan.model);
  const Model model(c.plan.model);
  const SampledConfiguration s = model.sample(o.param, o.seed);
  const std::string text = render_sample(s).dump(1) + "\n";
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
  } else {
    write_text_file(o.output, text);
    std::cerr << "wrote " << s.size() << " elements to " << o.output << "\n";
  }
  return 0;
}

int cmd_beta(const Options& o, const RunConfig& c) {
  validate_model(c.plan.model);
  const Model model(c.plan.model);
  const WeibullLimit lim = model.limit();
  if (o.json) {
    Json j = render_limit(lim);
    j["model"] = model.tag();
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "model      " << model.tag() << " (" << to_string(c.plan.model.process) << ")\n"
            << "beta       " << fmt(lim.beta) << "\n"
            << "tau        " << fmt(lim.tau) << "\n"
            << "gamma      " << fmt(lim.gamma) << "\n"
            << "beta_se    " << fmt(lim.beta_se) << "\n"
            << "provenance " << to_string(lim.provenance) << "\n";
  if (lim.samples > 0) std::cout << "samples    " << lim.samples << "\n";
  if (lim.excluded > 0) std::cout << "excluded   " << lim.excluded << "\n";
  return 0;
}

int cmd_bounds(const Options& o, const RunConfig& c) {
  validate_model(c.plan.model);
  if (o.bound_y.empty()) throw ConfigError("bounds: --y needs at least one value");
  const Model model(c.plan.model);
  const WeibullLimit lim = model.limit();
  Json rows = Json::array();
  if (!o.json) std::cout << "y,alpha,alpha_se,nu,r,r_se,r_ell,shape\n";
  for (std::size_t i = 0; i < o.bound_y.size(); ++i) {
    const double y = o.bound_y[i];
    BoundPolicy p = c.plan.bound_policy;
    p.seed = derive_seed(c.plan.seed, {0xb0, 0, i});
    const BoundEstimate e = model.bounds(o.param, y, p);
    const double nu = lim.beta * std::pow(y, lim.tau);
    const double shape = c.plan.model.process == ProcessKind::poisson ? theorem_bound_shape(e.alpha, e.r, nu)
                                                                      : theorem_bound_shape(e.alpha, e.r, nu, o.param);
    if (o.json) {
      Json j = render_bound(e);
      j["nu"] = nu;
      j["shape"] = shape;
      rows.push_back(std::move(j));
    } else {
      std::cout << format_number(y) << "," << format_number(e.alpha) << "," << format_number(e.alpha_se) << ","
                << format_number(nu) << "," << format_number(e.r) << "," << format_number(e.r_se) << "," << e.r_ell
                << "," << format_number(shape) << "\n";
    }
  }
  if (o.json) std::cout << rows.dump(2) << "\n";
  return 0;
}

int cmd_run(const RunConfig& c) {
  validate_config(c);
  const ExperimentReport rep = run_experiment(c.plan);
  const std::vector<std::string> files = write_report(rep, c.report_path, c.table_dir);
  std::cout << "grid,m,ks,mean_gap,finite,infinite\n";
  for (const OrderTable& t : rep.tables)
    std::cout << format_number(t.param) << "," << t.m << "," << format_number(t.ks) << "," << format_number(t.mean_gap)
              << "," << t.finite << "," << t.infinite << "\n";
  if (rep.rate)
    std::cout << "rate slope " << format_number(rep.rate->slope) << " r2 " << format_number(rep.rate->r_squared) << "\n";
  for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "wrote " << files.size() << " files (report " << c.report_path << ") in "
            << fmt(rep.wall_seconds, "%.3g") << " s on " << rep.threads_used << " threads\n";
  return 0;
}

int cmd_report(const Options& o) {
  const ExperimentReport rep = read_report(o.input);
  const std::string dir = o.tables.empty() ? default_table_dir(o.input) : o.tables;
  const std::vector<std::string> files = write_tables(rep, dir);
  std::cout << "model " << to_string(rep.plan.model.kind) << " schema " << rep.schema << " version " << rep.version << "\n";
  for (const std::string& f : files) std::cout << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit laws of order statistics of Poisson and binomial U-statistics"};
  app.set_version_flag("--version", pplimit::kVersion);
  app.require_subcommand(1);
  Options o;

  Registered sample_reg, beta_reg, bounds_reg, run_reg;

  CLI::App* sample = app.add_subcommand("sample", "sample one configuration");
  add_config_options(sample, o);
  add_model_options(sample, o, sample_reg);
  sample->add_option("--param,-t", o.param, "intensity t (poisson) or size n (binomial)")->required();
  sample->add_option("--seed", o.seed, "seed")->default_val(1);
  sample->add_option("--output,-o", o.output, "output file (default: stdout)");

  CLI::App* beta = app.add_subcommand("beta", "print the limit law");
  add_config_options(beta, o);
  add_model_options(beta, o, beta_reg);
  beta->add_flag("--json", o.json, "JSON output");

  CLI::App* bounds = app.add_subcommand("bounds", "estimate alpha_t(0, y) and r_t(y)");
  add_config_options(bounds, o);
  add_model_options(bounds, o, bounds_reg);
  add_bound_options(bounds, o, bounds_reg);
  bounds->add_option("--param,-t", o.param, "intensity t (poisson) or size n (binomial)")->required();
  bounds->add_option("--y", o.bound_y, "rescaled thresholds")->required();
  bounds_reg.add(bounds, "--seed", o.seed, "master seed", [&o](RunConfig& c) { c.plan.seed = o.seed; });
  bounds->add_flag("--json", o.json, "JSON output");

  CLI::App* run = app.add_subcommand("run", "run an experiment");
  add_config_options(run, o);
  add_model_options(run, o, run_reg);
  add_threads_option(run, o, run_reg);
  add_bound_options(run, o, run_reg);
  run_reg.add(run, "--grid", o.grid, "t values (poisson) or n values (binomial)",
              [&o](RunConfig& c) { c.plan.grid = o.grid; });
  run_reg.add(run, "--replications,-R", o.replications, "replications per grid value",
              [&o](RunConfig& c) { c.plan.replications = o.replications; });
  run_reg.add(run, "--m", o.m_list, "orders m", [&o](RunConfig& c) { c.plan.m_list = o.m_list; });
  run_reg.add(run, "--y-grid", o.y_grid, "rescaled thresholds for the survival tables",
              [&o](RunConfig& c) { c.plan.y_grid = o.y_grid; });
  run_reg.add(run, "--seed", o.seed, "master seed", [&o](RunConfig& c) { c.plan.seed = o.seed; });
  run_reg.add_flag(run, "--no-samples", o.no_samples, "do not store ECDF samples in the report",
                   [](RunConfig& c) { c.plan.keep_samples = false; });
  run_reg.add_flag(run, "--bounds", o.bounds, "estimate alpha and r at each grid value",
                   [](RunConfig& c) { c.plan.estimate_bounds = true; });
  run_reg.add(run, "--bound-y", o.bound_y, "thresholds for the bound estimates (default: y-grid)",
              [&o](RunConfig& c) { c.plan.bound_y = o.bound_y; });
  run_reg.add(run, "--output,-o", o.output, "report path", [&o](RunConfig& c) { c.report_path = o.output; });
  run_reg.add(run, "--tables", o.tables, "table directory (default: <report stem>_tables)",
              [&o](RunConfig& c) { c.table_dir = o.tables; });

  CLI::App* report = app.add_subcommand("report", "render a report to CSV tables");
  report->add_option("--input,-i", o.input, "report file")->required();
  report->add_option("--tables", o.tables, "table directory (default: <report stem>_tables)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    auto with = [&](const Registered& reg, auto&& fn) {
      const RunConfig c = merged_config(o, reg);
      if (o.print_config) {
        print_config(c);
        return 0;
      }
      return fn(c);
    };
    if (*sample) return with(sample_reg, [&](const RunConfig& c) { return cmd_sample(o, c); });
    if (*beta) return with(beta_reg, [&](const RunConfig& c) { return cmd_beta(o, c); });
    if (*bounds) return with(bounds_reg, [&](const RunConfig& c) { return cmd_bounds(o, c); });
    if (*run) return with(run_reg, [&](const RunConfig& c) { return cmd_run(c); });
    if (*report) return cmd_report(o);
  } catch (const pplimit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
