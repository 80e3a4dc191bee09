// risnull: command-line front end for threshold evaluation, nulling sweeps,
// rate curves and the Monte Carlo validators.

#include "risnull/config.hpp"
#include "risnull/harness.hpp"
#include "risnull/parallel.hpp"
#include "risnull/thresholds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace risnull;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct Common {
  std::string config;
  std::vector<std::string> set;
  std::string out = "-";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--set", c.set, "Override a config key (key=value), repeatable");
  cmd->add_option("--out", c.out, "Output path, '-' for stdout");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", c.seed, "Master seed (overrides master_seed)");
  cmd->add_option("--workers", c.workers, "Worker threads (overrides RISNULL_WORKERS)")
      ->check(CLI::PositiveNumber);
}

struct Loaded {
  json raw;
  RunConfig cfg;
  int workers = 1;
  Format format = Format::Csv;
};

Loaded load(const Common& c) {
  Loaded l;
  l.raw = load_config_json(c.config, c.set);
  if (c.seed) l.raw["master_seed"] = *c.seed;
  l.cfg = parse_config(l.raw);
  if (c.workers) {
    l.workers = *c.workers;
  } else if (l.cfg.workers > 0) {
    l.workers = l.cfg.workers;
  } else {
    l.workers = default_worker_count();
  }
  l.format = parse_format(c.format);
  return l;
}

int run_thresholds(const Common& c) {
  const Loaded l = load(c);
  std::vector<ThresholdReport> reports;
  for (double eta : l.cfg.etas()) reports.push_back(threshold_report(l.cfg.threshold_config(eta)));
  Table t = threshold_table(reports);
  t.provenance = {{"config", to_json(l.cfg)}};
  export_table(t, c.out, l.format);
  return kExitOk;
}

int run_solve(const Common& c) {
  const Loaded l = load(c);
  SweepSpec spec = sweep_spec_from(l.cfg);
  spec.n_grid = {l.cfg.system.elements};
  const InstanceReport rep = solve_instance(spec);
  const SolveOutcome& o = rep.outcome;
  Table t;
  t.columns = {"N", "L", "eta", "feasible", "residual", "normalized_residual", "iterations",
               "restarts_used", "rank_deficient", "min_desired_gain"};
  t.rows.push_back({rep.n, rep.L, rep.eta, o.feasible, o.residual, o.normalized_residual, o.iterations,
                    o.restarts_used, o.rank_deficient,
                    std::isfinite(rep.min_desired_gain) ? json(rep.min_desired_gain) : json(nullptr)});
  t.provenance = {{"master_seed", spec.master_seed},
                  {"channel_mode", to_string(spec.mode)},
                  {"config_hash", fnv1a_hex(canonical_spec_json(spec).dump())}};
  export_table(t, c.out, l.format);
  return kExitOk;
}

int run_sweep(const Common& c, const std::string& boundary_out, const std::string& plot_script,
              const std::string& plot_csv) {
  const Loaded l = load(c);
  const SweepSpec spec = sweep_spec_from(l.cfg);
  const SweepResult res = feasibility_sweep(spec, l.workers);
  if (l.format == Format::Csv) {
    export_table(sweep_table(res), c.out, Format::Csv);
  } else {
    export_json(sweep_result_to_json(res), c.out);
  }
  if (!boundary_out.empty()) export_table(boundary_table(res), boundary_out, l.format);
  if (!plot_script.empty()) {
    emit_plot_script(res, plot_csv.empty() ? (c.out == "-" ? "sweep.csv" : c.out) : plot_csv, plot_script);
  }
  return kExitOk;
}

int run_rate(const Common& c) {
  const Loaded l = load(c);
  const int trials = l.raw.contains("trials") ? l.cfg.trials : 20;
  const RateSpec spec = rate_spec_from(l.cfg, trials);
  Table t = rate_table(rate_sweep(spec, l.workers));
  t.provenance = {{"master_seed", spec.master_seed}, {"config", to_json(l.cfg)}};
  export_table(t, c.out, l.format);
  return kExitOk;
}

int run_geo(const Common& c, const std::string& sweep_out) {
  Loaded l = load(c);
  RunConfig& cfg = l.cfg;
  const GeometryScenario scn = GeometryScenario::default_layout();
  const GeometrySummary g = geometry_eta(scn, cfg.system, cfg.placements, cfg.system.master_seed);
  const ThresholdReport th = threshold_report(cfg.threshold_config(g.mean_eta));

  std::optional<int> boundary;
  if (!sweep_out.empty()) {
    cfg.mode = ChannelMode::Geometric;
    const SweepSpec spec = sweep_spec_from(cfg);
    const SweepResult res = feasibility_sweep(spec, l.workers);
    export_table(sweep_table(res), sweep_out, l.format);
    boundary = quantile_boundary(res, 0.01).n.front();
  }

  Table t;
  t.columns = {"placements", "mean_eta", "se_eta", "L", "n_necessary_gordon", "n_sufficient",
               "n_refined", "n_p01_measured"};
  for (std::size_t i = 0; i < g.cell_mean_eta.size(); ++i) {
    t.columns.push_back("cell" + std::to_string(i) + "_mean_eta");
  }
  std::vector<json> row = {g.placements, g.mean_eta, g.se_eta, th.L,
                           th.n_necessary_gordon, th.n_sufficient, th.n_refined,
                           boundary ? json(*boundary) : json(nullptr)};
  for (double e : g.cell_mean_eta) row.push_back(e);
  t.rows.push_back(row);
  t.provenance = {{"master_seed", cfg.system.master_seed}};
  export_table(t, c.out, l.format);
  return kExitOk;
}

int run_validate(const Common& c) {
  const Loaded l = load(c);
  const RunConfig& cfg = l.cfg;
  const std::uint64_t seed = cfg.system.master_seed;
  const Index L = cfg.effective_L();
  const Index N = cfg.system.elements;
  const bool all = cfg.theorem == "all";
  const int trials = l.raw.contains("trials") ? cfg.trials : 100;

  Table t;
  t.columns = {"theorem", "quantity", "L", "N", "trials", "empirical", "standard_error",
               "bound", "relation", "passed", "nonconverged"};
  if (all || cfg.theorem == "2") {
    const GordonValidation v =
        validate_theorem2(L, N, cfg.sigma, trials, seed, l.workers, cfg.restarts_torus);
    auto add = [&](const char* q, double emp, double se, double bound, const char* rel, bool ok) {
      t.rows.push_back({2, q, L, N, trials, emp, se, bound, rel, ok, v.nonconverged});
    };
    add("torus_min", v.torus_mean_min, v.torus_se_min, v.torus_bound.lower, ">=",
        v.torus_mean_min >= v.torus_bound.lower - v.torus_se_min);
    add("torus_max", v.torus_mean_max, v.torus_se_max, v.torus_bound.upper, "<=",
        v.torus_mean_max <= v.torus_bound.upper + v.torus_se_max);
    add("sphere_min", v.sphere_mean_min, v.sphere_se_min, v.sphere_bound.lower, ">=",
        v.sphere_mean_min >= v.sphere_bound.lower - v.sphere_se_min);
    add("sphere_max", v.sphere_mean_max, v.sphere_se_max, v.sphere_bound.upper, "<=",
        v.sphere_mean_max <= v.sphere_bound.upper + v.sphere_se_max);
  }
  if (all || cfg.theorem == "3") {
    const NormValidation v = validate_theorem3(L, cfg.sigma, std::max(trials, 2), seed, l.workers);
    t.rows.push_back({3, "mean_norm", L, nullptr, v.trials, v.empirical_mean, v.standard_error,
                      v.reference, L >= 25 ? "within 1%" : "~exact", v.passed, nullptr});
  }
  if (all || cfg.theorem == "4") {
    const NormValidation v = validate_theorem4(L, N, cfg.rho, std::max(trials, 2), seed, l.workers);
    t.rows.push_back({4, "mean_pinv_norm", L, N, v.trials, v.empirical_mean, v.standard_error,
                      v.reference, "<=", v.passed, nullptr});
  }
  t.provenance = {{"master_seed", seed}};
  export_table(t, c.out, l.format);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS interference-nulling experiments"};
  app.require_subcommand(1);

  Common th_opts, solve_opts, sweep_opts, rate_opts, geo_opts, val_opts;
  std::string boundary_out, plot_script, plot_csv, geo_sweep_out;

  auto* th = app.add_subcommand("thresholds", "Closed-form element-count thresholds");
  add_common(th, th_opts);
  auto* solve = app.add_subcommand("solve", "Solve one nulling instance");
  add_common(solve, solve_opts);
  auto* sweep = app.add_subcommand("sweep", "Feasibility sweep over N and eta");
  add_common(sweep, sweep_opts);
  sweep->add_option("--boundaries", boundary_out, "Also write the 1/50/99% boundaries here");
  sweep->add_option("--plot-script", plot_script, "Also write a matplotlib script here");
  sweep->add_option("--plot-csv", plot_csv, "CSV path the plot script reads (default: --out)");
  auto* rate = app.add_subcommand("rate", "Sum rate and DoF against N");
  add_common(rate, rate_opts);
  auto* geo = app.add_subcommand("geo", "Two-cell geometric layout: measured eta and thresholds");
  add_common(geo, geo_opts);
  geo->add_option("--sweep-out", geo_sweep_out, "Run a geometric feasibility sweep, write it here");
  auto* val = app.add_subcommand("validate", "Monte Carlo checks of the norm bounds");
  add_common(val, val_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*th) return run_thresholds(th_opts);
    if (*solve) return run_solve(solve_opts);
    if (*sweep) return run_sweep(sweep_opts, boundary_out, plot_script, plot_csv);
    if (*rate) return run_rate(rate_opts);
    if (*geo) return run_geo(geo_opts, geo_sweep_out);
    if (*val) return run_validate(val_opts);
  } catch (const IoError& e) {
    std::cerr << "risnull: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "risnull: invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "risnull: invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "risnull: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
