#pragma once

#include "risnull/channel_model.hpp"
#include "risnull/config.hpp"
#include "risnull/manifold_optimizer.hpp"
#include "risnull/nulling_solver.hpp"
#include "risnull/thresholds.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace risnull {

struct SweepSpec {
  SystemConfig base;  // G, M, K, sigmas; N and eta are taken from the grids
  std::vector<int> n_grid;
  std::vector<double> eta_grid;  // ignored in geometric mode
  int trials_per_point = 200;
  ChannelMode mode = ChannelMode::ExactCascade;
  std::uint64_t master_seed = 0;
  SolverOptions solver;
  GeometryScenario scenario = GeometryScenario::default_layout();
  std::string grid_source = "given";  // "given" or the name of a default grid

  void validate() const;
};

struct SweepPoint {
  int n = 0;
  int eta_index = 0;
  // Grid value, or in geometric mode the mean effective eta of the trials.
  double eta = 0.0;
  int trials = 0;
  int feasible = 0;
  double feasible_fraction = 0.0;
  double mean_normalized_residual = 0.0;
  double mean_iterations = 0.0;
  int rank_deficient = 0;
  int failures = 0;  // trials that raised; counted infeasible

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct Provenance {
  std::uint64_t master_seed = 0;
  std::string config_hash;  // FNV-1a 64 of the canonical sweep JSON, hex
  std::string channel_mode;
  std::string grid_source;
  std::vector<int> n_grid;
  std::vector<double> eta_grid;
  int trials_per_point = 0;
  std::string version;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Points ordered eta-major: index = eta_index * |N grid| + n index.
struct SweepResult {
  std::vector<SweepPoint> points;
  Provenance provenance;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Canonical JSON of the parts of a sweep setup that determine the output.
nlohmann::json canonical_spec_json(const SweepSpec& spec);
std::string fnv1a_hex(const std::string& text);

/// Runs every trial of every grid point; trials can be spread over
/// `workers` threads without changing the result.
SweepResult feasibility_sweep(const SweepSpec& spec, int workers = 1);

/// One sampled system from the sweep's channel family (N = n, eta = eta).
/// `measured_eta` receives the effective eta in geometric mode.
NullingSystem sample_sweep_system(const SweepSpec& spec, int n, double eta, Rng& rng,
                                  double* measured_eta = nullptr);

struct InstanceReport {
  int n = 0;
  Index L = 0;
  double eta = 0.0;
  SolveOutcome outcome;
  // Smallest |desired coefficient|^2 at the solution over all decoded users;
  // NaN for surrogate systems, which carry no desired links.
  double min_desired_gain = 0.0;
};

/// Single instance at spec.n_grid[0], spec.eta_grid[0] (trial 0 of point 0).
InstanceReport solve_instance(const SweepSpec& spec);

struct QuantileBoundary {
  double p = 0.0;
  std::vector<int> eta_index;
  std::vector<double> eta;
  std::vector<std::optional<int>> n;  // nullopt: no grid point reached p
};

/// Per eta, the smallest grid N whose feasible fraction is >= p.
QuantileBoundary quantile_boundary(const SweepResult& res, double p);

/// Default N grid for a sweep, from L up to 1.25x the refined threshold at
/// the largest eta (at least 2L + 8).
std::vector<int> default_n_grid(Index L, double eta_max, double c = -0.5);
/// 40, 44, ..., 200; used by the geometric scenario.
std::vector<int> default_geometric_n_grid();

struct RateSpec {
  SystemConfig base;  // eta must be set; N taken from n_grid
  std::vector<int> n_grid;
  int trials = 20;
  std::uint64_t master_seed = 0;
  SolverOptions solver;
  RcgOptions rcg;
  double snr_low = 1e3;
  double snr_high = 1e6;
};

struct RatePoint {
  int n = 0;
  int trials = 0;
  double mean_sum_rate = 0.0;  // W at the configured power, bits/s/Hz
  double mean_dof = 0.0;
  double se_dof = 0.0;
  double feasible_fraction = 0.0;  // nulling feasibility of the start point
  int low_confidence = 0;
  int failures = 0;
};

/// Per N: sample channels, null interference by alternating projection,
/// refine with RCG at the configured power to get W, and at the high end
/// of the SNR grid to get the DoF slope.
std::vector<RatePoint> rate_sweep(const RateSpec& spec, int workers = 1);

struct GeometrySummary {
  int placements = 0;
  double mean_eta = 0.0;
  double se_eta = 0.0;
  std::vector<double> cell_mean_eta;
};

GeometrySummary geometry_eta(const GeometryScenario& scn, const SystemConfig& config, int placements,
                             std::uint64_t seed);

/// Specs from a parsed run configuration. Missing grids fall back to the
/// defaults above (recorded in the provenance grid_source).
SweepSpec sweep_spec_from(const RunConfig& cfg);
/// N grid defaults to powers of two from 1 to 128.
RateSpec rate_spec_from(const RunConfig& cfg, int trials);

// Tabular output shared by all subcommands.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  nlohmann::json provenance = nlohmann::json::object();
};

enum class Format { Csv, Json };
Format parse_format(const std::string& s);

std::string to_csv(const Table& t);
/// {"provenance": ..., "columns": [...], "rows": [{col: value, ...}, ...]}
nlohmann::json to_json(const Table& t);
/// Writes csv or json; "-" writes to stdout. Throws IoError.
void export_table(const Table& t, const std::string& path, Format format);

/// Pretty-printed JSON to `path` ("-" for stdout). Throws IoError.
void export_json(const nlohmann::json& j, const std::string& path);

Table sweep_table(const SweepResult& res);
Table boundary_table(const SweepResult& res);
Table rate_table(const std::vector<RatePoint>& points);
Table threshold_table(const std::vector<ThresholdReport>& reports);

nlohmann::json sweep_result_to_json(const SweepResult& res);
SweepResult sweep_result_from_json(const nlohmann::json& j);

/// Writes a standalone matplotlib script that plots feasible fraction
/// against N, one line per eta, from the CSV at `csv_path`.
void emit_plot_script(const SweepResult& res, const std::string& csv_path,
                      const std::string& script_path);

}  // namespace risnull
