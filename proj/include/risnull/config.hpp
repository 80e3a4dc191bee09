#pragma once

#include "risnull/channel_model.hpp"
#include "risnull/manifold_optimizer.hpp"
#include "risnull/nulling_solver.hpp"
#include "risnull/thresholds.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace risnull {

/// Bad key, bad value, or inconsistent combination in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(what + ": " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ChannelMode { ExactCascade, GaussianSurrogate, Geometric };

std::string to_string(ChannelMode mode);
ChannelMode parse_channel_mode(const std::string& s);

/// Everything a subcommand may need. Built from a flat JSON object whose
/// keys are listed in config_keys(); dB variants are converted here.
struct RunConfig {
  SystemConfig system;

  std::vector<int> n_grid;  // empty: subcommand picks a default grid
  std::vector<double> eta_grid;
  int trials = 200;
  ChannelMode mode = ChannelMode::ExactCascade;

  SolverOptions solver;
  RcgOptions rcg;
  double snr_low = 1e3;
  double snr_high = 1e6;

  // Threshold evaluation. L = 0 means L = GM(GM - 1) from the system.
  Index L = 0;
  double c = -0.5;
  double c1 = 2.0;
  double c2 = 2.0;
  std::optional<double> c_bar;

  // Theorem validators.
  std::string theorem = "all";
  double sigma = 1.0;
  double rho = 1.0;
  int restarts_torus = 4;

  int placements = 10000;
  int workers = 0;  // 0: RISNULL_WORKERS or hardware concurrency

  Index effective_L() const;
  ThresholdConfig threshold_config(double eta) const;
  /// eta_grid when given, else the system eta (or 0).
  std::vector<double> etas() const;
};

const std::vector<std::string>& config_keys();

/// Parses a JSON object; unknown keys and wrong types raise ConfigError.
RunConfig parse_config(const nlohmann::json& j);

/// Reads `path` (may be empty for defaults) and applies `key=value`
/// overrides in order. Values are parsed as JSON when possible, otherwise
/// taken as strings; `key=null` removes a key.
nlohmann::json load_config_json(const std::string& path, const std::vector<std::string>& overrides);

/// Inverse of parse_config for the fields that round-trip.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace risnull
