#include "risnull/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace risnull {

using nlohmann::json;

std::string to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::ExactCascade: return "exact-cascade";
    case ChannelMode::GaussianSurrogate: return "gaussian-surrogate";
    case ChannelMode::Geometric: return "geometric";
  }
  return "unknown";
}

ChannelMode parse_channel_mode(const std::string& s) {
  if (s == "exact-cascade" || s == "exact") return ChannelMode::ExactCascade;
  if (s == "gaussian-surrogate" || s == "surrogate") return ChannelMode::GaussianSurrogate;
  if (s == "geometric") return ChannelMode::Geometric;
  throw ConfigError("unknown channel_mode '" + s +
                    "' (expected exact-cascade, gaussian-surrogate or geometric)");
}

Index RunConfig::effective_L() const { return L > 0 ? L : system.nulling_rows(); }

ThresholdConfig RunConfig::threshold_config(double eta) const {
  ThresholdConfig t;
  t.L = effective_L();
  t.eta = eta;
  t.c = c;
  t.c1 = c1;
  t.c2 = c2;
  t.c_bar = c_bar;
  return t;
}

std::vector<double> RunConfig::etas() const {
  if (!eta_grid.empty()) return eta_grid;
  return {system.eta ? *system.eta : (system.sigma3 ? system.strength_ratio() : 0.0)};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "G", "M", "K", "N",
      "sigma1", "sigma2", "sigma3", "eta",
      "sigma1_db", "sigma2_db", "sigma3_db",
      "power_per_user", "power_dbm",
      "noise_variance", "noise_dbm", "noise_psd_dbm_hz",
      "bandwidth", "master_seed", "random_active_users",
      "n_grid", "n_min", "n_max", "n_step", "eta_grid", "trials", "channel_mode",
      "eps_feas", "max_iters", "restarts", "polish_tol",
      "rcg_eps", "rcg_max_iters", "snr_low", "snr_high",
      "L", "c", "c1", "c2", "c_bar",
      "theorem", "sigma", "rho", "restarts_torus",
      "placements", "workers",
  };
  return keys;
}

namespace {

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + j.at(key).dump());
  }
}

double get_real(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw ConfigError("config key '" + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError("config key '" + key + "' must be finite");
  return v;
}

int get_int(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d)) return static_cast<int>(d);
  }
  throw ConfigError("config key '" + key + "' must be an integer");
}

double amplitude_from_db(double db) { return std::pow(10.0, db / 20.0); }

void exclusive(const json& j, std::initializer_list<const char*> keys) {
  int n = 0;
  std::string names;
  for (const char* k : keys) {
    if (!names.empty()) names += ", ";
    names += k;
    if (j.contains(k)) ++n;
  }
  if (n > 1) throw ConfigError("at most one of {" + names + "} may be set");
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  exclusive(j, {"sigma1", "sigma1_db"});
  exclusive(j, {"sigma2", "sigma2_db"});
  exclusive(j, {"sigma3", "sigma3_db", "eta"});
  exclusive(j, {"power_per_user", "power_dbm"});
  exclusive(j, {"noise_variance", "noise_dbm", "noise_psd_dbm_hz"});
  exclusive(j, {"n_grid", "n_min"});

  RunConfig cfg;
  SystemConfig& s = cfg.system;
  s.eta = 0.0;
  if (j.contains("G")) s.cells = get_int(j, "G");
  if (j.contains("M")) s.antennas = get_int(j, "M");
  if (j.contains("K")) s.users = get_int(j, "K");
  if (j.contains("N")) s.elements = get_int(j, "N");
  if (j.contains("sigma1")) s.sigma1 = get_real(j, "sigma1");
  if (j.contains("sigma1_db")) s.sigma1 = amplitude_from_db(get_real(j, "sigma1_db"));
  if (j.contains("sigma2")) s.sigma2 = get_real(j, "sigma2");
  if (j.contains("sigma2_db")) s.sigma2 = amplitude_from_db(get_real(j, "sigma2_db"));
  if (j.contains("sigma3")) {
    s.sigma3 = get_real(j, "sigma3");
    s.eta.reset();
  }
  if (j.contains("sigma3_db")) {
    s.sigma3 = amplitude_from_db(get_real(j, "sigma3_db"));
    s.eta.reset();
  }
  if (j.contains("eta")) s.eta = get_real(j, "eta");
  if (j.contains("bandwidth")) s.bandwidth = get_real(j, "bandwidth");
  if (j.contains("power_per_user")) s.power_per_user = get_real(j, "power_per_user");
  if (j.contains("power_dbm")) s.power_per_user = dbm_to_watts(get_real(j, "power_dbm"));
  if (j.contains("noise_variance")) s.noise_variance = get_real(j, "noise_variance");
  if (j.contains("noise_dbm")) s.noise_variance = dbm_to_watts(get_real(j, "noise_dbm"));
  if (j.contains("noise_psd_dbm_hz")) {
    s.noise_variance = dbm_to_watts(get_real(j, "noise_psd_dbm_hz")) * s.bandwidth;
  }
  if (j.contains("master_seed")) {
    const json& v = j.at("master_seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError("config key 'master_seed' must be a non-negative integer");
    }
    s.master_seed = v.get<std::uint64_t>();
  }
  if (j.contains("random_active_users")) s.random_active_users = get_as<bool>(j, "random_active_users");

  if (j.contains("n_grid")) {
    if (!j.at("n_grid").is_array()) throw ConfigError("n_grid must be an array");
    for (const json& v : j.at("n_grid")) {
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw ConfigError("n_grid entries must be positive integers");
      }
      cfg.n_grid.push_back(v.get<int>());
    }
    if (cfg.n_grid.empty()) throw ConfigError("n_grid must not be empty");
  }
  if (j.contains("n_min") || j.contains("n_max") || j.contains("n_step")) {
    if (!j.contains("n_min") || !j.contains("n_max")) {
      throw ConfigError("n_min and n_max must be given together");
    }
    const int lo = get_int(j, "n_min");
    const int hi = get_int(j, "n_max");
    const int step = j.contains("n_step") ? get_int(j, "n_step") : 1;
    if (lo < 1 || hi < lo || step < 1) throw ConfigError("need 1 <= n_min <= n_max and n_step >= 1");
    for (int n = lo; n <= hi; n += step) cfg.n_grid.push_back(n);
  }
  if (j.contains("eta_grid")) {
    const json& arr = j.at("eta_grid");
    if (!arr.is_array() || arr.empty()) throw ConfigError("eta_grid must be a non-empty array");
    for (const json& v : arr) {
      if (!v.is_number() || v.get<double>() < 0.0) throw ConfigError("eta_grid entries must be >= 0");
      cfg.eta_grid.push_back(v.get<double>());
    }
  }
  if (j.contains("trials")) cfg.trials = get_int(j, "trials");
  if (j.contains("channel_mode")) cfg.mode = parse_channel_mode(get_as<std::string>(j, "channel_mode"));

  if (j.contains("eps_feas")) cfg.solver.eps_feas = get_real(j, "eps_feas");
  if (j.contains("max_iters")) cfg.solver.max_iters = get_int(j, "max_iters");
  if (j.contains("restarts")) cfg.solver.restarts = get_int(j, "restarts");
  if (j.contains("polish_tol")) cfg.solver.polish_tol = get_real(j, "polish_tol");
  if (j.contains("rcg_eps")) cfg.rcg.eps = get_real(j, "rcg_eps");
  if (j.contains("rcg_max_iters")) cfg.rcg.max_iters = get_int(j, "rcg_max_iters");
  if (j.contains("snr_low")) cfg.snr_low = get_real(j, "snr_low");
  if (j.contains("snr_high")) cfg.snr_high = get_real(j, "snr_high");

  if (j.contains("L")) cfg.L = get_int(j, "L");
  if (j.contains("c")) cfg.c = get_real(j, "c");
  if (j.contains("c1")) cfg.c1 = get_real(j, "c1");
  if (j.contains("c2")) cfg.c2 = get_real(j, "c2");
  if (j.contains("c_bar")) cfg.c_bar = get_real(j, "c_bar");

  if (j.contains("theorem")) {
    const json& v = j.at("theorem");
    cfg.theorem = v.is_string() ? v.get<std::string>() : v.dump();
    if (cfg.theorem != "2" && cfg.theorem != "3" && cfg.theorem != "4" && cfg.theorem != "all") {
      throw ConfigError("theorem must be one of 2, 3, 4, all");
    }
  }
  if (j.contains("sigma")) cfg.sigma = get_real(j, "sigma");
  if (j.contains("rho")) cfg.rho = get_real(j, "rho");
  if (j.contains("restarts_torus")) cfg.restarts_torus = get_int(j, "restarts_torus");
  if (j.contains("placements")) cfg.placements = get_int(j, "placements");
  if (j.contains("workers")) cfg.workers = get_int(j, "workers");

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.solver.max_iters < 1 || cfg.solver.restarts < 1) {
    throw ConfigError("max_iters and restarts must be >= 1");
  }
  if (!(cfg.solver.eps_feas > 0.0)) throw ConfigError("eps_feas must be > 0");
  if (!(cfg.rcg.eps > 0.0) || cfg.rcg.max_iters < 1) throw ConfigError("rcg_eps > 0 and rcg_max_iters >= 1");
  if (!(cfg.snr_low > 0.0) || !(cfg.snr_high > cfg.snr_low)) {
    throw ConfigError("need 0 < snr_low < snr_high");
  }
  if (cfg.L < 0) throw ConfigError("L must be >= 1");
  if (!(cfg.c1 > 0.0) || !(cfg.c2 > 0.0)) throw ConfigError("c1 and c2 must be > 0");
  if (!(cfg.sigma >= 0.0) || !(cfg.rho >= 0.0)) throw ConfigError("sigma and rho must be >= 0");
  if (cfg.restarts_torus < 1) throw ConfigError("restarts_torus must be >= 1");
  if (cfg.placements < 1) throw ConfigError("placements must be >= 1");
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
  return cfg;
}

json load_config_json(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string text = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    if (value.is_null()) {
      j.erase(key);
      continue;
    }
    // A direct-strength override replaces whichever form the file used.
    if (key == "sigma3" || key == "sigma3_db" || key == "eta") {
      j.erase("sigma3");
      j.erase("sigma3_db");
      j.erase("eta");
    }
    if (key == "n_grid") {
      j.erase("n_min");
      j.erase("n_max");
      j.erase("n_step");
    }
    if (key == "n_min") j.erase("n_grid");
    j[key] = value;
  }
  return j;
}

json to_json(const RunConfig& cfg) {
  const SystemConfig& s = cfg.system;
  json j;
  j["G"] = s.cells;
  j["M"] = s.antennas;
  j["K"] = s.users;
  j["N"] = s.elements;
  j["sigma1"] = s.sigma1;
  j["sigma2"] = s.sigma2;
  if (s.sigma3) j["sigma3"] = *s.sigma3;
  if (s.eta) j["eta"] = *s.eta;
  j["power_per_user"] = s.power_per_user;
  j["noise_variance"] = s.noise_variance;
  j["bandwidth"] = s.bandwidth;
  j["master_seed"] = s.master_seed;
  j["random_active_users"] = s.random_active_users;
  if (!cfg.n_grid.empty()) j["n_grid"] = cfg.n_grid;
  if (!cfg.eta_grid.empty()) j["eta_grid"] = cfg.eta_grid;
  j["trials"] = cfg.trials;
  j["channel_mode"] = to_string(cfg.mode);
  j["eps_feas"] = cfg.solver.eps_feas;
  j["max_iters"] = cfg.solver.max_iters;
  j["restarts"] = cfg.solver.restarts;
  j["polish_tol"] = cfg.solver.polish_tol;
  j["rcg_eps"] = cfg.rcg.eps;
  j["rcg_max_iters"] = cfg.rcg.max_iters;
  j["snr_low"] = cfg.snr_low;
  j["snr_high"] = cfg.snr_high;
  if (cfg.L > 0) j["L"] = cfg.L;
  j["c"] = cfg.c;
  j["c1"] = cfg.c1;
  j["c2"] = cfg.c2;
  if (cfg.c_bar) j["c_bar"] = *cfg.c_bar;
  j["theorem"] = cfg.theorem;
  j["sigma"] = cfg.sigma;
  j["rho"] = cfg.rho;
  j["restarts_torus"] = cfg.restarts_torus;
  j["placements"] = cfg.placements;
  return j;
}

}  // namespace risnull
