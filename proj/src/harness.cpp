#include "risnull/harness.hpp"

#include "risnull/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace risnull {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "risnull 0.1.0";

struct TrialOutcome {
  bool feasible = false;
  bool failed = false;
  bool rank_deficient = false;
  double normalized_residual = 0.0;
  int iterations = 0;
  double eta = 0.0;
};

struct SampledInstance {
  NullingSystem sys;
  std::optional<ChannelRealization> channels;
  std::optional<PowerAllocation> powers;
  double eta = 0.0;
};

SampledInstance sample_instance(const SweepSpec& spec, int n, double eta, Rng& rng) {
  SystemConfig c = spec.base;
  c.elements = n;
  SampledInstance out;
  out.eta = eta;
  switch (spec.mode) {
    case ChannelMode::ExactCascade: {
      c.sigma3.reset();
      c.eta = eta;
      out.channels = sample_channels(c, rng);
      out.powers = PowerAllocation::active_subset(c, c.random_active_users ? &rng : nullptr);
      out.sys = assemble_nulling_system(*out.channels, *out.powers, c);
      return out;
    }
    case ChannelMode::GaussianSurrogate:
      out.sys = surrogate_system(c.nulling_rows(), n, eta * c.sigma4(), c.sigma4(), rng);
      return out;
    case ChannelMode::Geometric: {
      GeometricRealization geo = sample_geometric(spec.scenario, c, rng);
      out.powers = PowerAllocation::active_subset(c, c.random_active_users ? &rng : nullptr);
      out.sys = assemble_nulling_system(geo.channels, *out.powers, c);
      out.sys.sigma4 = geo.cascade_rms;
      out.sys.sigma3 = geo.direct_rms;
      out.eta = geo.effective_eta;
      out.channels = std::move(geo.channels);
      return out;
    }
  }
  throw std::logic_error("unhandled channel mode");
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json rounded_or_null(double x) { return std::isfinite(x) ? json(round_half_up(x)) : json(nullptr); }

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open output file");
  out << text;
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

json provenance_json(const Provenance& p) {
  return json{{"master_seed", p.master_seed},   {"config_hash", p.config_hash},
              {"channel_mode", p.channel_mode}, {"grid_source", p.grid_source},
              {"n_grid", p.n_grid},             {"eta_grid", p.eta_grid},
              {"trials_per_point", p.trials_per_point}, {"version", p.version}};
}

}  // namespace

void SweepSpec::validate() const {
  base.validate();
  if (n_grid.empty()) throw std::invalid_argument("sweep N grid is empty");
  if (mode != ChannelMode::Geometric && eta_grid.empty()) {
    throw std::invalid_argument("sweep eta grid is empty");
  }
  if (trials_per_point < 1) throw std::invalid_argument("trials_per_point must be >= 1");
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("N grid entries must be >= 1");
  }
  for (double e : eta_grid) {
    if (!(e >= 0.0)) throw std::invalid_argument("eta grid entries must be >= 0");
  }
  if (mode == ChannelMode::Geometric) scenario.validate(base.cells);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json canonical_spec_json(const SweepSpec& spec) {
  const SystemConfig& c = spec.base;
  json j;
  j["G"] = c.cells;
  j["M"] = c.antennas;
  j["K"] = c.users;
  j["sigma1"] = c.sigma1;
  j["sigma2"] = c.sigma2;
  j["random_active_users"] = c.random_active_users;
  j["n_grid"] = spec.n_grid;
  j["eta_grid"] = spec.mode == ChannelMode::Geometric ? std::vector<double>{} : spec.eta_grid;
  j["trials"] = spec.trials_per_point;
  j["channel_mode"] = to_string(spec.mode);
  j["master_seed"] = spec.master_seed;
  j["eps_feas"] = spec.solver.eps_feas;
  j["max_iters"] = spec.solver.max_iters;
  j["restarts"] = spec.solver.restarts;
  j["polish_tol"] = spec.solver.polish_tol;
  if (spec.mode == ChannelMode::Geometric) {
    const GeometryScenario& s = spec.scenario;
    json bs = json::array();
    for (const auto& p : s.bs_positions) bs.push_back({p.x(), p.y(), p.z()});
    json regions = json::array();
    for (const auto& r : s.user_regions) regions.push_back({r.x_min, r.x_max, r.y_min, r.y_max, r.z});
    j["scenario"] = {{"ris", {s.ris_position.x(), s.ris_position.y(), s.ris_position.z()}},
                     {"bs", bs},
                     {"regions", regions},
                     {"t0", s.t0},
                     {"alpha_reflect", s.alpha_reflect},
                     {"alpha_direct", s.alpha_direct}};
  }
  return j;  // nlohmann objects serialize with sorted keys
}

NullingSystem sample_sweep_system(const SweepSpec& spec, int n, double eta, Rng& rng,
                                  double* measured_eta) {
  SampledInstance inst = sample_instance(spec, n, eta, rng);
  if (measured_eta) *measured_eta = inst.eta;
  return std::move(inst.sys);
}

InstanceReport solve_instance(const SweepSpec& spec) {
  spec.validate();
  const int n = spec.n_grid.front();
  const double eta = spec.mode == ChannelMode::Geometric ? 0.0 : spec.eta_grid.front();
  Rng rng(derive_trial_seed(spec.master_seed, 0, 0));
  const SampledInstance inst = sample_instance(spec, n, eta, rng);
  InstanceReport rep;
  rep.n = n;
  rep.L = inst.sys.num_conditions();
  rep.eta = inst.eta;
  rep.outcome = alternating_projection(inst.sys, spec.solver, rng);
  if (inst.channels) {
    const RateInputs in = make_rate_inputs(*inst.channels, *inst.powers, 1.0);
    const CVector coef = in.cascade_rows * rep.outcome.v.values() + in.direct;
    double g = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < in.num_receivers(); ++r) {
      g = std::min(g, std::norm(coef(r * in.num_sources() + in.desired_source[static_cast<std::size_t>(r)])));
    }
    rep.min_desired_gain = g;
  } else {
    rep.min_desired_gain = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

SweepResult feasibility_sweep(const SweepSpec& spec, int workers) {
  spec.validate();
  const bool geometric = spec.mode == ChannelMode::Geometric;
  const std::vector<double> etas = geometric ? std::vector<double>{0.0} : spec.eta_grid;
  const std::size_t nn = spec.n_grid.size();
  const std::size_t points = etas.size() * nn;
  const auto trials = static_cast<std::size_t>(spec.trials_per_point);

  std::vector<TrialOutcome> outcomes(points * trials);
  parallel_for(points * trials, workers, [&](std::size_t flat) {
    const std::size_t p = flat / trials;
    const std::size_t t = flat % trials;
    const int n = spec.n_grid[p % nn];
    const double eta = etas[p / nn];
    TrialOutcome& o = outcomes[flat];
    Rng rng(derive_trial_seed(spec.master_seed, p, t));
    try {
      const NullingSystem sys = sample_sweep_system(spec, n, eta, rng, &o.eta);
      const SolveOutcome s = alternating_projection(sys, spec.solver, rng);
      o.feasible = s.feasible;
      o.rank_deficient = s.rank_deficient;
      o.normalized_residual = s.normalized_residual;
      o.iterations = s.iterations;
    } catch (const std::exception&) {
      o = TrialOutcome{};
      o.failed = true;
      o.eta = eta;
    }
  });

  SweepResult res;
  res.points.reserve(points);
  for (std::size_t p = 0; p < points; ++p) {
    SweepPoint pt;
    pt.n = spec.n_grid[p % nn];
    pt.eta_index = static_cast<int>(p / nn);
    pt.trials = spec.trials_per_point;
    double res_sum = 0.0, it_sum = 0.0, eta_sum = 0.0;
    int ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialOutcome& o = outcomes[p * trials + t];
      eta_sum += o.eta;
      if (o.failed) {
        ++pt.failures;
        continue;
      }
      ++ok;
      if (o.feasible) ++pt.feasible;
      if (o.rank_deficient) ++pt.rank_deficient;
      res_sum += o.normalized_residual;
      it_sum += o.iterations;
    }
    pt.eta = geometric ? eta_sum / static_cast<double>(trials) : etas[p / nn];
    pt.feasible_fraction = static_cast<double>(pt.feasible) / static_cast<double>(trials);
    pt.mean_normalized_residual = ok > 0 ? res_sum / ok : 0.0;
    pt.mean_iterations = ok > 0 ? it_sum / ok : 0.0;
    res.points.push_back(pt);
  }

  Provenance& prov = res.provenance;
  prov.master_seed = spec.master_seed;
  prov.config_hash = fnv1a_hex(canonical_spec_json(spec).dump());
  prov.channel_mode = to_string(spec.mode);
  prov.grid_source = spec.grid_source;
  prov.n_grid = spec.n_grid;
  prov.eta_grid = geometric ? std::vector<double>{} : spec.eta_grid;
  prov.trials_per_point = spec.trials_per_point;
  prov.version = kVersion;
  return res;
}

QuantileBoundary quantile_boundary(const SweepResult& res, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_boundary: p must be in [0, 1]");
  QuantileBoundary qb;
  qb.p = p;
  int groups = 0;
  for (const SweepPoint& pt : res.points) groups = std::max(groups, pt.eta_index + 1);
  for (int e = 0; e < groups; ++e) {
    std::vector<const SweepPoint*> pts;
    for (const SweepPoint& pt : res.points) {
      if (pt.eta_index == e) pts.push_back(&pt);
    }
    if (pts.empty()) continue;
    std::sort(pts.begin(), pts.end(), [](const SweepPoint* a, const SweepPoint* b) { return a->n < b->n; });
    double eta_sum = 0.0;
    for (const SweepPoint* pt : pts) eta_sum += pt->eta;
    std::optional<int> hit;
    for (const SweepPoint* pt : pts) {
      if (pt->feasible_fraction >= p) {
        hit = pt->n;
        break;
      }
    }
    qb.eta_index.push_back(e);
    qb.eta.push_back(eta_sum / static_cast<double>(pts.size()));
    qb.n.push_back(hit);
  }
  return qb;
}

std::vector<int> default_n_grid(Index L, double eta_max, double c) {
  const double l = static_cast<double>(L);
  const double top = 1.25 * std::max(refined_threshold(L, eta_max, c), 2.0 * l + 8.0);
  const int step = std::max(1, static_cast<int>(std::lround(l / 6.0)));
  std::vector<int> grid;
  for (int n = static_cast<int>(std::max<Index>(1, L)); n <= static_cast<int>(std::ceil(top)); n += step) {
    grid.push_back(n);
  }
  return grid;
}

std::vector<int> default_geometric_n_grid() {
  std::vector<int> grid;
  for (int n = 40; n <= 200; n += 4) grid.push_back(n);
  return grid;
}

namespace {

struct RateTrial {
  double sum_rate = 0.0;
  double dof = 0.0;
  bool feasible = false;
  bool low_confidence = false;
  bool failed = false;
};

RateTrial run_rate_trial(const RateSpec& spec, int n, Rng& rng) {
  SystemConfig c = spec.base;
  c.elements = n;
  const ChannelRealization real = sample_channels(c, rng);
  const PowerAllocation powers =
      PowerAllocation::active_subset(c, c.random_active_users ? &rng : nullptr);
  const RateInputs in = make_rate_inputs(real, powers, c.noise_variance);
  const NullingSystem sys = assemble_nulling_system(real, powers, c);

  SolverOptions ap = spec.solver;
  if (!(ap.polish_tol > 0.0)) ap.polish_tol = 1e-10;
  const SolveOutcome start = alternating_projection(sys, ap, rng);

  RateTrial t;
  t.feasible = start.feasible;
  t.sum_rate = rcg_maximize(in, start.v, spec.rcg).state.value;

  PhaseVector v_high = start.v;
  const double gain = mean_desired_gain(in, start.v.values());
  if (gain > 0.0) {
    const RateInputs hi = in.with_uniform_power(spec.snr_high * c.noise_variance / gain);
    v_high = rcg_maximize(hi, start.v, spec.rcg).state.v;
  }
  const DofEstimate dof = estimate_dof(in, v_high, spec.snr_low, spec.snr_high);
  t.dof = dof.total;
  t.low_confidence = dof.low_confidence;
  return t;
}

}  // namespace

std::vector<RatePoint> rate_sweep(const RateSpec& spec, int workers) {
  spec.base.validate();
  if (spec.n_grid.empty()) throw std::invalid_argument("rate sweep N grid is empty");
  if (spec.trials < 1) throw std::invalid_argument("rate sweep trials must be >= 1");
  const std::size_t nn = spec.n_grid.size();
  const auto trials = static_cast<std::size_t>(spec.trials);
  std::vector<RateTrial> out(nn * trials);
  parallel_for(nn * trials, workers, [&](std::size_t flat) {
    const std::size_t p = flat / trials;
    const std::size_t t = flat % trials;
    Rng rng(derive_trial_seed(spec.master_seed, p, t));
    try {
      out[flat] = run_rate_trial(spec, spec.n_grid[p], rng);
    } catch (const std::exception&) {
      out[flat] = RateTrial{};
      out[flat].failed = true;
    }
  });

  std::vector<RatePoint> points;
  for (std::size_t p = 0; p < nn; ++p) {
    RatePoint pt;
    pt.n = spec.n_grid[p];
    pt.trials = spec.trials;
    std::vector<double> dofs;
    double w = 0.0;
    int feasible = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const RateTrial& r = out[p * trials + t];
      if (r.failed) {
        ++pt.failures;
        continue;
      }
      w += r.sum_rate;
      dofs.push_back(r.dof);
      if (r.feasible) ++feasible;
      if (r.low_confidence) ++pt.low_confidence;
    }
    const auto ok = static_cast<double>(dofs.size());
    if (ok > 0) {
      pt.mean_sum_rate = w / ok;
      double s = 0.0;
      for (double d : dofs) s += d;
      pt.mean_dof = s / ok;
      if (dofs.size() > 1) {
        double ss = 0.0;
        for (double d : dofs) ss += (d - pt.mean_dof) * (d - pt.mean_dof);
        pt.se_dof = std::sqrt(ss / (ok - 1.0) / ok);
      }
    }
    pt.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(trials);
    points.push_back(pt);
  }
  return points;
}

GeometrySummary geometry_eta(const GeometryScenario& scn, const SystemConfig& config, int placements,
                             std::uint64_t seed) {
  if (placements < 1) throw std::invalid_argument("geometry_eta: placements must be >= 1");
  // eta depends only on positions, so a single element keeps this cheap.
  SystemConfig c = config;
  c.elements = 1;
  GeometrySummary out;
  out.placements = placements;
  out.cell_mean_eta.assign(static_cast<std::size_t>(c.cells), 0.0);
  double sum = 0.0, sq = 0.0;
  for (int p = 0; p < placements; ++p) {
    Rng rng(derive_trial_seed(seed, 0, static_cast<std::uint64_t>(p)));
    const GeometricRealization geo = sample_geometric(scn, c, rng);
    sum += geo.effective_eta;
    sq += geo.effective_eta * geo.effective_eta;
    for (int g = 0; g < c.cells; ++g) {
      double cell = 0.0;
      for (int k = 0; k < c.users; ++k) cell += geo.user_eta[static_cast<std::size_t>(g * c.users + k)];
      out.cell_mean_eta[static_cast<std::size_t>(g)] += cell / c.users;
    }
  }
  const double n = placements;
  out.mean_eta = sum / n;
  if (placements > 1) {
    const double var = std::max(0.0, (sq - n * out.mean_eta * out.mean_eta) / (n - 1.0));
    out.se_eta = std::sqrt(var / n);
  }
  for (double& v : out.cell_mean_eta) v /= n;
  return out;
}

SweepSpec sweep_spec_from(const RunConfig& cfg) {
  SweepSpec spec;
  spec.base = cfg.system;
  spec.mode = cfg.mode;
  spec.eta_grid = cfg.etas();
  spec.trials_per_point = cfg.trials;
  spec.master_seed = cfg.system.master_seed;
  spec.solver = cfg.solver;
  if (!cfg.n_grid.empty()) {
    spec.n_grid = cfg.n_grid;
  } else if (cfg.mode == ChannelMode::Geometric) {
    spec.n_grid = default_geometric_n_grid();
    spec.grid_source = "default-geometric";
  } else {
    const double eta_max = *std::max_element(spec.eta_grid.begin(), spec.eta_grid.end());
    spec.n_grid = default_n_grid(cfg.system.nulling_rows(), eta_max, cfg.c);
    spec.grid_source = "default-linear";
  }
  return spec;
}

RateSpec rate_spec_from(const RunConfig& cfg, int trials) {
  RateSpec spec;
  spec.base = cfg.system;
  spec.n_grid = cfg.n_grid.empty() ? std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128} : cfg.n_grid;
  spec.trials = trials;
  spec.master_seed = cfg.system.master_seed;
  spec.solver = cfg.solver;
  spec.rcg = cfg.rcg;
  spec.snr_low = cfg.snr_low;
  spec.snr_high = cfg.snr_high;
  return spec;
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
  return os.str();
}

json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < t.columns.size() && c < row.size(); ++c) obj[t.columns[c]] = row[c];
    rows.push_back(obj);
  }
  return json{{"provenance", t.provenance}, {"columns", t.columns}, {"rows", rows}};
}

void export_table(const Table& t, const std::string& path, Format format) {
  write_text(path, format == Format::Csv ? to_csv(t) : to_json(t).dump(2) + "\n");
}

void export_json(const json& j, const std::string& path) { write_text(path, j.dump(2) + "\n"); }

Table sweep_table(const SweepResult& res) {
  Table t;
  t.columns = {"eta_index", "eta", "N", "trials", "feasible", "feasible_fraction",
               "mean_normalized_residual", "mean_iterations", "rank_deficient", "failures"};
  for (const SweepPoint& p : res.points) {
    t.rows.push_back({p.eta_index, p.eta, p.n, p.trials, p.feasible, p.feasible_fraction,
                      p.mean_normalized_residual, p.mean_iterations, p.rank_deficient, p.failures});
  }
  t.provenance = provenance_json(res.provenance);
  return t;
}

Table boundary_table(const SweepResult& res) {
  Table t;
  t.columns = {"eta_index", "eta", "n_p01", "n_p50", "n_p99"};
  const QuantileBoundary q1 = quantile_boundary(res, 0.01);
  const QuantileBoundary q50 = quantile_boundary(res, 0.5);
  const QuantileBoundary q99 = quantile_boundary(res, 0.99);
  auto cell = [](const std::optional<int>& n) { return n ? json(*n) : json(nullptr); };
  for (std::size_t e = 0; e < q1.eta.size(); ++e) {
    t.rows.push_back({q1.eta_index[e], q1.eta[e], cell(q1.n[e]), cell(q50.n[e]), cell(q99.n[e])});
  }
  t.provenance = provenance_json(res.provenance);
  return t;
}

Table rate_table(const std::vector<RatePoint>& points) {
  Table t;
  t.columns = {"N", "trials", "mean_sum_rate", "mean_dof", "se_dof", "feasible_fraction",
               "low_confidence", "failures"};
  for (const RatePoint& p : points) {
    t.rows.push_back({p.n, p.trials, p.mean_sum_rate, p.mean_dof, p.se_dof, p.feasible_fraction,
                      p.low_confidence, p.failures});
  }
  return t;
}

Table threshold_table(const std::vector<ThresholdReport>& reports) {
  Table t;
  t.columns = {"L", "eta", "n_necessary_gordon", "n1", "n2", "n_sufficient", "n_necessary_evs",
               "n_necessary_evs_large_eta", "n_necessary_evs_corrected", "n_refined", "eta_transition",
               "evs_domain_error", "n_necessary_gordon_rounded", "n1_rounded", "n2_rounded",
               "n_sufficient_rounded", "n_necessary_evs_rounded", "n_necessary_evs_large_eta_rounded",
               "n_necessary_evs_corrected_rounded", "n_refined_rounded"};
  for (const ThresholdReport& r : reports) {
    t.rows.push_back({r.L,
                      r.eta,
                      r.n_necessary_gordon,
                      r.n1,
                      r.n2,
                      r.n_sufficient,
                      number_or_null(r.n_necessary_evs),
                      r.n_necessary_evs_large_eta,
                      r.n_necessary_evs_corrected,
                      r.n_refined,
                      r.eta_transition,
                      r.evs_domain_error,
                      round_half_up(r.n_necessary_gordon),
                      round_half_up(r.n1),
                      round_half_up(r.n2),
                      round_half_up(r.n_sufficient),
                      rounded_or_null(r.n_necessary_evs),
                      round_half_up(r.n_necessary_evs_large_eta),
                      round_half_up(r.n_necessary_evs_corrected),
                      round_half_up(r.n_refined)});
  }
  return t;
}

json sweep_result_to_json(const SweepResult& res) {
  json pts = json::array();
  for (const SweepPoint& p : res.points) {
    pts.push_back({{"N", p.n},
                   {"eta_index", p.eta_index},
                   {"eta", p.eta},
                   {"trials", p.trials},
                   {"feasible", p.feasible},
                   {"feasible_fraction", p.feasible_fraction},
                   {"mean_normalized_residual", p.mean_normalized_residual},
                   {"mean_iterations", p.mean_iterations},
                   {"rank_deficient", p.rank_deficient},
                   {"failures", p.failures}});
  }
  return json{{"provenance", provenance_json(res.provenance)}, {"points", pts}};
}

SweepResult sweep_result_from_json(const json& j) {
  SweepResult res;
  try {
    const json& pr = j.at("provenance");
    Provenance& p = res.provenance;
    p.master_seed = pr.at("master_seed").get<std::uint64_t>();
    p.config_hash = pr.at("config_hash").get<std::string>();
    p.channel_mode = pr.at("channel_mode").get<std::string>();
    p.grid_source = pr.at("grid_source").get<std::string>();
    p.n_grid = pr.at("n_grid").get<std::vector<int>>();
    p.eta_grid = pr.at("eta_grid").get<std::vector<double>>();
    p.trials_per_point = pr.at("trials_per_point").get<int>();
    p.version = pr.at("version").get<std::string>();
    for (const json& q : j.at("points")) {
      SweepPoint pt;
      pt.n = q.at("N").get<int>();
      pt.eta_index = q.at("eta_index").get<int>();
      pt.eta = q.at("eta").get<double>();
      pt.trials = q.at("trials").get<int>();
      pt.feasible = q.at("feasible").get<int>();
      pt.feasible_fraction = q.at("feasible_fraction").get<double>();
      pt.mean_normalized_residual = q.at("mean_normalized_residual").get<double>();
      pt.mean_iterations = q.at("mean_iterations").get<double>();
      pt.rank_deficient = q.at("rank_deficient").get<int>();
      pt.failures = q.at("failures").get<int>();
      res.points.push_back(pt);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sweep result: ") + e.what());
  }
  return res;
}

void emit_plot_script(const SweepResult& res, const std::string& csv_path,
                      const std::string& script_path) {
  const Provenance& p = res.provenance;
  std::ostringstream os;
  os << "#!/usr/bin/env python3\n"
        "# Feasible fraction against N, one line per eta.\n"
        "import csv\n"
        "import sys\n"
        "from collections import defaultdict\n\n"
        "import matplotlib\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n\n"
        "CSV = sys.argv[1] if len(sys.argv) > 1 else "
     << json(csv_path).dump()
     << "\n"
        "OUT = sys.argv[2] if len(sys.argv) > 2 else CSV.rsplit(\".\", 1)[0] + \".png\"\n\n"
        "curves = defaultdict(list)\n"
        "with open(CSV, newline=\"\") as f:\n"
        "    for row in csv.DictReader(f):\n"
        "        key = (int(row[\"eta_index\"]), float(row[\"eta\"]))\n"
        "        curves[key].append((int(row[\"N\"]), float(row[\"feasible_fraction\"])))\n\n"
        "fig, ax = plt.subplots(figsize=(6, 4))\n"
        "for (idx, eta), pts in sorted(curves.items()):\n"
        "    pts.sort()\n"
        "    ax.plot([n for n, _ in pts], [f for _, f in pts], marker=\"o\", ms=3,\n"
        "            label=f\"eta = {eta:g}\")\n"
        "ax.set_xlabel(\"N\")\n"
        "ax.set_ylabel(\"feasible fraction\")\n"
        "ax.set_ylim(-0.02, 1.02)\n"
        "ax.grid(alpha=0.3)\n"
        "ax.legend()\n"
        "ax.set_title("
     << json(p.channel_mode + ", seed " + std::to_string(p.master_seed) + ", config " + p.config_hash)
            .dump()
     << ", fontsize=8)\n"
        "fig.tight_layout()\n"
        "fig.savefig(OUT, dpi=150)\n"
        "print(OUT)\n";
  write_text(script_path, os.str());
}

}  // namespace risnull
