#pragma once

#include "risnull/numerics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace risnull {

/// Network dimensions and channel statistics. All quantities are linear
/// (watts, amplitude); dB inputs are converted when a config is parsed.
struct SystemConfig {
  int cells = 2;     // G
  int antennas = 4;  // M, per base station
  int users = 4;     // K, per cell
  int elements = 64; // N, RIS elements

  double sigma1 = 1.0;  // per-entry std of RIS -> BS links
  double sigma2 = 1.0;  // per-entry std of user -> RIS links

  // Direct-link strength. Exactly one of these is set; the other is derived
  // with sigma3 = eta * sigma1 * sigma2.
  std::optional<double> sigma3;
  std::optional<double> eta;

  double power_per_user = 1.0;   // watts
  double noise_variance = 1.0;   // watts
  double bandwidth = 1e6;        // Hz
  std::uint64_t master_seed = 0;

  // K > M: pick the M active users per cell at random instead of the first M.
  bool random_active_users = false;

  double sigma4() const { return sigma1 * sigma2; }
  double direct_std() const;
  double strength_ratio() const;
  /// L = GM(GM - 1).
  Index nulling_rows() const;
  void validate() const;
};

/// One draw of every link in the network.
struct ChannelRealization {
  int cells = 0;
  int antennas = 0;
  int users = 0;
  Index elements = 0;

  std::vector<CMatrix> ris_to_bs;    // H_i, N x M, indexed by cell
  std::vector<CVector> user_to_ris;  // h_I for user (g, k), index g*K + k
  std::vector<CVector> user_to_bs;   // h_B for BS i <- user (g, k), index (i*G + g)*K + k

  const CMatrix& H(int cell) const { return ris_to_bs.at(static_cast<std::size_t>(cell)); }
  const CVector& h_ris(int cell, int user) const;
  const CVector& h_direct(int bs, int cell, int user) const;
};

/// Per-user transmit powers; inactive users carry zero power.
struct PowerAllocation {
  int cells = 0;
  int users = 0;
  std::vector<double> power;  // index g*K + k

  double at(int cell, int user) const { return power.at(static_cast<std::size_t>(cell * users + user)); }
  bool active(int cell, int user) const { return at(cell, user) > 0.0; }
  std::vector<int> active_users(int cell) const;

  /// min(M, K) users per cell at `power_per_user`, the rest switched off.
  /// Selection is the first users unless the config asks for a seeded
  /// random subset, in which case `rng` must be provided.
  static PowerAllocation active_subset(const SystemConfig& config, Rng* rng = nullptr);
};

/// Row metadata of the nulling system: the interference term seen on
/// antenna `rx_antenna` of BS `rx_cell` (which decodes user `rx_user`)
/// from user `tx_user` of cell `tx_cell`. Surrogate systems use -1 for
/// every field except `ordinal`.
struct NullingLink {
  int ordinal = 0;
  int rx_cell = -1;
  int rx_antenna = -1;
  int rx_user = -1;
  int tx_cell = -1;
  int tx_user = -1;

  friend bool operator==(const NullingLink&, const NullingLink&) = default;
};

/// The L conditions A^H v + b = 0. A is N x L: column c holds the cascade
/// vector whose conjugated inner product with v is the reflected part of
/// interference term c.
struct NullingSystem {
  CMatrix a;
  CVector b;
  std::vector<NullingLink> rows;
  double sigma4 = 1.0;
  double sigma3 = 0.0;

  Index num_conditions() const { return a.cols(); }
  Index num_elements() const { return a.rows(); }
};

struct Region {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z = 0.0;
};

/// Deterministic layout plus path-loss model los(d) = T0 * d^-alpha.
struct GeometryScenario {
  Eigen::Vector3d ris_position = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> bs_positions;
  std::vector<Region> user_regions;  // one per cell
  double t0 = 1e-3;                  // linear reference loss
  double alpha_reflect = 2.0;        // user-RIS and RIS-BS
  double alpha_direct = 4.0;         // user-BS

  /// Two cells: RIS at the origin, BSs at (15,15,0) and (40,15,0), users in
  /// [5,25]x[-25,-5] and [30,50]x[-25,-5] at z = -20, T0 = -30 dB.
  static GeometryScenario default_layout();
  void validate(int cells) const;
};

struct GeometricRealization {
  ChannelRealization channels;
  std::vector<Eigen::Vector3d> user_positions;  // index g*K + k
  // Own-cell direct/cascade amplitude ratio per user, and its mean.
  std::vector<double> user_eta;
  double effective_eta = 0.0;
  // RMS of the per-entry std over all cascade and direct links; used to
  // normalize nulling residuals.
  double cascade_rms = 0.0;
  double direct_rms = 0.0;
};

double path_loss(double distance, double t0, double alpha);
double db_to_linear(double db);
double dbm_to_watts(double dbm);

ChannelRealization sample_channels(const SystemConfig& config, Rng& rng);

/// H_i^H diag(h): entry (m, n) = conj(H_i[n, m]) * h[n].
CMatrix cascade(const CMatrix& ris_to_bs, const CVector& user_to_ris);

/// Lexicographic (i, k, g, j) assembly of the L = GM(GM-1) interference
/// conditions. Requires exactly M active users in every cell.
NullingSystem assemble_nulling_system(const ChannelRealization& realization,
                                      const PowerAllocation& powers,
                                      const SystemConfig& config);

/// Unstructured stand-in: A ~ CN(0, sigma4^2) entries, b ~ CN(0, sigma3^2).
NullingSystem surrogate_system(Index conditions, Index elements, double sigma3, double sigma4,
                               Rng& rng);

GeometricRealization sample_geometric(const GeometryScenario& scenario, const SystemConfig& config,
                                      Rng& rng);

}  // namespace risnull
