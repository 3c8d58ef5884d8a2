#pragma once

// Run configuration shared by every subcommand: defaults, JSON round trip,
// validation with field paths and the reproducibility hash.

#include "isolab/potential.hpp"
#include "isolab/schrodinger.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isolab::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kMaxHermiteRootOrder = 100;

struct BumpConfig {
  double lo = 0.0;
  double hi = 0.0;
  double amplitude = 0.0;
};

struct RunConfig {
  BumpConfig alpha{1.1, 1.9, 0.5};
  BumpConfig beta{3.1, 3.9, 1.0};

  // h grid: explicit values win over the log-spaced (hi, lo, count) triple.
  double h_hi = 1.0;
  double h_lo = 0.3;
  int h_count = 10;
  std::vector<double> h_values;

  int j_max = 3;
  int n = 16384;
  std::optional<double> half_width;  // unset: choose_domain
  double truncation_target = 1e-30;

  double delta = 0.2;
  double window_r = 2.5;
  double window_R = 4.5;
  double barrier_eps = 0.2;

  double eigen_tol = 1e-28;
  double residual_tol = 1e-25;
  double hadamard_tol = 1e-5;
  double fundamental_tol = 1e-6;
  double fit_r_squared = 0.999;
  double bracket_low = 0.8;
  double bracket_high = 1.2;
  double root_agreement = 1e-12;
  double envelope_factor = 3.0;
  double harmonic_tol = 1e-6;

  double spectrum_h = 0.5;
  std::string spectrum_potential = "plus";

  double hadamard_h = 0.5;
  double hadamard_t = 0.5;
  double hadamard_dt = 1e-3;
  int hadamard_j_max = 0;
  int s_nodes = 16;

  std::vector<double> rescale_h{1.0, 0.5, 0.25};
  int rescale_j_max = 2;
  double rescale_lo = -4.0;
  double rescale_hi = 4.0;
  bool rescale_bumps = true;

  int hermite_j_max = 50;

  double dump_extent = 6.0;
  int dump_points = 1201;

  std::string output_dir = "isolab-out";
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 0;  // reserved

  std::vector<double> h_grid() const;
  PotentialPair pair() const;
  SolverOptions solver() const;
  bool wants(const std::string& format) const;
};

/// Every field, grouped as in a config file.
nlohmann::json to_json(const RunConfig& c);

/// The fields that determine results; the output directory is left out so
/// the same run written to two places hashes and prints identically.
nlohmann::json reproducible_json(const RunConfig& c);

/// Overlays the keys present in `j` onto `c`. Unknown keys and type
/// mismatches are appended to `errors` as "path: message".
void merge_json(RunConfig& c, const nlohmann::json& j, std::vector<std::string>& errors);

/// "path: message" for every violated constraint; empty when valid.
std::vector<std::string> validate(const RunConfig& c);

/// 64-bit FNV-1a of the reproducible JSON, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace isolab::cli
