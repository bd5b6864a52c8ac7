#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdisac/channel.hpp"
#include "fdisac/common.hpp"
#include "fdisac/metrics.hpp"
#include "fdisac/optimize.hpp"
#include "fdisac/sensing.hpp"

namespace fdisac {

inline double dbm_to_watt(double x_dbm) { return std::pow(10.0, (x_dbm - 30.0) / 10.0); }

/// A reflector or user in the scene. gain_phase_deg unset means a uniform
/// random phase per trial.
struct TargetSpec {
  double angle_deg = 0.0;
  double range_m = 0.0;
  double velocity_mps = 0.0;
  double gain_abs = 1.0;
  std::optional<double> gain_phase_deg;
};

struct ScenarioConfig {
  std::string profile = "table1";
  ArrayLayout layout;

  int n_subcarriers = 792;
  int n_symbols = 14;
  double subcarrier_spacing_hz = 120e3;
  double symbol_duration_s = 8.92e-6;
  double carrier_hz = 28e9;

  double p_b_dbm = 30.0;
  double p_u_dbm = 10.0;
  double sigma_b2_dbm = -90.0;
  double sigma_u2_dbm = -90.0;
  double lambda_b_dbm = -30.0;

  double si_kappa_db = 35.0;
  double si_pathloss_db = 40.0;
  std::optional<double> si_nmse_db;  // unset: perfect SI knowledge

  int n_taps = 32;
  int codebook_bits = 5;
  double music_grid_deg = 0.1;
  bool sensing_noise = true;
  /// Least-squares split of the echoes by estimated direction before the
  /// delay-Doppler quotient; false feeds the raw RF-domain signal.
  bool separate_echoes = true;

  std::vector<TargetSpec> dl_scatterers;    // L, also DL paths
  std::vector<TargetSpec> passive_targets;  // M
  TargetSpec ul_user;

  double ridge_rel = 1e-10;
  double solver_tol = 1e-12;
  int solver_max_iter = 2000;

  std::uint64_t seed = 1;
  int trials = 10;

  Waveform waveform() const;
  /// K = M + L + 1.
  int n_targets() const;
  void validate() const;
};

ScenarioConfig table1_profile();
/// 32x32 arrays (4 antennas per chain) and 64 subcarriers.
ScenarioConfig fast_profile();
ScenarioConfig profile_by_name(const std::string& name);

std::string config_to_json(const ScenarioConfig& cfg);
/// Fields present in the document override `base`; a "profile" key selects
/// the base profile first.
ScenarioConfig config_from_json(const std::string& text, const ScenarioConfig& base);
ScenarioConfig config_from_json(const std::string& text);

// ---------------------------------------------------------------------------

struct TargetReport {
  std::string role;  // "dl_scatterer", "passive", "ul_user"
  double true_angle_deg = 0.0;
  double true_range_m = 0.0;
  double true_velocity_mps = 0.0;
  int true_n = 0;  // nearest delay / Doppler bins
  int true_m = 0;
  SensingEstimate estimate;
};

struct TrialResult {
  int trial = 0;
  bool ok = false;
  std::string error;

  std::vector<TargetReport> targets;
  bool music_reliable = true;
  double max_doa_error_deg = 0.0;

  LinkMetrics metrics;
  double gamma_ul_mss = 0.0;
  double rate_ul_mss = 0.0;
  double rate_ideal = 0.0;
  std::vector<double> dl_stream_sinr;

  std::vector<double> si_residual_w;  // per RX chain, analog stage, true channel
  double tx_power_w = 0.0;
  double ul_power_w = 0.0;
  double max_combiner_norm_error = 0.0;
  double nulling_ratio = 0.0;
  bool closed_form = false;
};

struct SensingMaps {
  std::vector<double> angles_deg;
  std::vector<double> ranges_m;
  std::vector<double> velocities_mps;
  RMatrix range_angle;     // angles x ranges, max over Doppler
  RMatrix range_velocity;  // ranges x velocities, sum of max-normalized target maps
};

struct SweepRow {
  double value = 0.0;
  double rate_dl = 0.0;
  double rate_ideal = 0.0;
  double rate_ul_nsp = 0.0;
  double rate_ul_mss = 0.0;
  double gamma_rad = 0.0;
  int n_ok = 0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // the observed statistic
  double limit = 0.0;  // what it is compared against
  std::string detail;
};

struct RunReport {
  ScenarioConfig config;
  std::vector<TrialResult> trials;
  std::optional<SensingMaps> maps;

  std::string sweep_variable;
  std::vector<SweepRow> sweep;

  std::vector<CheckResult> checks;

  double wall_clock_s = 0.0;  // not serialized; report.json stays reproducible

  int n_ok() const;
  bool all_checks_passed() const;
};

struct RunOptions {
  bool maps = false;  // range-angle and range-velocity maps of the first good trial
};

/// One seeded trial of the full pipeline. Failures are caught and recorded.
TrialResult run_trial(const ScenarioConfig& cfg, int trial, SensingMaps* maps = nullptr);

/// All trials in order. Throws Error when every trial fails.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

enum class SweepVariable { p_b_dbm, p_u_dbm, n_taps };
SweepVariable sweep_variable_from_string(const std::string& name);
std::string to_string(SweepVariable v);

/// One row per value; trial seeds are shared across values.
RunReport sweep(const ScenarioConfig& cfg, SweepVariable variable,
                const std::vector<double>& values);

/// Invariant / KKT / nulling suite. Every check is recorded in report.checks.
RunReport run_validation(const ScenarioConfig& cfg);

std::string report_to_json(const RunReport& report);
std::string rates_csv(const RunReport& report);
std::string range_angle_csv(const SensingMaps& maps);
std::string range_velocity_csv(const SensingMaps& maps);

}  // namespace fdisac
