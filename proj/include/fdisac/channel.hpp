#pragma once

#include <vector>

#include "fdisac/common.hpp"

namespace fdisac {

/// One line-of-sight path: complex gain and angle (deg).
struct PathParams {
  Complex gain{1.0, 0.0};
  double angle_deg = 0.0;
};

/// A radar reflector. Delay and Doppler are derived from range and velocity.
struct TargetParams {
  Complex gain{1.0, 0.0};
  double angle_deg = 0.0;
  double range_m = 0.0;
  double velocity_mps = 0.0;

  /// Two-way propagation delay 2d/c.
  double delay_s() const { return 2.0 * range_m / kSpeedOfLight; }
  /// Two-way Doppler shift 2 v f_c / c.
  double doppler_hz(double carrier_hz) const {
    return 2.0 * velocity_mps * carrier_hz / kSpeedOfLight;
  }
};

/// OFDM numerology. T_s = 1/delta_f + T_cp always holds.
struct Waveform {
  int n_subcarriers = 0;  // P
  int n_symbols = 0;      // Q
  double subcarrier_spacing_hz = 0.0;
  double symbol_duration_s = 0.0;
  double cp_duration_s = 0.0;
  double carrier_hz = 0.0;

  /// Builds the numerology from the total symbol duration; the cyclic prefix
  /// takes whatever is left after the useful part 1/delta_f.
  static Waveform from_symbol_duration(int n_subcarriers, int n_symbols,
                                       double subcarrier_spacing_hz,
                                       double symbol_duration_s, double carrier_hz);

  void validate() const;

  double range_bin_m() const;
  double velocity_bin_mps() const;
};

/// H_DL = sum_l alpha_l a_{m_u}(theta_l) a_{n_b}^H(theta_l).
CMatrix gen_dl_channel(const std::vector<PathParams>& paths, int m_u, int n_b,
                       double spacing_over_lambda = 0.5);

/// H_UL = beta a_{m_b}(phi) a_{n_u}^H(phi), single LOS path.
CMatrix gen_ul_channel(const PathParams& path, int m_b, int n_u,
                       double spacing_over_lambda = 0.5);

/// Radar channel on subcarrier p of symbol q:
/// sum_k alpha_k exp(j 2 pi (q T_s f_D,k - p tau_k delta_f)) a_{m_b} a_{n_b}^H.
CMatrix radar_channel_at(const std::vector<TargetParams>& targets, int p, int q,
                         const Waveform& wf, int m_b, int n_b,
                         double spacing_over_lambda = 0.5);

/// The per-target phase factor used by radar_channel_at.
Complex radar_phase(const TargetParams& target, int p, int q, const Waveform& wf);

/// Rician self-interference channel. The LOS part is the fixed
/// a_{m_b}(0) a_{n_b}^H(0) pattern; kappa_db = +inf gives a pure LOS channel.
CMatrix gen_si_channel(int m_b, int n_b, double kappa_db, double pathloss_db, Rng& rng);

/// Imperfect channel estimate H + E with E[|E|_F^2] = 10^(nmse_db/10) |H|_F^2.
/// nmse_db = -inf returns H unchanged and draws nothing from rng.
CMatrix perturb_estimate(const CMatrix& h, double nmse_db, Rng& rng);

}  // namespace fdisac
