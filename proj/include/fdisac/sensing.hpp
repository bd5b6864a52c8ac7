#pragma once

#include <utility>
#include <vector>

#include "fdisac/beamform.hpp"
#include "fdisac/channel.hpp"
#include "fdisac/common.hpp"

namespace fdisac {

/// One complex vector per (subcarrier p, symbol q) cell, stored p-major.
struct SignalGrid {
  int n_subcarriers = 0;
  int n_symbols = 0;
  std::vector<CVector> cells;

  SignalGrid() = default;
  SignalGrid(int p, int q) : n_subcarriers(p), n_symbols(q), cells(static_cast<std::size_t>(p) * q) {}

  CVector& at(int p, int q) { return cells[static_cast<std::size_t>(p) * n_symbols + q]; }
  const CVector& at(int p, int q) const {
    return cells[static_cast<std::size_t>(p) * n_symbols + q];
  }
};

// ---------------------------------------------------------------------------
// Direction of arrival

/// (1/n) sum y y^H over the columns of `snapshots`.
CMatrix sample_covariance(const CMatrix& snapshots);
CMatrix sample_covariance(const std::vector<CVector>& snapshots);

struct MusicResult {
  RVector grid_deg;
  RVector spectrum;                // pseudo-spectrum on grid_deg
  std::vector<double> doas_deg;    // k strongest local maxima, ascending
  double grid_step_deg = 0.0;
  RVector eigenvalues;             // ascending
  /// False when the signal and noise eigenvalues are not separated
  /// (e.g. noise-only input); the DoAs are then arbitrary.
  bool reliable = true;
};

/// MUSIC on an array_size-element half-wavelength ULA: spectrum
/// 1/|E_n^H a(theta)|^2 over [-90, 90] with the given step.
/// Requires k < array_size. Throws EstimationFailure (with the peaks that
/// were found) when fewer than k local maxima exist.
MusicResult music_doas(const CMatrix& r, int k, double grid_step_deg, int array_size,
                       double spacing_over_lambda = 0.5);

/// MUSIC in beamspace: the manifold is W^H a(theta) with W the (antennas x
/// chains) combining matrix that produced the snapshots. Each manifold
/// vector is normalized, so the spectrum is |u|^2 / |E_n^H u|^2.
MusicResult music_doas(const CMatrix& r, int k, double grid_step_deg,
                       const CMatrix& combiner, double spacing_over_lambda = 0.5);

// ---------------------------------------------------------------------------
// Delay / Doppler

/// g = a_{m_b}(theta) a_{N}^H(theta) x, N = x.size().
CVector reference_signal(double theta_hat_deg, const CVector& x, int m_b,
                         double spacing_over_lambda = 0.5);

/// Splits RF-domain snapshots into one grid per direction: y_k = u_k [U^+ y]_k
/// with u_k = W^H a(theta_k). Removes the cross-target terms that otherwise
/// leak into each target's quotient when the beamspace signatures overlap.
std::vector<SignalGrid> separate_targets(const SignalGrid& y_grid,
                                         const std::vector<double>& doas_deg,
                                         const AnalogBeamformer& w_rf,
                                         double spacing_over_lambda = 0.5);

struct QuotientResult {
  CMatrix z;                      // P x Q
  std::vector<char> failed;       // p-major; 1 where every antenna was excluded
  int n_failed = 0;
};

/// z^{p,q} = mean_i [W ytilde]_i / [g]_i, where W re-expands the RF-combined
/// signal to the antenna domain. Antennas with |g_i| < 1e-8 max|g| are left
/// out of the mean; a cell with nothing left is set to 0 and flagged.
QuotientResult delay_doppler_quotient(const SignalGrid& y_grid, const SignalGrid& g_grid,
                                      const AnalogBeamformer& w_rf);

/// Same quotient with g built on the fly from the transmitted signals.
QuotientResult delay_doppler_quotient(const SignalGrid& y_grid, const SignalGrid& x_grid,
                                      double theta_hat_deg, const AnalogBeamformer& w_rf,
                                      double spacing_over_lambda = 0.5);

/// |sum_p (sum_q z e^{-j2pi qm/Q}) e^{j2pi pn/P}| on n in [0, P),
/// m in [-Q/2, Q - Q/2). Column c of `magnitude` holds m = c + m_min().
struct DelayDopplerMap {
  RMatrix magnitude;
  int peak_n = 0;
  int peak_m = 0;

  int m_min() const { return -static_cast<int>(magnitude.cols() / 2); }
};

DelayDopplerMap delay_doppler_map(const CMatrix& z);

/// Arg-max of the periodogram; ties go to the smallest n, then smallest m.
std::pair<int, int> periodogram_peak(const CMatrix& z);

struct DelayDopplerEstimate {
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  double range_m = 0.0;
  double velocity_mps = 0.0;
};

/// tau = n/(P df), f_D = m/(Q T_s); range = c tau/2, velocity = c f_D/(2 f_c).
DelayDopplerEstimate recover_parameters(int n_star, int m_star, const Waveform& wf);

struct SensingEstimate {
  double doa_deg = 0.0;
  int n_star = 0;
  int m_star = 0;
  double delay_s = 0.0;
  double doppler_hz = 0.0;
  double range_m = 0.0;
  double velocity_mps = 0.0;
};

/// Sums per-target maps after scaling each to a unit maximum.
RMatrix combine_normalized_maps(const std::vector<DelayDopplerMap>& maps);

}  // namespace fdisac
