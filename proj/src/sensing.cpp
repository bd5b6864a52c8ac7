#include "fdisac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/FFT>

#include "fdisac/array.hpp"

namespace fdisac {

CMatrix sample_covariance(const CMatrix& snapshots) {
  if (snapshots.cols() == 0 || snapshots.rows() == 0)
    throw InvalidArgument("sample covariance needs at least one snapshot");
  CMatrix r = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
  // Exact Hermitian symmetry regardless of summation order.
  return (r + r.adjoint()) / 2.0;
}

CMatrix sample_covariance(const std::vector<CVector>& snapshots) {
  if (snapshots.empty()) throw InvalidArgument("sample covariance needs at least one snapshot");
  const Eigen::Index m = snapshots.front().size();
  CMatrix stacked(m, static_cast<Eigen::Index>(snapshots.size()));
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i].size() != m)
      throw InvalidArgument("sample covariance snapshots have different lengths");
    stacked.col(static_cast<Eigen::Index>(i)) = snapshots[i];
  }
  return sample_covariance(stacked);
}

namespace {

RVector angle_grid(double step) {
  if (!(step > 0.0) || step > 180.0) throw InvalidArgument("MUSIC grid step must be in (0, 180]");
  const auto n = static_cast<Eigen::Index>(std::floor(180.0 / step + 1e-9)) + 1;
  RVector grid(n);
  for (Eigen::Index i = 0; i < n; ++i) grid(i) = std::min(90.0, -90.0 + step * i);
  return grid;
}

// Shared MUSIC core. manifold(theta) returns the (unnormalized) steering
// vector in the snapshot domain; `normalize` selects |u|^2/|E_n^H u|^2.
template <typename Manifold>
MusicResult music_core(const CMatrix& r, int k, double grid_step, Manifold&& manifold,
                       bool normalize) {
  const auto m = static_cast<int>(r.rows());
  if (r.cols() != m) throw InvalidArgument("MUSIC covariance must be square");
  if (k < 1) throw InvalidArgument("MUSIC needs k >= 1");
  if (k >= m)
    throw InvalidArgument("MUSIC needs k < array size (k = " + std::to_string(k) +
                          ", size = " + std::to_string(m) + ")");

  const CMatrix herm = (r + r.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  if (eig.info() != Eigen::Success) throw NumericalFailure("MUSIC eigendecomposition failed");

  MusicResult res;
  res.grid_step_deg = grid_step;
  res.eigenvalues = eig.eigenvalues();
  const CMatrix noise = eig.eigenvectors().leftCols(m - k);

  const double lam_max = std::max(std::abs(res.eigenvalues(m - 1)), 1e-300);
  const double noise_top = res.eigenvalues(m - k - 1);
  const double signal_low = res.eigenvalues(m - k);
  res.reliable = signal_low - noise_top > 1e-6 * lam_max;

  res.grid_deg = angle_grid(grid_step);
  const Eigen::Index n = res.grid_deg.size();
  res.spectrum.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CVector u = manifold(res.grid_deg(i));
    const double proj = (noise.adjoint() * u).squaredNorm();
    const double num = normalize ? u.squaredNorm() : 1.0;
    if (num == 0.0) {
      res.spectrum(i) = 0.0;
      continue;
    }
    res.spectrum(i) = num / std::max(proj, std::numeric_limits<double>::min());
  }

  // Local maxima; plateaus count once at their left edge.
  std::vector<Eigen::Index> peaks;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = res.spectrum(i);
    const bool left = i == 0 || v > res.spectrum(i - 1);
    const bool right = i == n - 1 || v >= res.spectrum(i + 1);
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](Eigen::Index a, Eigen::Index b) {
    return res.spectrum(a) > res.spectrum(b);
  });
  std::vector<double> found;
  for (std::size_t i = 0; i < peaks.size() && static_cast<int>(i) < k; ++i)
    found.push_back(res.grid_deg(peaks[i]));
  std::sort(found.begin(), found.end());
  if (static_cast<int>(found.size()) < k)
    throw EstimationFailure("MUSIC found " + std::to_string(found.size()) + " of " +
                                std::to_string(k) + " peaks",
                            found);
  res.doas_deg = std::move(found);
  return res;
}

}  // namespace

MusicResult music_doas(const CMatrix& r, int k, double grid_step_deg, int array_size,
                       double spacing) {
  if (array_size != r.rows())
    throw InvalidArgument("MUSIC array size does not match the covariance dimension");
  return music_core(
      r, k, grid_step_deg,
      [&](double theta) { return ula_response(array_size, theta, spacing); }, false);
}

MusicResult music_doas(const CMatrix& r, int k, double grid_step_deg, const CMatrix& combiner,
                       double spacing) {
  if (combiner.cols() != r.rows())
    throw InvalidArgument("MUSIC combiner columns must match the covariance dimension");
  const auto n_ant = static_cast<int>(combiner.rows());
  const CMatrix wh = combiner.adjoint();
  return music_core(
      r, k, grid_step_deg,
      [&](double theta) -> CVector { return wh * ula_response(n_ant, theta, spacing); }, true);
}

CVector reference_signal(double theta_hat_deg, const CVector& x, int m_b, double spacing) {
  if (x.size() < 1 || m_b < 1) throw InvalidArgument("reference signal needs non-empty inputs");
  const CVector a_tx = ula_response(static_cast<int>(x.size()), theta_hat_deg, spacing);
  return ula_response(m_b, theta_hat_deg, spacing) * a_tx.dot(x);
}

namespace {

void check_grid_shapes(const SignalGrid& y, const SignalGrid& other, const AnalogBeamformer& w) {
  if (y.n_subcarriers < 1 || y.n_symbols < 1 ||
      y.cells.size() != static_cast<std::size_t>(y.n_subcarriers) * y.n_symbols)
    throw InvalidArgument("quotient: incomplete received-signal grid");
  if (other.n_subcarriers != y.n_subcarriers || other.n_symbols != y.n_symbols ||
      other.cells.size() != y.cells.size())
    throw InvalidArgument("quotient: grids have different shapes");
  for (const auto& c : y.cells)
    if (c.size() != w.n_rf()) throw InvalidArgument("quotient: y cells must have M_rf entries");
}

// Accumulates one cell. `g` has M_b entries; `expanded` is W ytilde.
Complex quotient_cell(const CVector& expanded, const CVector& g, double guard, bool& failed) {
  Complex acc{0.0, 0.0};
  int used = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g(i)) < guard) continue;
    acc += expanded(i) / g(i);
    ++used;
  }
  failed = used == 0;
  return failed ? Complex{0.0, 0.0} : acc / static_cast<double>(used);
}

}  // namespace

std::vector<SignalGrid> separate_targets(const SignalGrid& y_grid,
                                         const std::vector<double>& doas_deg,
                                         const AnalogBeamformer& w_rf, double spacing) {
  const auto k = static_cast<Eigen::Index>(doas_deg.size());
  if (k == 0) throw InvalidArgument("separate_targets: no directions given");
  CMatrix u(w_rf.n_rf(), k);
  for (Eigen::Index i = 0; i < k; ++i)
    u.col(i) = w_rf.matrix().adjoint() * ula_response(w_rf.n_antennas(), doas_deg[i], spacing);
  const CMatrix u_pinv = u.completeOrthogonalDecomposition().pseudoInverse();

  std::vector<SignalGrid> out(k, SignalGrid(y_grid.n_subcarriers, y_grid.n_symbols));
  for (std::size_t c = 0; c < y_grid.cells.size(); ++c) {
    if (y_grid.cells[c].size() != w_rf.n_rf())
      throw InvalidArgument("separate_targets: snapshots must have one entry per RF chain");
    const CVector amp = u_pinv * y_grid.cells[c];
    for (Eigen::Index i = 0; i < k; ++i) out[i].cells[c] = u.col(i) * amp(i);
  }
  return out;
}

QuotientResult delay_doppler_quotient(const SignalGrid& y_grid, const SignalGrid& g_grid,
                                      const AnalogBeamformer& w_rf) {
  check_grid_shapes(y_grid, g_grid, w_rf);
  double g_max = 0.0;
  for (const auto& g : g_grid.cells) {
    if (g.size() != w_rf.n_antennas())
      throw InvalidArgument("quotient: reference cells must have M_b entries");
    if (g.size() > 0) g_max = std::max(g_max, g.cwiseAbs().maxCoeff());
  }
  const double guard = 1e-8 * g_max;

  QuotientResult res;
  res.z = CMatrix::Zero(y_grid.n_subcarriers, y_grid.n_symbols);
  res.failed.assign(y_grid.cells.size(), 0);
  for (int p = 0; p < y_grid.n_subcarriers; ++p) {
    for (int q = 0; q < y_grid.n_symbols; ++q) {
      const CVector expanded = w_rf.matrix() * y_grid.at(p, q);
      bool failed = false;
      res.z(p, q) = g_max > 0.0 ? quotient_cell(expanded, g_grid.at(p, q), guard, failed)
                                : (failed = true, Complex{});
      if (failed) {
        res.failed[static_cast<std::size_t>(p) * y_grid.n_symbols + q] = 1;
        ++res.n_failed;
      }
    }
  }
  return res;
}

QuotientResult delay_doppler_quotient(const SignalGrid& y_grid, const SignalGrid& x_grid,
                                      double theta_hat_deg, const AnalogBeamformer& w_rf,
                                      double spacing) {
  check_grid_shapes(y_grid, x_grid, w_rf);
  const int m_b = w_rf.n_antennas();
  const CVector a_rx = ula_response(m_b, theta_hat_deg, spacing);
  const auto n_tx = static_cast<int>(x_grid.cells.front().size());
  const CVector a_tx = ula_response(n_tx, theta_hat_deg, spacing);

  // g = a_rx * (a_tx^H x): every entry has modulus |a_tx^H x|, so the global
  // guard reduces to a per-cell test on that scalar.
  std::vector<Complex> proj(x_grid.cells.size());
  double g_max = 0.0;
  for (std::size_t i = 0; i < x_grid.cells.size(); ++i) {
    if (x_grid.cells[i].size() != n_tx) throw InvalidArgument("quotient: ragged x grid");
    proj[i] = a_tx.dot(x_grid.cells[i]);
    g_max = std::max(g_max, std::abs(proj[i]));
  }
  const double guard = 1e-8 * g_max;
  // a_rx^H (W y) = (W^H a_rx)^H y, so the per-cell work stays in the RF-chain domain.
  const CVector beam = w_rf.matrix().adjoint() * a_rx;

  QuotientResult res;
  res.z = CMatrix::Zero(y_grid.n_subcarriers, y_grid.n_symbols);
  res.failed.assign(y_grid.cells.size(), 0);
  for (int p = 0; p < y_grid.n_subcarriers; ++p) {
    for (int q = 0; q < y_grid.n_symbols; ++q) {
      const std::size_t idx = static_cast<std::size_t>(p) * y_grid.n_symbols + q;
      if (g_max == 0.0 || std::abs(proj[idx]) < guard) {
        res.failed[idx] = 1;
        ++res.n_failed;
        continue;
      }
      // sum_i [W y]_i / (a_i c) = (1/c) sum_i conj(a_i) [W y]_i since |a_i| = 1.
      res.z(p, q) = beam.dot(y_grid.at(p, q)) / (proj[idx] * static_cast<double>(m_b));
    }
  }
  return res;
}

DelayDopplerMap delay_doppler_map(const CMatrix& z) {
  const auto n_p = static_cast<int>(z.rows());
  const auto n_q = static_cast<int>(z.cols());
  if (n_p < 1 || n_q < 1) throw InvalidArgument("periodogram needs a non-empty grid");

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);

  // Forward transform along symbols (q -> m), then unscaled inverse along
  // subcarriers (p -> n).
  CMatrix stage(n_p, n_q);
  std::vector<Complex> in(n_q), out(n_q);
  for (int p = 0; p < n_p; ++p) {
    for (int q = 0; q < n_q; ++q) in[q] = z(p, q);
    fft.fwd(out, in);
    for (int q = 0; q < n_q; ++q) stage(p, q) = out[q];
  }
  CMatrix spec(n_p, n_q);
  std::vector<Complex> col_in(n_p), col_out(n_p);
  for (int q = 0; q < n_q; ++q) {
    for (int p = 0; p < n_p; ++p) col_in[p] = stage(p, q);
    fft.inv(col_out, col_in);
    for (int p = 0; p < n_p; ++p) spec(p, q) = col_out[p];
  }

  DelayDopplerMap map;
  map.magnitude.resize(n_p, n_q);
  const int m_min = -(n_q / 2);
  for (int c = 0; c < n_q; ++c) {
    const int m = c + m_min;
    const int bin = ((m % n_q) + n_q) % n_q;
    for (int n = 0; n < n_p; ++n) map.magnitude(n, c) = std::abs(spec(n, bin));
  }
  double best = -1.0;
  for (int n = 0; n < n_p; ++n) {
    for (int c = 0; c < n_q; ++c) {
      if (map.magnitude(n, c) > best) {
        best = map.magnitude(n, c);
        map.peak_n = n;
        map.peak_m = c + m_min;
      }
    }
  }
  return map;
}

std::pair<int, int> periodogram_peak(const CMatrix& z) {
  const DelayDopplerMap map = delay_doppler_map(z);
  return {map.peak_n, map.peak_m};
}

DelayDopplerEstimate recover_parameters(int n_star, int m_star, const Waveform& wf) {
  wf.validate();
  DelayDopplerEstimate est;
  est.delay_s = n_star / (wf.n_subcarriers * wf.subcarrier_spacing_hz);
  est.doppler_hz = m_star / (wf.n_symbols * wf.symbol_duration_s);
  est.range_m = kSpeedOfLight * est.delay_s / 2.0;
  est.velocity_mps = kSpeedOfLight * est.doppler_hz / (2.0 * wf.carrier_hz);
  return est;
}

RMatrix combine_normalized_maps(const std::vector<DelayDopplerMap>& maps) {
  if (maps.empty()) return {};
  RMatrix sum = RMatrix::Zero(maps.front().magnitude.rows(), maps.front().magnitude.cols());
  for (const auto& m : maps) {
    if (m.magnitude.rows() != sum.rows() || m.magnitude.cols() != sum.cols())
      throw InvalidArgument("cannot combine delay-Doppler maps of different shapes");
    const double peak = m.magnitude.maxCoeff();
    if (peak > 0.0) sum += m.magnitude / peak;
  }
  return sum;
}

}  // namespace fdisac
