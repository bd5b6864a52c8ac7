#include "fdisac/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fdisac/array.hpp"

namespace fdisac {

Waveform Waveform::from_symbol_duration(int n_subcarriers, int n_symbols,
                                        double subcarrier_spacing_hz,
                                        double symbol_duration_s, double carrier_hz) {
  Waveform wf;
  wf.n_subcarriers = n_subcarriers;
  wf.n_symbols = n_symbols;
  wf.subcarrier_spacing_hz = subcarrier_spacing_hz;
  wf.symbol_duration_s = symbol_duration_s;
  wf.cp_duration_s = symbol_duration_s - 1.0 / subcarrier_spacing_hz;
  wf.carrier_hz = carrier_hz;
  wf.validate();
  return wf;
}

void Waveform::validate() const {
  if (n_subcarriers < 1 || n_symbols < 1)
    throw InvalidArgument("waveform needs at least one subcarrier and one symbol");
  if (!(subcarrier_spacing_hz > 0.0) || !(symbol_duration_s > 0.0) || !(carrier_hz > 0.0))
    throw InvalidArgument("waveform spacing, symbol duration and carrier must be positive");
  if (cp_duration_s < -1e-12 * symbol_duration_s)
    throw InvalidArgument("symbol duration " + std::to_string(symbol_duration_s) +
                          " s is shorter than 1/subcarrier_spacing");
  const double expected = 1.0 / subcarrier_spacing_hz + cp_duration_s;
  if (std::abs(expected - symbol_duration_s) > 1e-12 * symbol_duration_s)
    throw InvalidArgument("symbol duration must equal 1/subcarrier_spacing + cp");
}

double Waveform::range_bin_m() const {
  return kSpeedOfLight / (2.0 * n_subcarriers * subcarrier_spacing_hz);
}

double Waveform::velocity_bin_mps() const {
  return kSpeedOfLight / (2.0 * carrier_hz * n_symbols * symbol_duration_s);
}

CMatrix gen_dl_channel(const std::vector<PathParams>& paths, int m_u, int n_b,
                       double spacing) {
  if (paths.empty()) throw InvalidArgument("DL channel needs at least one path");
  if (m_u < 1 || n_b < 1) throw InvalidArgument("DL channel dimensions must be >= 1");
  CMatrix h = CMatrix::Zero(m_u, n_b);
  for (const auto& path : paths) {
    h.noalias() += path.gain * ula_response(m_u, path.angle_deg, spacing) *
                   ula_response(n_b, path.angle_deg, spacing).adjoint();
  }
  return h;
}

CMatrix gen_ul_channel(const PathParams& path, int m_b, int n_u, double spacing) {
  if (m_b < 1 || n_u < 1) throw InvalidArgument("UL channel dimensions must be >= 1");
  return path.gain * ula_response(m_b, path.angle_deg, spacing) *
         ula_response(n_u, path.angle_deg, spacing).adjoint();
}

Complex radar_phase(const TargetParams& target, int p, int q, const Waveform& wf) {
  const double cycles = q * wf.symbol_duration_s * target.doppler_hz(wf.carrier_hz) -
                        p * target.delay_s() * wf.subcarrier_spacing_hz;
  return std::polar(1.0, 2.0 * kPi * cycles);
}

CMatrix radar_channel_at(const std::vector<TargetParams>& targets, int p, int q,
                         const Waveform& wf, int m_b, int n_b, double spacing) {
  if (p < 0 || p >= wf.n_subcarriers || q < 0 || q >= wf.n_symbols)
    throw InvalidArgument("radar channel index (" + std::to_string(p) + ", " +
                          std::to_string(q) + ") outside the OFDM grid");
  if (m_b < 1 || n_b < 1) throw InvalidArgument("radar channel dimensions must be >= 1");
  CMatrix h = CMatrix::Zero(m_b, n_b);
  for (const auto& t : targets) {
    h.noalias() += t.gain * radar_phase(t, p, q, wf) * ula_response(m_b, t.angle_deg, spacing) *
                   ula_response(n_b, t.angle_deg, spacing).adjoint();
  }
  return h;
}

CMatrix gen_si_channel(int m_b, int n_b, double kappa_db, double pathloss_db, Rng& rng) {
  if (m_b < 1 || n_b < 1) throw InvalidArgument("SI channel dimensions must be >= 1");
  const double g = db_to_linear(-pathloss_db);
  const CMatrix los = ula_response(m_b, 0.0) * ula_response(n_b, 0.0).adjoint();
  if (std::isinf(kappa_db) && kappa_db > 0) return std::sqrt(g) * los;
  const double kappa = db_to_linear(kappa_db);
  const CMatrix nlos = complex_normal_matrix(rng, m_b, n_b);
  return std::sqrt(g * kappa / (kappa + 1.0)) * los + std::sqrt(g / (kappa + 1.0)) * nlos;
}

CMatrix perturb_estimate(const CMatrix& h, double nmse_db, Rng& rng) {
  if (std::isnan(nmse_db) || (std::isinf(nmse_db) && nmse_db > 0))
    throw InvalidArgument("estimate NMSE must be finite or -inf");
  if (std::isinf(nmse_db) || h.size() == 0) return h;
  const double energy = h.squaredNorm();
  if (energy == 0.0) return h;
  const double per_entry = db_to_linear(nmse_db) * energy / static_cast<double>(h.size());
  return h + complex_normal_matrix(rng, h.rows(), h.cols(), per_entry);
}

}  // namespace fdisac
