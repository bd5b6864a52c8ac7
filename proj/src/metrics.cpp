#include "fdisac/metrics.hpp"

#include <cmath>

namespace fdisac {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw InvalidArgument(std::string(what) + " must be positive");
}

CMatrix residual_after_cancellation(const HybridBeamformers& bf, const CMatrix& h_tilde) {
  if (bf.cancellers.analog.size() == 0) return h_tilde;
  return post_digital_residual(h_tilde, bf.cancellers);
}

}  // namespace

double rate_from_sinr(double gamma) { return std::log2(1.0 + std::max(gamma, 0.0)); }

double radar_sinr(const HybridBeamformers& bf, const CMatrix& h_rad, const CMatrix& h_tilde,
                  double sigma_b2) {
  require_positive(sigma_b2, "sigma_b^2");
  const CMatrix& w = bf.w_b_rf.matrix();
  const CMatrix& v = bf.v_b_rf.matrix();
  if (h_rad.rows() != w.rows() || h_rad.cols() != v.rows())
    throw InvalidArgument("radar SINR: H_rad does not match the analog beamformers");
  const double signal = (w.adjoint() * h_rad * v * bf.v_b_bb.matrix).squaredNorm();
  const double si = (residual_after_cancellation(bf, h_tilde) * bf.v_b_bb.matrix).squaredNorm();
  return signal / (si + w.squaredNorm() * sigma_b2);
}

double dl_snr(const HybridBeamformers& bf, const CMatrix& h_dl, double sigma_u2) {
  require_positive(sigma_u2, "sigma_u^2");
  const CMatrix& v = bf.v_b_rf.matrix();
  if (h_dl.cols() != v.rows() || h_dl.rows() != bf.w_u.rows())
    throw InvalidArgument("DL SNR: shape mismatch");
  const double w_energy = bf.w_u.squaredNorm();
  if (w_energy == 0.0) return 0.0;
  return (bf.w_u.adjoint() * h_dl * v * bf.v_b_bb.matrix).squaredNorm() / (w_energy * sigma_u2);
}

std::vector<double> dl_stream_sinrs(const HybridBeamformers& bf, const CMatrix& h_dl,
                                    double sigma_u2) {
  require_positive(sigma_u2, "sigma_u^2");
  const CMatrix gains = bf.w_u.adjoint() * h_dl * bf.v_b_rf.matrix() * bf.v_b_bb.matrix;
  const Eigen::Index n = std::min(gains.rows(), gains.cols());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) {
    const double useful = std::norm(gains(s, s));
    const double leak = gains.row(s).squaredNorm() - useful;
    out[s] = useful / (leak + bf.w_u.col(s).squaredNorm() * sigma_u2);
  }
  return out;
}

double ul_sinr(const HybridBeamformers& bf, const CMatrix& w_bb, const CMatrix& h_ul,
               const CMatrix& h_rad, const CMatrix& h_tilde, double sigma_b2) {
  require_positive(sigma_b2, "sigma_b^2");
  const CMatrix& w_rf = bf.w_b_rf.matrix();
  if (w_bb.rows() != w_rf.cols() || h_ul.rows() != w_rf.rows() ||
      h_ul.cols() != bf.v_u_bb.size())
    throw InvalidArgument("UL SINR: shape mismatch");
  const CMatrix w = w_rf * w_bb;
  const double signal = (w.adjoint() * h_ul * bf.v_u_bb).squaredNorm();
  const double radar = (w.adjoint() * h_rad * bf.v_b_rf.matrix() * bf.v_b_bb.matrix).squaredNorm();
  const double si =
      (w_bb.adjoint() * residual_after_cancellation(bf, h_tilde) * bf.v_b_bb.matrix).squaredNorm();
  return signal / (radar + si + sigma_b2);
}

double ul_sinr(const HybridBeamformers& bf, const CMatrix& h_ul, const CMatrix& h_rad,
               const CMatrix& h_tilde, double sigma_b2) {
  return ul_sinr(bf, bf.w_b_bb, h_ul, h_rad, h_tilde, sigma_b2);
}

double ideal_dl_rate(const CMatrix& h_dl, double p_b_watts, double sigma_u2, int st) {
  require_positive(sigma_u2, "sigma_u^2");
  if (p_b_watts < 0.0) throw InvalidArgument("P_b must be >= 0");
  if (st < 1) throw InvalidArgument("stream count must be >= 1");
  if (p_b_watts == 0.0 || h_dl.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(h_dl);
  const RVector& sv = svd.singularValues();
  const double per_stream = p_b_watts / st / sigma_u2;
  double rate = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(st, sv.size()); ++i)
    rate += std::log2(1.0 + per_stream * sv(i) * sv(i));
  return rate;
}

LinkMetrics evaluate_links(const HybridBeamformers& bf, const EstimatedChannels& truth,
                           const CMatrix& h_tilde, double sigma_b2, double sigma_u2) {
  LinkMetrics m;
  m.gamma_rad = radar_sinr(bf, truth.h_rad, h_tilde, sigma_b2);
  m.gamma_dl = dl_snr(bf, truth.h_dl, sigma_u2);
  m.gamma_ul = ul_sinr(bf, truth.h_ul, truth.h_rad, h_tilde, sigma_b2);
  m.rate_dl = rate_from_sinr(m.gamma_dl);
  m.rate_ul = rate_from_sinr(m.gamma_ul);
  return m;
}

}  // namespace fdisac
