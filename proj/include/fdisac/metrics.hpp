#pragma once

#include <vector>

#include "fdisac/common.hpp"
#include "fdisac/optimize.hpp"

namespace fdisac {

struct LinkMetrics {
  double gamma_rad = 0.0;
  double gamma_dl = 0.0;
  double gamma_ul = 0.0;
  double rate_dl = 0.0;
  double rate_ul = 0.0;
};

/// log2(1 + gamma).
double rate_from_sinr(double gamma);

/// |W_rf^H H_rad V_rf V_bb|_F^2 / (|(H~ + C + D) V_bb|_F^2 + |W_rf|_F^2 sigma^2).
/// h_tilde is the compressed SI channel the receiver actually sees; the
/// cancellers come from bf, so an imperfect estimate leaves a residual.
double radar_sinr(const HybridBeamformers& bf, const CMatrix& h_rad, const CMatrix& h_tilde,
                  double sigma_b2);

/// |W_u^H H_dl V_rf V_bb|_F^2 / (|W_u|_F^2 sigma^2).
double dl_snr(const HybridBeamformers& bf, const CMatrix& h_dl, double sigma_u2);

/// Per-stream DL SINRs with inter-stream interference, for inspection.
std::vector<double> dl_stream_sinrs(const HybridBeamformers& bf, const CMatrix& h_dl,
                                    double sigma_u2);

/// UL SINR with combiner w (M_rf x 1). Interference is the full radar echo
/// of the DL signal (UL user included) plus the post-cancellation SI residual.
double ul_sinr(const HybridBeamformers& bf, const CMatrix& w_bb, const CMatrix& h_ul,
               const CMatrix& h_rad, const CMatrix& h_tilde, double sigma_b2);

/// Same, using bf.w_b_bb.
double ul_sinr(const HybridBeamformers& bf, const CMatrix& h_ul, const CMatrix& h_rad,
               const CMatrix& h_tilde, double sigma_b2);

/// Fully digital, interference-free DL rate: top-st right singular modes at
/// equal power p_b/st, log2 det(I + (p_b/st/sigma^2) H V V^H H^H).
double ideal_dl_rate(const CMatrix& h_dl, double p_b_watts, double sigma_u2, int st);

/// Everything at once; rate_ul uses bf.w_b_bb.
LinkMetrics evaluate_links(const HybridBeamformers& bf, const EstimatedChannels& truth,
                           const CMatrix& h_tilde, double sigma_b2, double sigma_u2);

}  // namespace fdisac
