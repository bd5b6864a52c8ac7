#pragma once

#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/beamform.hpp"
#include "fdisac/cancel.hpp"
#include "fdisac/common.hpp"

namespace fdisac {

/// Antenna and RF-chain counts of the base station and the two users.
struct ArrayLayout {
  int n_b_rf = 8;  // TX RF chains
  int n_b_a = 16;  // TX antennas per chain
  int m_b_rf = 8;  // RX RF chains
  int m_b_a = 16;  // RX antennas per chain
  int n_u = 4;     // UL user antennas
  int m_u = 4;     // DL user antennas
  double spacing_over_lambda = 0.5;

  int n_b() const { return n_b_rf * n_b_a; }
  int m_b() const { return m_b_rf * m_b_a; }
  /// Downlink streams st = min(N_b^RF, M_u).
  int streams() const { return n_b_rf < m_u ? n_b_rf : m_u; }
  void validate() const;
};

/// Channel knowledge the optimizer works from. The UL user is the last
/// radar target, so h_rad = h_rad_int + a_{M_b}(phi) a_{N_b}^H(phi).
struct EstimatedChannels {
  CMatrix h_rad;      // M_b x N_b
  CMatrix h_rad_int;  // M_b x N_b, radar paths without the UL user
  CMatrix h_dl;       // M_u x N_b
  CMatrix h_ul;       // M_b x N_u
  CMatrix h_bb;       // M_b x N_b, SI channel
};

/// Builds the unit-gain steering models from estimated directions:
/// interferer_doas are the K-1 non-UL targets, dl_doas the L DL scatterers.
EstimatedChannels build_estimated_channels(const ArrayLayout& layout,
                                           const std::vector<double>& interferer_doas,
                                           const std::vector<double>& dl_doas, double ul_doa,
                                           const CMatrix& h_bb_hat);

struct HybridBeamformers {
  AnalogBeamformer v_b_rf;
  DigitalPrecoder v_b_bb;  // N_b^RF x st
  AnalogBeamformer w_b_rf;
  CMatrix w_b_bb;          // M_b^RF x 1, unit-norm columns
  CMatrix w_u;             // M_u x st
  CVector v_u_bb;          // N_u
  CancellerPair cancellers;

  bool closed_form = false;       // M_b^RF = 1 branch taken
  std::vector<double> multipliers;  // zeta per SI constraint
};

// ---------------------------------------------------------------------------
// Analog stage: per-chain codebook searches.

/// Chain i maximizes |H_rad(:, block i) v|^2 over the codebook (lowest index
/// wins ties). The Frobenius objective separates over chains, so this is the
/// joint optimum.
AnalogBeamformer select_tx_analog(const CMatrix& h_rad_hat, const Codebook& cb, int n_rf);

/// Chain j maximizes its own radar-to-SI ratio
/// |w^H H_rad(block j, :) V_rf|^2 / (|w^H H_bb(block j, :) V_rf|^2 + 1e-12).
AnalogBeamformer select_rx_analog(const CMatrix& h_rad_hat, const CMatrix& h_bb_hat,
                                  const AnalogBeamformer& v_rf, const Codebook& cb);

// ---------------------------------------------------------------------------
// TX digital precoder:
//   minimize |H V - G|_F^2 + ridge |V|_F^2   s.t. |V^H t_r|^2 <= lambda_b.
// t_r is the conjugate transpose of row r of (H~ + C_b), so |V^H t_r|^2 is
// exactly the SI power leaking into RX chain r.

struct LagrangianPrecoder {
  DigitalPrecoder precoder;
  double zeta = 0.0;
  /// |V0^H t1| for the unconstrained solution V0.
  double unconstrained_leakage = 0.0;
};

/// Closed-form solution for a single SI constraint.
/// A = H^H H + ridge I, V0 = A^{-1} H^H G, s = t1^H A^{-1} t1,
/// zeta = max(|V0^H t1| / sqrt(lambda) - 1, 0) / s,
/// V = (A + zeta t1 t1^H)^{-1} H^H G.
/// lambda_b = +inf disables the constraint.
LagrangianPrecoder lagrangian_tx_precoder(const CMatrix& h_dl_eff, const CVector& t1,
                                          double lambda_b_watts, const CMatrix& g_target,
                                          double ridge);

struct NumericOptions {
  double tol = 1e-12;   // duality gap relative to |G|_F^2
  int max_iter = 2000;  // Newton steps
  double ridge = 0.0;
};

struct NumericPrecoder {
  DigitalPrecoder precoder;
  RVector multipliers;  // one per row of leak_rows
  double objective = 0.0;
  int newton_steps = 0;
};

/// General case (any number of SI constraints): log-barrier interior point
/// with Newton centering. Rows of leak_rows are the SI leakage rows
/// (t_r = row^H). Throws InfeasibleResult carrying the last iterate when the
/// Newton budget runs out.
NumericPrecoder numeric_tx_precoder(const CMatrix& h_dl_eff, const CMatrix& leak_rows,
                                    double lambda_b_watts, const CMatrix& g_target,
                                    const NumericOptions& opts = {});

/// |H V - G|_F^2 + ridge |V|_F^2.
double precoder_objective(const CMatrix& h, const CMatrix& v, const CMatrix& g,
                          double ridge = 0.0);

/// Rescales every column c of V_bb with |[V_rf V_bb]_(:,c)|^2 > budget so
/// that it sits exactly on the budget. Compliant columns are untouched.
DigitalPrecoder power_normalize(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb,
                                double column_budget_watts);

// ---------------------------------------------------------------------------
// RX digital combiner and user side.

/// Top-n left singular vectors, phase-canonicalized, in descending order.
CMatrix top_left_singular_vectors(const CMatrix& h, int n);
/// Top-n right singular vectors, phase-canonicalized, in descending order.
CMatrix top_right_singular_vectors(const CMatrix& h, int n);

/// Null-space projection combiner W = (I - P_int) X, X the top left singular
/// vectors of h_ul_eff and P_int the projector onto the column space of
/// h_rad_int_eff (rank tolerance 1e-10 sigma_max). Columns are unit norm.
/// Throws DegenerateCombiner when a column is annihilated.
CMatrix nsp_rx_combiner(const CMatrix& h_ul_eff, const CMatrix& h_rad_int_eff, int n_streams);

/// Baseline: top left singular vectors of h_ul_eff, ignoring interference.
CMatrix mss_rx_combiner(const CMatrix& h_ul_eff, int n_streams);

struct UserBeamformers {
  CMatrix w_u;     // M_u x st
  CVector v_u_bb;  // N_u, |v|^2 = P_u
};

UserBeamformers user_beamformers(const CMatrix& h_dl_hat, const CMatrix& h_ul_hat, int st,
                                 double p_u_watts);

// ---------------------------------------------------------------------------

struct AlgorithmConfig {
  ArrayLayout layout;
  int codebook_bits = 5;
  int n_taps = 0;
  double p_b_watts = 1.0;
  double p_u_watts = 0.01;
  double lambda_b_watts = 1e-6;
  double ridge_rel = 1e-10;  // ridge = ridge_rel * trace(H^H H) / N_b^RF
  NumericOptions numeric;
};

/// Full joint design from estimated channels: user combiner, TX analog,
/// RX analog, compressed SI channel, cancellers, TX digital precoder
/// (closed form when M_b^RF = 1), per-stream power normalization to
/// P_b/st, UL precoder, NSP combiner. Errors are rethrown with the failing
/// step in the message.
HybridBeamformers run_algorithm1(const EstimatedChannels& est, const AlgorithmConfig& cfg);

/// The G target used by run_algorithm1: H_eff V_st sqrt(power), V_st the
/// top-st right singular vectors of H_eff.
CMatrix precoder_target(const CMatrix& h_dl_eff, int st, double per_stream_power);

}  // namespace fdisac
