#pragma once

#include "fdisac/beamform.hpp"
#include "fdisac/common.hpp"

namespace fdisac {

/// Analog (C_b) and digital (D_b) self-interference cancellers, both
/// M_rf x N_rf, acting on the compressed SI channel W^H H_bb V.
struct CancellerPair {
  CMatrix analog;
  CMatrix digital;
  int n_taps = 0;

  /// Columns of C_b driven by analog taps.
  int active_columns() const {
    return analog.rows() == 0 ? 0 : n_taps / static_cast<int>(analog.rows());
  }
};

/// C_b negates the first n_taps/M_rf columns of the estimate and zeroes the
/// rest; D_b = -(estimate + C_b).
CancellerPair build_cancellers(const CMatrix& h_tilde_hat, int n_taps);

/// Row-wise |[(H~ + C_b) V_bb]_(j,:)|^2 in watts, i.e. the SI power reaching
/// each RX chain's ADC after the analog stage. V_bb carries amplitude
/// sqrt(W); symbol_power scales it for precoders normalized to unit power.
RVector analog_residual_power_per_chain(const CMatrix& h_tilde_true, const CMatrix& c_b,
                                        const DigitalPrecoder& v_bb,
                                        double symbol_power = 1.0);

/// H~ + C_b + D_b: what is left after both cancellation stages.
CMatrix post_digital_residual(const CMatrix& h_tilde_true, const CancellerPair& cancellers);

}  // namespace fdisac
