#include "fdisac/cancel.hpp"

#include <string>

namespace fdisac {

CancellerPair build_cancellers(const CMatrix& h_tilde_hat, int n_taps) {
  const auto m_rf = static_cast<int>(h_tilde_hat.rows());
  const auto n_rf = static_cast<int>(h_tilde_hat.cols());
  if (m_rf < 1 || n_rf < 1) throw InvalidArgument("cancellers need a non-empty SI channel");
  if (n_taps < 0 || n_taps % m_rf != 0)
    throw InvalidArgument("tap count " + std::to_string(n_taps) +
                          " must be a non-negative multiple of M_rf = " + std::to_string(m_rf));
  const int cols = n_taps / m_rf;
  if (cols > n_rf)
    throw InvalidArgument("tap count " + std::to_string(n_taps) + " exceeds M_rf * N_rf = " +
                          std::to_string(m_rf * n_rf));
  CancellerPair pair;
  pair.n_taps = n_taps;
  pair.analog = CMatrix::Zero(m_rf, n_rf);
  pair.analog.leftCols(cols) = -h_tilde_hat.leftCols(cols);
  pair.digital = -(h_tilde_hat + pair.analog);
  return pair;
}

RVector analog_residual_power_per_chain(const CMatrix& h_tilde_true, const CMatrix& c_b,
                                        const DigitalPrecoder& v_bb, double symbol_power) {
  if (h_tilde_true.rows() != c_b.rows() || h_tilde_true.cols() != c_b.cols() ||
      v_bb.matrix.rows() != h_tilde_true.cols())
    throw InvalidArgument("analog residual: shape mismatch");
  const CMatrix leak = (h_tilde_true + c_b) * v_bb.matrix;
  return leak.rowwise().squaredNorm() * symbol_power;
}

CMatrix post_digital_residual(const CMatrix& h_tilde_true, const CancellerPair& cancellers) {
  if (h_tilde_true.rows() != cancellers.analog.rows() ||
      h_tilde_true.cols() != cancellers.analog.cols())
    throw InvalidArgument("post-digital residual: shape mismatch");
  return h_tilde_true + cancellers.analog + cancellers.digital;
}

}  // namespace fdisac
