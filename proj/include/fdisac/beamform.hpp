#pragma once

#include <vector>

#include "fdisac/array.hpp"
#include "fdisac/common.hpp"

namespace fdisac {

/// Partially-connected phase-shifter network. Chain i drives its own
/// subarray: the assembled (n_rf * n_a) x n_rf matrix is block diagonal with
/// chain i's vector in rows [i n_a, (i+1) n_a) of column i.
class AnalogBeamformer {
 public:
  AnalogBeamformer() = default;

  /// Validates equal lengths and |v_n|^2 = 1/n_a for every entry.
  static AnalogBeamformer assemble(std::vector<CVector> per_chain,
                                   double modulus_tol = 1e-9);

  /// Chain i uses codebook entry indices[i].
  static AnalogBeamformer from_codebook(const Codebook& cb, const std::vector<int>& indices);

  const CMatrix& matrix() const { return assembled_; }
  const std::vector<CVector>& per_chain() const { return per_chain_; }
  /// Codebook indices, empty when assembled from raw vectors.
  const std::vector<int>& codebook_indices() const { return indices_; }

  int n_rf() const { return static_cast<int>(per_chain_.size()); }
  int n_per_chain() const { return n_per_chain_; }
  int n_antennas() const { return n_rf() * n_per_chain_; }

 private:
  std::vector<CVector> per_chain_;
  std::vector<int> indices_;
  CMatrix assembled_;
  int n_per_chain_ = 0;
};

inline AnalogBeamformer assemble_analog(std::vector<CVector> per_chain) {
  return AnalogBeamformer::assemble(std::move(per_chain));
}

/// Baseband precoder/combiner. For the BS transmitter this is n_rf x st.
struct DigitalPrecoder {
  CMatrix matrix;
};

/// x = V_rf V_bb s.
CVector tx_signal(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb, const CVector& s);

/// E|V_rf V_bb s|^2 for zero-mean unit-variance i.i.d. symbols, i.e. |V_rf V_bb|_F^2.
double tx_power(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb);

}  // namespace fdisac
