#include "fdisac/beamform.hpp"

#include <cmath>
#include <string>

namespace fdisac {

AnalogBeamformer AnalogBeamformer::assemble(std::vector<CVector> per_chain, double modulus_tol) {
  if (per_chain.empty()) throw InvalidArgument("analog beamformer needs at least one chain");
  const Eigen::Index n_a = per_chain.front().size();
  if (n_a < 1) throw InvalidArgument("analog beamformer chains must be non-empty");
  const double target = 1.0 / static_cast<double>(n_a);
  for (std::size_t i = 0; i < per_chain.size(); ++i) {
    if (per_chain[i].size() != n_a)
      throw InvalidArgument("analog beamformer chains have different lengths");
    for (Eigen::Index n = 0; n < n_a; ++n) {
      if (std::abs(std::norm(per_chain[i](n)) - target) > modulus_tol)
        throw ConstraintViolation("chain " + std::to_string(i) + " element " +
                                  std::to_string(n) + " violates constant modulus 1/" +
                                  std::to_string(n_a));
    }
  }
  AnalogBeamformer bf;
  bf.n_per_chain_ = static_cast<int>(n_a);
  const auto n_rf = static_cast<Eigen::Index>(per_chain.size());
  bf.assembled_ = CMatrix::Zero(n_rf * n_a, n_rf);
  for (Eigen::Index i = 0; i < n_rf; ++i) bf.assembled_.block(i * n_a, i, n_a, 1) = per_chain[i];
  bf.per_chain_ = std::move(per_chain);
  return bf;
}

AnalogBeamformer AnalogBeamformer::from_codebook(const Codebook& cb,
                                                 const std::vector<int>& indices) {
  std::vector<CVector> chains;
  chains.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= cb.size())
      throw InvalidArgument("codebook index " + std::to_string(idx) + " out of range");
    chains.push_back(cb[idx]);
  }
  AnalogBeamformer bf = assemble(std::move(chains));
  bf.indices_ = indices;
  return bf;
}

CVector tx_signal(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb, const CVector& s) {
  if (v_bb.matrix.rows() != v_rf.n_rf() || v_bb.matrix.cols() != s.size())
    throw InvalidArgument("tx_signal: shape mismatch between V_rf, V_bb and s");
  return v_rf.matrix() * (v_bb.matrix * s);
}

double tx_power(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb) {
  if (v_bb.matrix.rows() != v_rf.n_rf())
    throw InvalidArgument("tx_power: V_bb rows must equal the number of RF chains");
  return (v_rf.matrix() * v_bb.matrix).squaredNorm();
}

}  // namespace fdisac
