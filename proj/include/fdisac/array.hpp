#pragma once

#include <vector>

#include "fdisac/common.hpp"

namespace fdisac {

// Angles cross the public API in degrees and are converted to radians
// internally. Broadside is 0 deg; the valid range is [-90, 90].

/// ULA response a_N(theta). Element n is exp(j 2 pi d/lambda n sin(theta)).
struct SteeringVector {
  CVector elements;
  int n_elems = 0;
  double angle_deg = 0.0;
  double spacing_over_lambda = 0.5;
};

SteeringVector steering_vector(int n_elems, double angle_deg,
                               double spacing_over_lambda = 0.5);

/// Same formula as steering_vector, returning just the elements.
CVector ula_response(int n_elems, double angle_deg, double spacing_over_lambda = 0.5);

/// Phase-shifter codebook: 2^n_bits constant-modulus beams.
struct Codebook {
  std::vector<CVector> vectors;
  std::vector<double> angles_deg;  // pointing direction of each beam
  int n_bits = 0;
  int n_elems = 0;

  std::size_t size() const { return vectors.size(); }
  const CVector& operator[](std::size_t i) const { return vectors[i]; }
};

/// DFT-style codebook on a uniform grid in sin(theta):
/// beam m points at arcsin(-1 + 2m / 2^n_bits) and is scaled by 1/sqrt(n_elems).
Codebook dft_codebook(int n_elems, int n_bits, double spacing_over_lambda = 0.5);

}  // namespace fdisac
