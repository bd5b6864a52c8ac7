#include "fdisac/array.hpp"

#include <cmath>
#include <string>

namespace fdisac {

namespace {

void check_ula_args(int n_elems, double angle_deg, double spacing) {
  if (n_elems < 1) throw InvalidArgument("steering vector needs n_elems >= 1");
  if (!(angle_deg >= -90.0 && angle_deg <= 90.0))
    throw InvalidArgument("angle " + std::to_string(angle_deg) +
                          " deg outside [-90, 90]");
  if (!(spacing > 0.0)) throw InvalidArgument("element spacing must be positive");
}

}  // namespace

CVector ula_response(int n_elems, double angle_deg, double spacing_over_lambda) {
  check_ula_args(n_elems, angle_deg, spacing_over_lambda);
  const double step = 2.0 * kPi * spacing_over_lambda * std::sin(deg_to_rad(angle_deg));
  CVector a(n_elems);
  for (int n = 0; n < n_elems; ++n) a(n) = std::polar(1.0, step * n);
  return a;
}

SteeringVector steering_vector(int n_elems, double angle_deg, double spacing_over_lambda) {
  return {ula_response(n_elems, angle_deg, spacing_over_lambda), n_elems, angle_deg,
          spacing_over_lambda};
}

Codebook dft_codebook(int n_elems, int n_bits, double spacing_over_lambda) {
  if (n_elems < 1) throw InvalidArgument("codebook needs n_elems >= 1");
  if (n_bits < 1) throw InvalidArgument("codebook needs n_bits >= 1");
  if (n_bits > 20) throw InvalidArgument("codebook with 2^" + std::to_string(n_bits) +
                                         " entries is too large");
  const int size = 1 << n_bits;
  Codebook cb;
  cb.n_bits = n_bits;
  cb.n_elems = n_elems;
  cb.vectors.reserve(size);
  cb.angles_deg.reserve(size);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elems));
  for (int m = 0; m < size; ++m) {
    const double s = -1.0 + 2.0 * m / size;
    const double angle = std::asin(s) * 180.0 / kPi;
    cb.angles_deg.push_back(angle);
    cb.vectors.push_back(ula_response(n_elems, angle, spacing_over_lambda) * scale);
  }
  return cb;
}

}  // namespace fdisac
