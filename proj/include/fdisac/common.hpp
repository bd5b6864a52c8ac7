#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdisac {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// All stochastic routines take an explicit generator; there is no global RNG.
using Rng = std::mt19937_64;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error hierarchy. Every library failure derives from fdisac::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A value violates a physical constraint (constant modulus, power budget).
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// An estimator could not produce the requested number of results.
/// Whatever was found is kept in partial_values.
class EstimationFailure : public Error {
 public:
  EstimationFailure(const std::string& what, std::vector<double> partial)
      : Error(what), partial_values(std::move(partial)) {}
  std::vector<double> partial_values;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Iterative solver ran out of iterations; the last iterate is attached.
class InfeasibleResult : public Error {
 public:
  InfeasibleResult(const std::string& what, CMatrix last)
      : Error(what), last_iterate(std::move(last)) {}
  CMatrix last_iterate;
};

/// The null-space projection removed the whole useful direction.
class DegenerateCombiner : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared by several modules.

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// One CN(0, variance) draw.
inline Complex complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline CMatrix complex_normal_matrix(Rng& rng, Eigen::Index rows,
                                     Eigen::Index cols, double variance = 1.0) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng, variance);
  return m;
}

/// Rotates v so that its first non-negligible entry is real and positive.
/// Used to pin the phase ambiguity of singular/eigen vectors.
inline void canonicalize_phase(Eigen::Ref<CVector> v) {
  const double scale = v.norm();
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

}  // namespace fdisac
