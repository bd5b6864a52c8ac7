#include "test_support.hpp"

#include "fdisac/beamform.hpp"

using namespace fdisac;

TEST_CASE("two-chain assembly is block diagonal") {
  const double r = 1.0 / std::sqrt(2.0);
  CVector v1(2), v2(2);
  v1 << r, r;
  v2 << r, -r;
  const AnalogBeamformer bf = assemble_analog({v1, v2});
  CMatrix expected = CMatrix::Zero(4, 2);
  expected.block(0, 0, 2, 1) = v1;
  expected.block(2, 1, 2, 1) = v2;
  CHECK((bf.matrix() - expected).norm() == 0.0);
  CHECK(bf.n_rf() == 2);
  CHECK(bf.n_antennas() == 4);
}

TEST_CASE("single chain is the vector itself") {
  const Codebook cb = dft_codebook(8, 3);
  const AnalogBeamformer bf = assemble_analog({cb[5]});
  CHECK((bf.matrix().col(0) - cb[5]).norm() == 0.0);
}

TEST_CASE("assembly rejects bad inputs") {
  const double n = 4.0;
  CVector v = CVector::Constant(4, Complex(1.0 / std::sqrt(n), 0.0));
  CVector weak = v;
  weak(2) *= 0.9;
  CHECK_THROWS_AS(assemble_analog({v, weak}), ConstraintViolation);
  CHECK_THROWS_AS(assemble_analog({v, CVector::Constant(3, Complex(1.0 / std::sqrt(3.0), 0))}),
                  InvalidArgument);
  CHECK_THROWS_AS(assemble_analog({}), InvalidArgument);
}

TEST_CASE("assembly and extraction round-trip") {
  const Codebook cb = dft_codebook(6, 4);
  const AnalogBeamformer bf = AnalogBeamformer::from_codebook(cb, {3, 0, 15, 7});
  for (int i = 0; i < bf.n_rf(); ++i) {
    CHECK((bf.per_chain()[i] - cb[bf.codebook_indices()[i]]).norm() == 0.0);
    CHECK((bf.matrix().block(6 * i, i, 6, 1) - cb[bf.codebook_indices()[i]]).norm() == 0.0);
  }
  CHECK(bf.matrix().cwiseAbs().sum() == doctest::Approx(4 * 6 / std::sqrt(6.0)));
  CHECK_THROWS_AS(AnalogBeamformer::from_codebook(cb, {16}), InvalidArgument);
}

TEST_CASE("transmit signal chain") {
  Rng rng(4);
  const Codebook cb = dft_codebook(4, 3);
  const AnalogBeamformer v_rf = AnalogBeamformer::from_codebook(cb, {1, 6, 2});
  DigitalPrecoder v_bb{complex_normal_matrix(rng, 3, 2)};
  CHECK(tx_signal(v_rf, v_bb, CVector::Zero(2)).norm() == 0.0);

  const CVector s = complex_normal_matrix(rng, 2, 1).col(0);
  CVector brute = CVector::Zero(12);
  for (int a = 0; a < 12; ++a)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 2; ++k) brute(a) += v_rf.matrix()(a, c) * v_bb.matrix(c, k) * s(k);
  CHECK((tx_signal(v_rf, v_bb, s) - brute).norm() < 1e-13);

  DigitalPrecoder eye{CMatrix::Identity(3, 3)};
  const CVector s3 = complex_normal_matrix(rng, 3, 1).col(0);
  CHECK((tx_signal(v_rf, eye, s3) - v_rf.matrix() * s3).norm() < 1e-14);
  CHECK_THROWS_AS(tx_signal(v_rf, v_bb, s3), InvalidArgument);
}

TEST_CASE("transmit power") {
  Rng rng(8);
  const Codebook cb = dft_codebook(4, 3);
  const AnalogBeamformer v_rf = AnalogBeamformer::from_codebook(cb, {0, 3, 5});
  CHECK(tx_power(v_rf, DigitalPrecoder{CMatrix::Zero(3, 2)}) == 0.0);

  SUBCASE("orthonormal columns scaled to the budget") {
    const double p_b = 2.5;
    DigitalPrecoder v{CMatrix::Identity(3, 2) * std::sqrt(p_b / 2)};
    CHECK(tx_power(v_rf, v) == doctest::Approx(p_b));
  }
  SUBCASE("Monte Carlo average over unit-power symbols") {
    DigitalPrecoder v{complex_normal_matrix(rng, 3, 2)};
    double acc = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
      acc += tx_signal(v_rf, v, complex_normal_matrix(rng, 2, 1).col(0)).squaredNorm();
    CHECK(acc / draws == doctest::Approx(tx_power(v_rf, v)).epsilon(0.02));
  }
}

TEST_CASE("Frobenius gain separates over chains") {
  Rng rng(12);
  const Codebook cb = dft_codebook(5, 3);
  const AnalogBeamformer f = AnalogBeamformer::from_codebook(cb, {2, 7, 4, 0});
  const CMatrix h = complex_normal_matrix(rng, 6, 20);
  double per_chain = 0.0;
  for (int i = 0; i < 4; ++i) per_chain += (h.middleCols(5 * i, 5) * f.per_chain()[i]).squaredNorm();
  CHECK((h * f.matrix()).squaredNorm() == doctest::Approx(per_chain).epsilon(1e-12));
}
