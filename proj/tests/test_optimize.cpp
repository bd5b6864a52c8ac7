#include "test_support.hpp"

#include <functional>

#include "fdisac/channel.hpp"
#include "fdisac/optimize.hpp"

using namespace fdisac;

namespace {

struct Instance {
  CMatrix h;
  CMatrix g;
  CMatrix leak;  // rows t_r^H
};

Instance random_instance(Rng& rng, int m_u, int n_rf, int st, int n_constraints) {
  Instance in;
  in.h = complex_normal_matrix(rng, m_u, n_rf);
  in.g = precoder_target(in.h, st, 1.0 / st);
  in.leak = complex_normal_matrix(rng, n_constraints, n_rf, 1e-3);
  return in;
}

double leakage(const CMatrix& v, const CVector& t) { return (v.adjoint() * t).squaredNorm(); }

// Projection onto {V : |V^H t|^2 <= lambda}.
CMatrix project_cylinder(const CMatrix& v, const CVector& t, double lambda) {
  const CVector vt = v.adjoint() * t;
  const double n = vt.norm();
  if (n * n <= lambda) return v;
  return v - t * (vt.adjoint() * (1.0 - std::sqrt(lambda) / n)) / t.squaredNorm();
}

// Dykstra's alternating projection onto the intersection of the cylinders.
CMatrix project_intersection(const CMatrix& v, const CMatrix& leak, double lambda) {
  const Eigen::Index k = leak.rows();
  std::vector<CMatrix> inc(k, CMatrix::Zero(v.rows(), v.cols()));
  CMatrix x = v;
  for (int it = 0; it < 400; ++it) {
    for (Eigen::Index r = 0; r < k; ++r) {
      const CMatrix y = project_cylinder(x + inc[r], leak.row(r).adjoint(), lambda);
      inc[r] = x + inc[r] - y;
      x = y;
    }
  }
  return x;
}

// Accelerated projected gradient on |HV - G|^2 + ridge |V|^2.
CMatrix projected_gradient(const Instance& in, double lambda, double ridge, int iters) {
  CMatrix a = in.h.adjoint() * in.h;
  a.diagonal().array() += ridge;
  const CMatrix b = in.h.adjoint() * in.g;
  const double l = 2.0 * Eigen::SelfAdjointEigenSolver<CMatrix>(a).eigenvalues().maxCoeff();
  CMatrix x = CMatrix::Zero(in.h.cols(), in.g.cols());
  CMatrix y = x;
  double t = 1.0;
  for (int i = 0; i < iters; ++i) {
    const CMatrix grad = 2.0 * (a * y - b);
    const CMatrix x_next = project_intersection(y - grad / l, in.leak, lambda);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    y = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = x_next;
    t = t_next;
  }
  return x;
}

// zeta such that the leakage of (A + zeta t t^H)^{-1} b equals lambda.
double bisect_zeta(const CMatrix& a, const CMatrix& b, const CVector& t, double lambda) {
  auto leak_at = [&](double z) {
    const CMatrix m = a + z * t * t.adjoint();
    return leakage(m.ldlt().solve(b), t);
  };
  if (leak_at(0.0) <= lambda) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (leak_at(hi) > lambda) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (leak_at(mid) > lambda ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ArrayLayout small_layout() {
  ArrayLayout lay;
  lay.n_b_rf = 4;
  lay.n_b_a = 4;
  lay.m_b_rf = 4;
  lay.m_b_a = 4;
  lay.n_u = 2;
  lay.m_u = 3;
  return lay;
}

}  // namespace

TEST_CASE("estimated channel models") {
  const ArrayLayout lay = small_layout();
  const CMatrix h_bb = CMatrix::Ones(16, 16);
  const EstimatedChannels est = build_estimated_channels(lay, {-30.0, 20.0}, {-30.0}, 10.0, h_bb);
  CHECK(est.h_rad.rows() == 16);
  CHECK(fdisac::testing::rank_of(est.h_rad_int) == 2);
  CHECK(fdisac::testing::rank_of(est.h_rad) == 3);
  CHECK((est.h_rad - est.h_rad_int - ula_response(16, 10.0) * ula_response(16, 10.0).adjoint()).norm() <
        1e-12);
  CHECK(est.h_dl.rows() == 3);
  CHECK(est.h_ul.cols() == 2);
  CHECK_THROWS_AS(build_estimated_channels(lay, {}, {}, 0.0, CMatrix::Ones(4, 4)), InvalidArgument);
}

TEST_CASE("TX analog search equals the brute-force joint optimum") {
  Rng rng(1);
  const Codebook cb = dft_codebook(3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix h = complex_normal_matrix(rng, 5, 6);
    const AnalogBeamformer pick = select_tx_analog(h, cb, 2);
    double best = -1.0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        best = std::max(best, (h * AnalogBeamformer::from_codebook(cb, {i, j}).matrix()).squaredNorm());
    CHECK((h * pick.matrix()).squaredNorm() == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("TX analog search points at a single target") {
  const CMatrix h = ula_response(8, 0.0) * ula_response(8, 30.0).adjoint();
  const Codebook cb = dft_codebook(4, 2);
  const AnalogBeamformer pick = select_tx_analog(h, cb, 2);
  CHECK(pick.codebook_indices() == std::vector<int>{3, 3});
}

TEST_CASE("finer codebooks never lower the TX analog gain") {
  Rng rng(2);
  const CMatrix h = complex_normal_matrix(rng, 6, 12);
  double prev = 0.0;
  for (int bits = 1; bits <= 7; ++bits) {
    const double gain = (h * select_tx_analog(h, dft_codebook(4, bits), 3).matrix()).squaredNorm();
    CHECK(gain >= prev * (1.0 - 1e-12));
    prev = gain;
  }
}

TEST_CASE("RX analog search maximizes each chain's ratio") {
  Rng rng(3);
  const Codebook cb = dft_codebook(3, 3);
  const Codebook cb_tx = dft_codebook(2, 2);
  const AnalogBeamformer v = AnalogBeamformer::from_codebook(cb_tx, {1, 2});
  const CMatrix h_rad = complex_normal_matrix(rng, 6, 4);
  const CMatrix h_bb = complex_normal_matrix(rng, 6, 4, 1e-2);
  const AnalogBeamformer w = select_rx_analog(h_rad, h_bb, v, cb);
  for (int j = 0; j < 2; ++j) {
    auto ratio = [&](int c) {
      const CMatrix rad = h_rad.middleRows(3 * j, 3) * v.matrix();
      const CMatrix si = h_bb.middleRows(3 * j, 3) * v.matrix();
      return (cb[c].adjoint() * rad).squaredNorm() / ((cb[c].adjoint() * si).squaredNorm() + 1e-12);
    };
    double best = -1.0;
    for (int c = 0; c < 8; ++c) best = std::max(best, ratio(c));
    CHECK(ratio(w.codebook_indices()[j]) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("closed-form precoder") {
  Rng rng(4);
  const double ridge = 1e-10;

  SUBCASE("inactive constraint returns the least-squares solution") {
    const Instance in = random_instance(rng, 4, 3, 3, 1);
    const CVector t = in.leak.row(0).adjoint();
    const auto sol = lagrangian_tx_precoder(in.h, t, 1e3, in.g, ridge);
    CHECK(sol.zeta == 0.0);
    CHECK(sol.unconstrained_leakage * sol.unconstrained_leakage <= 1e3);
    CHECK((in.h * sol.precoder.matrix - in.g).norm() < 1e-6);
  }
  SUBCASE("infinite threshold and zero constraint vector") {
    const Instance in = random_instance(rng, 4, 3, 3, 1);
    CHECK(lagrangian_tx_precoder(in.h, in.leak.row(0).adjoint(), std::numeric_limits<double>::infinity(),
                                 in.g, ridge).zeta == 0.0);
    CHECK(lagrangian_tx_precoder(in.h, CVector::Zero(3), 1e-9, in.g, ridge).zeta == 0.0);
  }
  SUBCASE("matches a bisection on the multiplier") {
    for (int trial = 0; trial < 20; ++trial) {
      const Instance in = random_instance(rng, 4, 3, 3, 1);
      const CVector t = in.leak.row(0).adjoint();
      CMatrix a = in.h.adjoint() * in.h;
      a.diagonal().array() += ridge;
      const CMatrix b = in.h.adjoint() * in.g;
      const double free_leak = leakage(a.ldlt().solve(b), t);
      const double lambda = free_leak * 0.05;
      const auto sol = lagrangian_tx_precoder(in.h, t, lambda, in.g, ridge);
      const double zeta = bisect_zeta(a, b, t, lambda);
      CHECK(sol.zeta == doctest::Approx(zeta).epsilon(1e-8));
      CHECK(leakage(sol.precoder.matrix, t) == doctest::Approx(lambda).epsilon(1e-8));
      // Stationarity of the Lagrangian.
      const CMatrix resid = a * sol.precoder.matrix - b + sol.zeta * t * (t.adjoint() * sol.precoder.matrix);
      CHECK(resid.norm() < 1e-9 * b.norm());
    }
  }
  SUBCASE("matches accelerated projected gradient") {
    for (int trial = 0; trial < 5; ++trial) {
      const Instance in = random_instance(rng, 4, 3, 3, 1);
      const CVector t = in.leak.row(0).adjoint();
      const double lambda = 1e-5;
      const auto sol = lagrangian_tx_precoder(in.h, t, lambda, in.g, ridge);
      const CMatrix pg = projected_gradient(in, lambda, ridge, 3000);
      const double f_cf = precoder_objective(in.h, sol.precoder.matrix, in.g, ridge);
      const double f_pg = precoder_objective(in.h, pg, in.g, ridge);
      CHECK(f_cf <= f_pg + 1e-8 * in.g.squaredNorm());
      CHECK(leakage(sol.precoder.matrix, t) <= lambda * (1.0 + 1e-9));
    }
  }
  CHECK_THROWS_AS(lagrangian_tx_precoder(CMatrix::Ones(2, 3), CVector::Ones(3), 1.0, CMatrix::Ones(2, 1), 0.0),
                  NumericalFailure);
  CHECK_THROWS_AS(lagrangian_tx_precoder(CMatrix::Ones(2, 3), CVector::Ones(2), 1.0, CMatrix::Ones(2, 1), 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(lagrangian_tx_precoder(CMatrix::Ones(2, 3), CVector::Ones(3), 0.0, CMatrix::Ones(2, 1), 1.0),
                  InvalidArgument);
}

TEST_CASE("numeric precoder agrees with the closed form for one constraint") {
  Rng rng(5);
  const double ridge = 1e-10;
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng, 4, 3, 3, 1);
    const CVector t = in.leak.row(0).adjoint();
    const double lambda = 1e-6 * (1 + trial);
    const auto cf = lagrangian_tx_precoder(in.h, t, lambda, in.g, ridge);
    NumericOptions opts;
    opts.ridge = ridge;
    const auto num = numeric_tx_precoder(in.h, in.leak, lambda, in.g, opts);
    const double f_cf = precoder_objective(in.h, cf.precoder.matrix, in.g, ridge);
    CHECK(std::abs(num.objective - f_cf) <= 1e-6 * std::max(1.0, f_cf));
    CHECK(leakage(num.precoder.matrix, t) <= lambda * (1.0 + 1e-9));
    if (cf.zeta > 0.0) CHECK(num.multipliers(0) == doctest::Approx(cf.zeta).epsilon(1e-3));
  }
}

TEST_CASE("numeric precoder with several constraints") {
  Rng rng(6);
  const double ridge = 1e-10;
  for (int trial = 0; trial < 4; ++trial) {
    const Instance in = random_instance(rng, 4, 4, 3, 3);
    const double lambda = 2e-6;
    NumericOptions opts;
    opts.ridge = ridge;
    const auto num = numeric_tx_precoder(in.h, in.leak, lambda, in.g, opts);
    CMatrix a = in.h.adjoint() * in.h;
    a.diagonal().array() += ridge;
    const CMatrix b = in.h.adjoint() * in.g;

    CMatrix kkt = a * num.precoder.matrix - b;
    for (Eigen::Index r = 0; r < in.leak.rows(); ++r) {
      const CVector t = in.leak.row(r).adjoint();
      const double l = leakage(num.precoder.matrix, t);
      CHECK(l <= lambda * (1.0 + 1e-9));
      CHECK(num.multipliers(r) >= 0.0);
      CHECK(num.multipliers(r) * (lambda - l) <= 1e-9 * in.g.squaredNorm());
      kkt += num.multipliers(r) * t * (t.adjoint() * num.precoder.matrix);
    }
    CHECK(kkt.norm() <= 1e-4 * b.norm());

    const CMatrix pg = projected_gradient(in, lambda, ridge, 1500);
    const double f_pg = precoder_objective(in.h, pg, in.g, ridge);
    CHECK(num.objective <= f_pg + 1e-6 * in.g.squaredNorm());
    CHECK(num.objective >= f_pg - 1e-4 * in.g.squaredNorm());
  }
}

TEST_CASE("numeric precoder edge cases") {
  Rng rng(7);
  const Instance in = random_instance(rng, 4, 3, 2, 2);
  SUBCASE("zero target gives zero precoder") {
    const auto sol = numeric_tx_precoder(in.h, in.leak, 1e-6, CMatrix::Zero(4, 2));
    CHECK(sol.precoder.matrix.norm() == 0.0);
  }
  SUBCASE("slack constraints return the least-squares solution") {
    const auto sol = numeric_tx_precoder(in.h, in.leak, 1e6, in.g);
    CHECK((in.h * sol.precoder.matrix - in.g).norm() < 1e-9);
    CHECK(sol.multipliers.norm() == 0.0);
  }
  SUBCASE("budget exhaustion carries the last iterate") {
    NumericOptions opts;
    opts.max_iter = 1;
    try {
      numeric_tx_precoder(in.h, in.leak, 1e-9, in.g, opts);
      FAIL("expected InfeasibleResult");
    } catch (const InfeasibleResult& e) {
      CHECK(e.last_iterate.rows() == 3);
      CHECK(e.last_iterate.cols() == 2);
    }
  }
  CHECK_THROWS_AS(numeric_tx_precoder(in.h, in.leak, -1.0, in.g), InvalidArgument);
  CHECK_THROWS_AS(numeric_tx_precoder(in.h, CMatrix::Ones(1, 5), 1.0, in.g), InvalidArgument);
}

TEST_CASE("power normalization") {
  const Codebook cb = dft_codebook(4, 3);
  const AnalogBeamformer v = AnalogBeamformer::from_codebook(cb, {0, 4});
  CMatrix bb(2, 2);
  bb << Complex(3, 0), Complex(0.1, 0), Complex(0, 4), Complex(0.1, 0);
  const DigitalPrecoder out = power_normalize(v, DigitalPrecoder{bb}, 1.0);
  const CMatrix full = v.matrix() * out.matrix;
  CHECK(full.col(0).squaredNorm() == doctest::Approx(1.0));
  CHECK((out.matrix.col(1) - bb.col(1)).norm() == 0.0);
  CHECK(std::arg(out.matrix(1, 0)) == doctest::Approx(std::arg(bb(1, 0))));
  CHECK_THROWS_AS(power_normalize(v, DigitalPrecoder{CMatrix::Ones(3, 1)}, 1.0), InvalidArgument);
}

TEST_CASE("singular vector helpers") {
  Rng rng(8);
  const CMatrix h = complex_normal_matrix(rng, 5, 3);
  const CMatrix u = top_left_singular_vectors(h, 2);
  const CMatrix v = top_right_singular_vectors(h, 2);
  CHECK((u.adjoint() * u - CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((v.adjoint() * v - CMatrix::Identity(2, 2)).norm() < 1e-12);
  const auto sv = Eigen::JacobiSVD<CMatrix>(h).singularValues();
  CHECK((h * v.col(0)).norm() == doctest::Approx(sv(0)));
  CHECK((u.col(1).adjoint() * h).norm() == doctest::Approx(sv(1)));
  CHECK(u(0, 0).imag() == 0.0);
  CHECK(u(0, 0).real() > 0.0);
  CHECK_THROWS_AS(top_left_singular_vectors(h, 6), InvalidArgument);
  CHECK_THROWS_AS(top_right_singular_vectors(h, 0), InvalidArgument);
}

TEST_CASE("NSP combiner nulls the interference span") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const CMatrix h_ul = complex_normal_matrix(rng, 8, 1);
    const CMatrix h_int = complex_normal_matrix(rng, 8, 3) * complex_normal_matrix(rng, 3, 6);
    const CMatrix w = nsp_rx_combiner(h_ul, h_int, 1);
    CHECK(w.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((h_int.adjoint() * w).norm() <= 1e-10 * h_int.norm());
  }
}

TEST_CASE("NSP combiner special cases") {
  Rng rng(10);
  const CMatrix h_ul = complex_normal_matrix(rng, 6, 2);
  SUBCASE("no interference reduces to MSS") {
    CHECK((nsp_rx_combiner(h_ul, CMatrix::Zero(6, 4), 1) - mss_rx_combiner(h_ul, 1)).norm() < 1e-12);
    CHECK((nsp_rx_combiner(h_ul, CMatrix(6, 0), 1) - mss_rx_combiner(h_ul, 1)).norm() < 1e-12);
  }
  SUBCASE("UL inside the interference span is degenerate") {
    const CMatrix h_int = h_ul * complex_normal_matrix(rng, 2, 5);
    CHECK_THROWS_AS(nsp_rx_combiner(h_ul, h_int, 1), DegenerateCombiner);
  }
  SUBCASE("full-rank interference is degenerate") {
    CHECK_THROWS_AS(nsp_rx_combiner(h_ul, complex_normal_matrix(rng, 6, 6), 1), DegenerateCombiner);
  }
  SUBCASE("oracle: projection of the MSS direction") {
    const CMatrix h_int = complex_normal_matrix(rng, 6, 2);
    const CVector x = mss_rx_combiner(h_ul, 1).col(0);
    const CMatrix q = h_int.householderQr().householderQ() * CMatrix::Identity(6, 2);
    CVector expected = x - q * (q.adjoint() * x);
    expected.normalize();
    CHECK((nsp_rx_combiner(h_ul, h_int, 1).col(0) - expected).norm() < 1e-10);
  }
  CHECK_THROWS_AS(nsp_rx_combiner(h_ul, CMatrix::Zero(5, 2), 1), InvalidArgument);
}

TEST_CASE("user beamformers") {
  Rng rng(11);
  const CMatrix h_dl = complex_normal_matrix(rng, 4, 16);
  const CMatrix h_ul = complex_normal_matrix(rng, 16, 3);
  const UserBeamformers ub = user_beamformers(h_dl, h_ul, 3, 0.25);
  CHECK(ub.v_u_bb.squaredNorm() == doctest::Approx(0.25));
  CHECK((ub.w_u.adjoint() * ub.w_u - CMatrix::Identity(3, 3)).norm() < 1e-12);
  const double best = Eigen::JacobiSVD<CMatrix>(h_ul).singularValues()(0);
  CHECK((h_ul * ub.v_u_bb).norm() == doctest::Approx(best * 0.5));
  CHECK_THROWS_AS(user_beamformers(h_dl, h_ul, 3, -1.0), InvalidArgument);
}

TEST_CASE("precoder target") {
  Rng rng(12);
  const CMatrix h = complex_normal_matrix(rng, 3, 5);
  const CMatrix g = precoder_target(h, 2, 0.5);
  const auto sv = Eigen::JacobiSVD<CMatrix>(h).singularValues();
  CHECK(g.squaredNorm() == doctest::Approx(0.5 * (sv(0) * sv(0) + sv(1) * sv(1))));
}

TEST_CASE("joint design with a single RX chain") {
  ArrayLayout lay;
  lay.n_b_rf = 5;
  lay.n_b_a = 4;
  lay.m_b_rf = 1;
  lay.m_b_a = 8;
  lay.n_u = 4;
  lay.m_u = 5;
  Rng rng(13);
  const CMatrix h_bb = gen_si_channel(lay.m_b(), lay.n_b(), 35.0, 20.0, rng);
  const EstimatedChannels est =
      build_estimated_channels(lay, {}, {-40.0, -25.0, -5.0, 15.0, 35.0}, 5.0, h_bb);
  AlgorithmConfig cfg;
  cfg.layout = lay;
  cfg.p_b_watts = 1.0;
  cfg.lambda_b_watts = 1e-7;
  cfg.n_taps = 0;
  const HybridBeamformers bf = run_algorithm1(est, cfg);
  CHECK(bf.closed_form);
  REQUIRE(bf.multipliers.size() == 1);
  CHECK(bf.multipliers[0] >= 0.0);
  CHECK(bf.v_b_bb.matrix.cols() == 5);
  CHECK(tx_power(bf.v_b_rf, bf.v_b_bb) <= cfg.p_b_watts * (1.0 + 1e-9));
  const CMatrix h_tilde = bf.w_b_rf.matrix().adjoint() * h_bb * bf.v_b_rf.matrix();
  const double leak = analog_residual_power_per_chain(h_tilde, bf.cancellers.analog, bf.v_b_bb)(0);
  CHECK(leak <= cfg.lambda_b_watts * (1.0 + 1e-6));
  CHECK(bf.w_b_bb.rows() == 1);
  CHECK(std::abs(bf.w_b_bb(0, 0)) == doctest::Approx(1.0));

  // One RX chain leaves no room to null any interfering echo.
  const EstimatedChannels crowded =
      build_estimated_channels(lay, {55.0}, {-40.0, -25.0, -5.0, 15.0, 35.0}, 5.0, h_bb);
  CHECK_THROWS_AS(run_algorithm1(crowded, cfg), DegenerateCombiner);
}

TEST_CASE("joint design with several RX chains") {
  const ArrayLayout lay = small_layout();
  Rng rng(14);
  const CMatrix h_bb = gen_si_channel(lay.m_b(), lay.n_b(), 35.0, 10.0, rng);
  const EstimatedChannels est = build_estimated_channels(lay, {-30.0, 40.0}, {-30.0}, 10.0, h_bb);
  AlgorithmConfig cfg;
  cfg.layout = lay;
  cfg.p_b_watts = 10.0;
  cfg.lambda_b_watts = 1e-6;
  const HybridBeamformers bf = run_algorithm1(est, cfg);
  CHECK_FALSE(bf.closed_form);
  CHECK(bf.multipliers.size() == 4);
  const double per_stream = cfg.p_b_watts / lay.streams();
  const CMatrix full = bf.v_b_rf.matrix() * bf.v_b_bb.matrix;
  for (Eigen::Index c = 0; c < full.cols(); ++c) CHECK(full.col(c).squaredNorm() <= per_stream * (1 + 1e-12));
  const CMatrix h_tilde = bf.w_b_rf.matrix().adjoint() * h_bb * bf.v_b_rf.matrix();
  const RVector leak = analog_residual_power_per_chain(h_tilde, bf.cancellers.analog, bf.v_b_bb);
  CHECK(leak.maxCoeff() <= cfg.lambda_b_watts * (1.0 + 1e-6));
  const CMatrix wh = bf.w_b_rf.matrix().adjoint();
  CHECK(((wh * est.h_rad_int).adjoint() * bf.w_b_bb).norm() <= 1e-10 * (wh * est.h_rad_int).norm());
  CHECK(bf.w_b_bb.norm() == doctest::Approx(1.0));
}

TEST_CASE("joint design without interfering targets") {
  const ArrayLayout lay = small_layout();
  const EstimatedChannels est =
      build_estimated_channels(lay, {}, {-20.0}, 15.0, CMatrix::Zero(lay.m_b(), lay.n_b()));
  AlgorithmConfig cfg;
  cfg.layout = lay;
  const HybridBeamformers bf = run_algorithm1(est, cfg);
  const CMatrix wh = bf.w_b_rf.matrix().adjoint();
  CHECK((bf.w_b_bb - mss_rx_combiner(wh * est.h_ul, 1)).norm() < 1e-12);
}

TEST_CASE("joint design reports the failing step") {
  const ArrayLayout lay = small_layout();
  const EstimatedChannels est =
      build_estimated_channels(lay, {10.0}, {-20.0}, 10.0, CMatrix::Zero(lay.m_b(), lay.n_b()));
  AlgorithmConfig cfg;
  cfg.layout = lay;
  try {
    run_algorithm1(est, cfg);
    FAIL("expected DegenerateCombiner");
  } catch (const DegenerateCombiner& e) {
    CHECK(std::string(e.what()).find("algorithm step 13") != std::string::npos);
  }
  cfg.n_taps = 3;
  CHECK_THROWS_WITH_AS(run_algorithm1(est, cfg), doctest::Contains("algorithm step 5"), InvalidArgument);
}
