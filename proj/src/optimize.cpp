#include "fdisac/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fdisac {

void ArrayLayout::validate() const {
  if (n_b_rf < 1 || n_b_a < 1 || m_b_rf < 1 || m_b_a < 1 || n_u < 1 || m_u < 1)
    throw InvalidArgument("array layout: every dimension must be >= 1");
  if (!(spacing_over_lambda > 0.0)) throw InvalidArgument("array layout: spacing must be > 0");
}

EstimatedChannels build_estimated_channels(const ArrayLayout& layout,
                                           const std::vector<double>& interferer_doas,
                                           const std::vector<double>& dl_doas, double ul_doa,
                                           const CMatrix& h_bb_hat) {
  layout.validate();
  const double d = layout.spacing_over_lambda;
  const int m_b = layout.m_b();
  const int n_b = layout.n_b();
  if (h_bb_hat.rows() != m_b || h_bb_hat.cols() != n_b)
    throw InvalidArgument("estimated SI channel must be M_b x N_b");

  auto outer = [&](int rows, int cols, double theta) -> CMatrix {
    return ula_response(rows, theta, d) * ula_response(cols, theta, d).adjoint();
  };

  EstimatedChannels est;
  est.h_rad_int = CMatrix::Zero(m_b, n_b);
  for (double theta : interferer_doas) est.h_rad_int += outer(m_b, n_b, theta);
  est.h_rad = est.h_rad_int + outer(m_b, n_b, ul_doa);
  est.h_dl = CMatrix::Zero(layout.m_u, n_b);
  for (double theta : dl_doas) est.h_dl += outer(layout.m_u, n_b, theta);
  est.h_ul = outer(m_b, layout.n_u, ul_doa);
  est.h_bb = h_bb_hat;
  return est;
}

// ---------------------------------------------------------------------------

AnalogBeamformer select_tx_analog(const CMatrix& h_rad_hat, const Codebook& cb, int n_rf) {
  const int n_a = cb.n_elems;
  if (n_rf < 1 || h_rad_hat.cols() != static_cast<Eigen::Index>(n_rf) * n_a)
    throw InvalidArgument("TX analog search: H_rad columns must equal n_rf * subarray size");
  std::vector<int> picks(n_rf, 0);
  for (int i = 0; i < n_rf; ++i) {
    const auto block = h_rad_hat.middleCols(static_cast<Eigen::Index>(i) * n_a, n_a);
    double best = -1.0;
    for (std::size_t c = 0; c < cb.size(); ++c) {
      const double score = (block * cb[c]).squaredNorm();
      if (score > best) {
        best = score;
        picks[i] = static_cast<int>(c);
      }
    }
  }
  return AnalogBeamformer::from_codebook(cb, picks);
}

AnalogBeamformer select_rx_analog(const CMatrix& h_rad_hat, const CMatrix& h_bb_hat,
                                  const AnalogBeamformer& v_rf, const Codebook& cb) {
  constexpr double kReg = 1e-12;
  const int m_a = cb.n_elems;
  if (h_rad_hat.rows() % m_a != 0 || h_rad_hat.rows() == 0)
    throw InvalidArgument("RX analog search: H_rad rows must be a multiple of the subarray size");
  if (h_bb_hat.rows() != h_rad_hat.rows() || h_bb_hat.cols() != h_rad_hat.cols() ||
      h_rad_hat.cols() != v_rf.n_antennas())
    throw InvalidArgument("RX analog search: shape mismatch");
  const auto m_rf = static_cast<int>(h_rad_hat.rows() / m_a);
  const CMatrix rad_eff = h_rad_hat * v_rf.matrix();
  const CMatrix si_eff = h_bb_hat * v_rf.matrix();
  std::vector<int> picks(m_rf, 0);
  for (int j = 0; j < m_rf; ++j) {
    const auto rad = rad_eff.middleRows(static_cast<Eigen::Index>(j) * m_a, m_a);
    const auto si = si_eff.middleRows(static_cast<Eigen::Index>(j) * m_a, m_a);
    double best = -1.0;
    for (std::size_t c = 0; c < cb.size(); ++c) {
      const double num = (cb[c].adjoint() * rad).squaredNorm();
      const double den = (cb[c].adjoint() * si).squaredNorm();
      const double ratio = num / (den + kReg);
      if (ratio > best) {
        best = ratio;
        picks[j] = static_cast<int>(c);
      }
    }
  }
  return AnalogBeamformer::from_codebook(cb, picks);
}

// ---------------------------------------------------------------------------

double precoder_objective(const CMatrix& h, const CMatrix& v, const CMatrix& g, double ridge) {
  return (h * v - g).squaredNorm() + ridge * v.squaredNorm();
}

LagrangianPrecoder lagrangian_tx_precoder(const CMatrix& h_dl_eff, const CVector& t1,
                                          double lambda_b_watts, const CMatrix& g_target,
                                          double ridge) {
  const Eigen::Index n = h_dl_eff.cols();
  if (t1.size() != n || g_target.rows() != h_dl_eff.rows())
    throw InvalidArgument("closed-form precoder: shape mismatch");
  if (!(lambda_b_watts > 0.0)) throw InvalidArgument("SI threshold lambda_b must be positive");
  if (ridge < 0.0) throw InvalidArgument("ridge must be non-negative");

  CMatrix a = h_dl_eff.adjoint() * h_dl_eff;
  a.diagonal().array() += ridge;
  const CMatrix b = h_dl_eff.adjoint() * g_target;

  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-15)
    throw NumericalFailure("H^H H is singular; pass a positive ridge");

  LagrangianPrecoder out;
  const CMatrix v0 = llt.solve(b);
  out.unconstrained_leakage = (v0.adjoint() * t1).norm();
  if (t1.squaredNorm() == 0.0 || std::isinf(lambda_b_watts)) {
    out.precoder.matrix = v0;
    return out;
  }
  const double s = std::real(t1.dot(llt.solve(t1)));
  out.zeta = std::max(out.unconstrained_leakage / std::sqrt(lambda_b_watts) - 1.0, 0.0) / s;
  if (out.zeta == 0.0) {
    out.precoder.matrix = v0;
    return out;
  }
  CMatrix constrained = a + out.zeta * t1 * t1.adjoint();
  out.precoder.matrix = constrained.llt().solve(b);
  return out;
}

namespace {

// Real embedding of a Hermitian form: z^H M z = x^T R(M) x, x = [Re z; Im z].
RMatrix realify(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  RMatrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = m.real();
  r.topRightCorner(n, n) = -m.imag();
  r.bottomLeftCorner(n, n) = m.imag();
  r.bottomRightCorner(n, n) = m.real();
  return r;
}

RMatrix block_diag_realified(const CMatrix& block, Eigen::Index copies) {
  const Eigen::Index n = block.rows();
  CMatrix full = CMatrix::Zero(n * copies, n * copies);
  for (Eigen::Index c = 0; c < copies; ++c) full.block(c * n, c * n, n, n) = block;
  return realify(full);
}

RVector to_real(const CMatrix& v) {
  const Eigen::Index n = v.size();
  RVector x(2 * n);
  const CVector flat = Eigen::Map<const CVector>(v.data(), n);
  x.head(n) = flat.real();
  x.tail(n) = flat.imag();
  return x;
}

CMatrix from_real(const RVector& x, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  CMatrix v(rows, cols);
  for (Eigen::Index i = 0; i < n; ++i) v.data()[i] = Complex(x(i), x(n + i));
  return v;
}

}  // namespace

NumericPrecoder numeric_tx_precoder(const CMatrix& h_dl_eff, const CMatrix& leak_rows,
                                    double lambda_b_watts, const CMatrix& g_target,
                                    const NumericOptions& opts) {
  const Eigen::Index n = h_dl_eff.cols();
  const Eigen::Index st = g_target.cols();
  if (g_target.rows() != h_dl_eff.rows() || leak_rows.cols() != n)
    throw InvalidArgument("numeric precoder: shape mismatch");
  if (!(lambda_b_watts > 0.0)) throw InvalidArgument("SI threshold lambda_b must be positive");
  if (opts.ridge < 0.0 || !(opts.tol > 0.0) || opts.max_iter < 1)
    throw InvalidArgument("numeric precoder: bad options");

  NumericPrecoder out;
  out.multipliers = RVector::Zero(leak_rows.rows());

  CMatrix a = h_dl_eff.adjoint() * h_dl_eff;
  a.diagonal().array() += opts.ridge;
  const CMatrix b = h_dl_eff.adjoint() * g_target;
  const double g_energy = g_target.squaredNorm();

  if (g_energy == 0.0) {
    out.precoder.matrix = CMatrix::Zero(n, st);
    return out;
  }

  std::vector<Eigen::Index> active;
  if (!std::isinf(lambda_b_watts))
    for (Eigen::Index r = 0; r < leak_rows.rows(); ++r)
      if (leak_rows.row(r).squaredNorm() > 0.0) active.push_back(r);

  // The problem is convex, so a feasible unconstrained minimizer is optimal.
  const CMatrix v_free = a.completeOrthogonalDecomposition().solve(b);
  bool free_feasible = true;
  for (Eigen::Index r : active)
    free_feasible = free_feasible && (leak_rows.row(r) * v_free).squaredNorm() <= lambda_b_watts;
  if (free_feasible) {
    out.precoder.matrix = v_free;
    out.objective = precoder_objective(h_dl_eff, v_free, g_target, opts.ridge);
    return out;
  }

  // f(x) = x^T P x - 2 c^T x + |G|^2 ; constraint r: x^T Q_r x <= lambda.
  const RMatrix p = block_diag_realified(a, st);
  const RVector c = to_real(b);
  std::vector<RMatrix> q;
  q.reserve(active.size());
  for (Eigen::Index r : active) {
    const CVector t = leak_rows.row(r).adjoint();
    q.push_back(block_diag_realified(t * t.adjoint(), st));
  }
  const double lambda = lambda_b_watts;
  const auto m = static_cast<double>(active.size());
  const Eigen::Index dim = p.rows();

  auto slack = [&](const RVector& x, std::vector<double>& s) {
    s.resize(q.size());
    for (std::size_t r = 0; r < q.size(); ++r) {
      s[r] = lambda - x.dot(q[r] * x);
      if (!(s[r] > 0.0)) return false;
    }
    return true;
  };
  auto objective = [&](const RVector& x) { return x.dot(p * x) - 2.0 * c.dot(x) + g_energy; };
  auto barrier_value = [&](const RVector& x, double tau, const std::vector<double>& s) {
    double v = tau * objective(x);
    for (double sr : s) v -= std::log(sr);
    return v;
  };

  RVector x = RVector::Zero(dim);
  std::vector<double> s;
  slack(x, s);
  double tau = m / g_energy;
  const double gap_target = opts.tol * g_energy;
  int steps = 0;

  while (true) {
    // Newton centering for fixed tau.
    for (;;) {
      RVector grad = tau * (2.0 * (p * x) - 2.0 * c);
      RMatrix hess = 2.0 * tau * p;
      for (std::size_t r = 0; r < q.size(); ++r) {
        const RVector qx = q[r] * x;
        grad += 2.0 * qx / s[r];
        hess += 2.0 * q[r] / s[r];
        hess.noalias() += 4.0 * qx * qx.transpose() / (s[r] * s[r]);
      }
      hess.diagonal().array() += 1e-14 * hess.trace() / static_cast<double>(dim);
      const RVector step = hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement)) throw NumericalFailure("numeric precoder: Newton step failed");
      if (decrement / 2.0 <= 1e-10) break;

      if (++steps > opts.max_iter)
        throw InfeasibleResult("numeric precoder: Newton budget exhausted before reaching tolerance",
                               from_real(x, n, st));

      const double current = barrier_value(x, tau, s);
      double t = 1.0;
      std::vector<double> s_new;
      RVector x_new;
      for (int ls = 0; ls < 80; ++ls, t *= 0.5) {
        x_new = x + t * step;
        if (!slack(x_new, s_new)) continue;
        if (barrier_value(x_new, tau, s_new) <= current - 0.25 * t * decrement) break;
      }
      if (!slack(x_new, s_new)) break;  // no feasible progress left at this precision
      if (barrier_value(x_new, tau, s_new) >= current) break;
      x = std::move(x_new);
      s = std::move(s_new);
    }
    if (m / tau <= gap_target) break;
    tau *= 10.0;
  }

  RVector mu(static_cast<Eigen::Index>(q.size()));
  for (std::size_t r = 0; r < q.size(); ++r) mu(r) = 1.0 / (tau * s[r]);

  // Polish: Newton on the KKT equations of the constraints the barrier left
  // tight, (P + sum mu_r Q_r) x = c and x^T Q_r x = lambda. Late centering
  // steps stall once tau f swamps the barrier terms, so this recovers
  // machine-precision multipliers. Kept only if feasible, dual feasible and
  // no worse than the barrier point.
  std::vector<std::size_t> tight;
  for (std::size_t r = 0; r < q.size(); ++r)
    if (s[r] < 1e-3 * lambda) tight.push_back(r);
  if (!tight.empty()) {
    const auto k = static_cast<Eigen::Index>(tight.size());
    RVector xp = x;
    RVector mp(k);
    for (Eigen::Index i = 0; i < k; ++i) mp(i) = mu(static_cast<Eigen::Index>(tight[i]));
    for (int it = 0; it < 30; ++it) {
      RMatrix lhs = p;
      for (Eigen::Index i = 0; i < k; ++i) lhs += mp(i) * q[tight[i]];
      RMatrix jac = RMatrix::Zero(dim + k, dim + k);
      RVector rhs(dim + k);
      jac.topLeftCorner(dim, dim) = lhs;
      rhs.head(dim) = c - lhs * xp;
      for (Eigen::Index i = 0; i < k; ++i) {
        const RVector qx = q[tight[i]] * xp;
        jac.block(0, dim + i, dim, 1) = qx;
        jac.block(dim + i, 0, 1, dim) = 2.0 * qx.transpose();
        rhs(dim + i) = lambda - xp.dot(qx);
      }
      const RVector delta = jac.fullPivLu().solve(rhs);
      if (!delta.allFinite()) break;
      xp += delta.head(dim);
      mp += delta.tail(k);
      if (delta.head(dim).norm() <= 1e-15 * std::max(1.0, xp.norm())) break;
    }
    bool ok = xp.allFinite() && mp.allFinite() && (mp.array() >= 0.0).all();
    for (std::size_t r = 0; ok && r < q.size(); ++r)
      ok = xp.dot(q[r] * xp) <= lambda * (1.0 + 1e-12);
    if (ok && objective(xp) <= objective(x) + 1e-12 * g_energy) {
      x = xp;
      mu.setZero();
      for (Eigen::Index i = 0; i < k; ++i) mu(static_cast<Eigen::Index>(tight[i])) = mp(i);
    }
  }

  out.precoder.matrix = from_real(x, n, st);
  out.objective = precoder_objective(h_dl_eff, out.precoder.matrix, g_target, opts.ridge);
  out.newton_steps = steps;
  for (std::size_t r = 0; r < active.size(); ++r)
    out.multipliers(active[r]) = mu(static_cast<Eigen::Index>(r));
  return out;
}

DigitalPrecoder power_normalize(const AnalogBeamformer& v_rf, const DigitalPrecoder& v_bb,
                                double column_budget_watts) {
  if (v_bb.matrix.rows() != v_rf.n_rf())
    throw InvalidArgument("power_normalize: V_bb rows must equal the number of RF chains");
  if (!(column_budget_watts >= 0.0)) throw InvalidArgument("power budget must be >= 0");
  DigitalPrecoder out = v_bb;
  const CMatrix full = v_rf.matrix() * v_bb.matrix;
  for (Eigen::Index col = 0; col < full.cols(); ++col) {
    const double power = full.col(col).squaredNorm();
    if (power > column_budget_watts) out.matrix.col(col) *= std::sqrt(column_budget_watts / power);
  }
  return out;
}

// ---------------------------------------------------------------------------

CMatrix top_left_singular_vectors(const CMatrix& h, int n) {
  if (n < 1 || n > h.rows()) throw InvalidArgument("requested more singular vectors than rows");
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullU);
  CMatrix u = svd.matrixU().leftCols(n);
  for (int i = 0; i < n; ++i) canonicalize_phase(u.col(i));
  return u;
}

CMatrix top_right_singular_vectors(const CMatrix& h, int n) {
  if (n < 1 || n > h.cols()) throw InvalidArgument("requested more singular vectors than columns");
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeFullV);
  CMatrix v = svd.matrixV().leftCols(n);
  for (int i = 0; i < n; ++i) canonicalize_phase(v.col(i));
  return v;
}

CMatrix nsp_rx_combiner(const CMatrix& h_ul_eff, const CMatrix& h_rad_int_eff, int n_streams) {
  if (h_rad_int_eff.rows() != h_ul_eff.rows())
    throw InvalidArgument("NSP combiner: channels must share the RF-chain dimension");
  const CMatrix x = top_left_singular_vectors(h_ul_eff, n_streams);

  CMatrix w = x;
  if (h_rad_int_eff.size() > 0) {
    // Column space of the interference channel = range of A^H, A = h_rad_int_eff^H.
    Eigen::JacobiSVD<CMatrix> svd(h_rad_int_eff, Eigen::ComputeFullU);
    const RVector& sv = svd.singularValues();
    const double tol = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol && sv(rank) > 0.0) ++rank;
    if (rank > 0) {
      const CMatrix basis = svd.matrixU().leftCols(rank);
      w = x - basis * (basis.adjoint() * x);
      // Second pass removes what rounding left in the interference span.
      w -= basis * (basis.adjoint() * w);
    }
  }
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double norm = w.col(c).norm();
    if (norm <= 1e-10 * x.col(c).norm())
      throw DegenerateCombiner("NSP combiner: UL direction lies inside the radar interference span");
    w.col(c) /= norm;
  }
  return w;
}

CMatrix mss_rx_combiner(const CMatrix& h_ul_eff, int n_streams) {
  return top_left_singular_vectors(h_ul_eff, n_streams);
}

UserBeamformers user_beamformers(const CMatrix& h_dl_hat, const CMatrix& h_ul_hat, int st,
                                 double p_u_watts) {
  if (!(p_u_watts >= 0.0)) throw InvalidArgument("UL power must be >= 0");
  UserBeamformers out;
  out.w_u = top_left_singular_vectors(h_dl_hat, st);
  out.v_u_bb = top_right_singular_vectors(h_ul_hat, 1).col(0) * std::sqrt(p_u_watts);
  return out;
}

CMatrix precoder_target(const CMatrix& h_dl_eff, int st, double per_stream_power) {
  return h_dl_eff * top_right_singular_vectors(h_dl_eff, st) * std::sqrt(per_stream_power);
}

// ---------------------------------------------------------------------------

namespace {

template <typename F>
auto at_step(int step, const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = "algorithm step " + std::to_string(step) + " (" + name + "): ";
  try {
    return f();
  } catch (const InfeasibleResult& e) {
    throw InfeasibleResult(prefix + e.what(), e.last_iterate);
  } catch (const DegenerateCombiner& e) {
    throw DegenerateCombiner(prefix + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(prefix + e.what());
  } catch (const ConstraintViolation& e) {
    throw ConstraintViolation(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  }
}

}  // namespace

HybridBeamformers run_algorithm1(const EstimatedChannels& est, const AlgorithmConfig& cfg) {
  const ArrayLayout& lay = cfg.layout;
  lay.validate();
  const int st = lay.streams();
  const Codebook cb_tx = dft_codebook(lay.n_b_a, cfg.codebook_bits, lay.spacing_over_lambda);
  const Codebook cb_rx = dft_codebook(lay.m_b_a, cfg.codebook_bits, lay.spacing_over_lambda);

  HybridBeamformers bf;
  const UserBeamformers users =
      at_step(1, "user combiner", [&] { return user_beamformers(est.h_dl, est.h_ul, st, cfg.p_u_watts); });
  bf.w_u = users.w_u;

  bf.v_b_rf = at_step(2, "TX analog", [&] { return select_tx_analog(est.h_rad, cb_tx, lay.n_b_rf); });
  bf.w_b_rf = at_step(3, "RX analog",
                      [&] { return select_rx_analog(est.h_rad, est.h_bb, bf.v_b_rf, cb_rx); });

  const CMatrix h_tilde_hat = bf.w_b_rf.matrix().adjoint() * est.h_bb * bf.v_b_rf.matrix();
  const CMatrix h_dl_eff = est.h_dl * bf.v_b_rf.matrix();

  bf.cancellers = at_step(5, "cancellers", [&] { return build_cancellers(h_tilde_hat, cfg.n_taps); });

  const double per_stream = cfg.p_b_watts / st;
  const CMatrix g = precoder_target(h_dl_eff, st, per_stream);
  const CMatrix leak_rows = h_tilde_hat + bf.cancellers.analog;
  const double trace = std::real((h_dl_eff.adjoint() * h_dl_eff).trace());
  const double ridge = cfg.ridge_rel * (trace > 0.0 ? trace / lay.n_b_rf : 1.0);

  DigitalPrecoder v_bb;
  if (lay.m_b_rf == 1) {
    bf.closed_form = true;
    const auto sol = at_step(7, "closed-form precoder", [&] {
      return lagrangian_tx_precoder(h_dl_eff, leak_rows.row(0).adjoint(), cfg.lambda_b_watts, g,
                                    ridge);
    });
    v_bb = sol.precoder;
    bf.multipliers = {sol.zeta};
  } else {
    NumericOptions opts = cfg.numeric;
    opts.ridge = ridge;
    const auto sol = at_step(10, "numeric precoder", [&] {
      return numeric_tx_precoder(h_dl_eff, leak_rows, cfg.lambda_b_watts, g, opts);
    });
    v_bb = sol.precoder;
    bf.multipliers.assign(sol.multipliers.data(), sol.multipliers.data() + sol.multipliers.size());
  }
  bf.v_b_bb = power_normalize(bf.v_b_rf, v_bb, per_stream);

  bf.v_u_bb = users.v_u_bb;

  const CMatrix wh = bf.w_b_rf.matrix().adjoint();
  bf.w_b_bb = at_step(13, "NSP combiner",
                      [&] { return nsp_rx_combiner(wh * est.h_ul, wh * est.h_rad_int, 1); });
  return bf;
}

}  // namespace fdisac
