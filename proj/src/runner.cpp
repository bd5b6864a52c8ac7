#include "fdisac/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace fdisac {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration

Waveform ScenarioConfig::waveform() const {
  return Waveform::from_symbol_duration(n_subcarriers, n_symbols, subcarrier_spacing_hz,
                                        symbol_duration_s, carrier_hz);
}

int ScenarioConfig::n_targets() const {
  return static_cast<int>(dl_scatterers.size() + passive_targets.size()) + 1;
}

void ScenarioConfig::validate() const {
  layout.validate();
  waveform().validate();
  if (dl_scatterers.empty()) throw InvalidArgument("config: at least one DL scatterer is required");
  if (n_targets() >= layout.m_b_rf)
    throw InvalidArgument("config: MUSIC needs K = M + L + 1 < M_b^RF");
  if (codebook_bits < 1 || codebook_bits > 20) throw InvalidArgument("config: codebook_bits");
  if (n_taps < 0 || n_taps % layout.m_b_rf != 0 || n_taps / layout.m_b_rf > layout.n_b_rf)
    throw InvalidArgument("config: n_taps must be a multiple of M_b^RF up to M_b^RF * N_b^RF");
  if (!(music_grid_deg > 0.0)) throw InvalidArgument("config: music_grid_deg must be > 0");
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (si_nmse_db && !std::isfinite(*si_nmse_db))
    throw InvalidArgument("config: si_nmse_db must be finite (omit it for perfect CSI)");
  auto check_target = [](const TargetSpec& t) {
    if (!(t.angle_deg >= -90.0 && t.angle_deg <= 90.0))
      throw InvalidArgument("config: target angle outside [-90, 90]");
    if (!(t.range_m >= 0.0)) throw InvalidArgument("config: target range must be >= 0");
    if (!(t.gain_abs >= 0.0)) throw InvalidArgument("config: gain_abs must be >= 0");
  };
  for (const auto& t : dl_scatterers) check_target(t);
  for (const auto& t : passive_targets) check_target(t);
  check_target(ul_user);
}

namespace {

TargetSpec at(double angle_deg, double range_m, double velocity_mps) {
  TargetSpec t;
  t.angle_deg = angle_deg;
  t.range_m = range_m;
  t.velocity_mps = velocity_mps;
  return t;
}

}  // namespace

ScenarioConfig table1_profile() {
  ScenarioConfig cfg;
  cfg.profile = "table1";
  cfg.dl_scatterers = {at(-30.0, 60.0, 10.0), at(-20.0, 95.0, -15.0)};
  cfg.passive_targets = {at(20.0, 45.0, 25.0), at(40.0, 160.0, -30.0)};
  cfg.ul_user = at(-10.0, 130.0, 5.0);
  return cfg;
}

ScenarioConfig fast_profile() {
  ScenarioConfig cfg = table1_profile();
  cfg.profile = "fast";
  cfg.layout.n_b_a = 4;
  cfg.layout.m_b_a = 4;
  cfg.n_subcarriers = 64;
  return cfg;
}

ScenarioConfig profile_by_name(const std::string& name) {
  if (name == "table1") return table1_profile();
  if (name == "fast") return fast_profile();
  throw InvalidArgument("unknown profile '" + name + "' (expected table1 or fast)");
}

namespace {

Json target_to_json(const TargetSpec& t) {
  Json j;
  j["angle_deg"] = t.angle_deg;
  j["range_m"] = t.range_m;
  j["velocity_mps"] = t.velocity_mps;
  j["gain_abs"] = t.gain_abs;
  j["gain_phase_deg"] = t.gain_phase_deg ? Json(*t.gain_phase_deg) : Json(nullptr);
  return j;
}

TargetSpec target_from_json(const Json& j) {
  TargetSpec t;
  t.angle_deg = j.value("angle_deg", t.angle_deg);
  t.range_m = j.value("range_m", t.range_m);
  t.velocity_mps = j.value("velocity_mps", t.velocity_mps);
  t.gain_abs = j.value("gain_abs", t.gain_abs);
  if (j.contains("gain_phase_deg") && !j["gain_phase_deg"].is_null())
    t.gain_phase_deg = j["gain_phase_deg"].get<double>();
  return t;
}

Json config_json(const ScenarioConfig& c) {
  Json j;
  j["profile"] = c.profile;
  j["n_b_rf"] = c.layout.n_b_rf;
  j["n_b_a"] = c.layout.n_b_a;
  j["m_b_rf"] = c.layout.m_b_rf;
  j["m_b_a"] = c.layout.m_b_a;
  j["n_u"] = c.layout.n_u;
  j["m_u"] = c.layout.m_u;
  j["spacing_over_lambda"] = c.layout.spacing_over_lambda;
  j["n_subcarriers"] = c.n_subcarriers;
  j["n_symbols"] = c.n_symbols;
  j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
  j["symbol_duration_s"] = c.symbol_duration_s;
  j["carrier_hz"] = c.carrier_hz;
  j["p_b_dbm"] = c.p_b_dbm;
  j["p_u_dbm"] = c.p_u_dbm;
  j["sigma_b2_dbm"] = c.sigma_b2_dbm;
  j["sigma_u2_dbm"] = c.sigma_u2_dbm;
  j["lambda_b_dbm"] = c.lambda_b_dbm;
  j["si_kappa_db"] = c.si_kappa_db;
  j["si_pathloss_db"] = c.si_pathloss_db;
  j["si_nmse_db"] = c.si_nmse_db ? Json(*c.si_nmse_db) : Json(nullptr);
  j["n_taps"] = c.n_taps;
  j["codebook_bits"] = c.codebook_bits;
  j["music_grid_deg"] = c.music_grid_deg;
  j["sensing_noise"] = c.sensing_noise;
  j["separate_echoes"] = c.separate_echoes;
  j["dl_scatterers"] = Json::array();
  for (const auto& t : c.dl_scatterers) j["dl_scatterers"].push_back(target_to_json(t));
  j["passive_targets"] = Json::array();
  for (const auto& t : c.passive_targets) j["passive_targets"].push_back(target_to_json(t));
  j["ul_user"] = target_to_json(c.ul_user);
  j["ridge_rel"] = c.ridge_rel;
  j["solver_tol"] = c.solver_tol;
  j["solver_max_iter"] = c.solver_max_iter;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  return j;
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

std::string config_to_json(const ScenarioConfig& cfg) { return config_json(cfg).dump(2); }

ScenarioConfig config_from_json(const std::string& text, const ScenarioConfig& base) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");

  ScenarioConfig c = j.contains("profile") ? profile_by_name(j["profile"].get<std::string>()) : base;
  try {
    read_field(j, "n_b_rf", c.layout.n_b_rf);
    read_field(j, "n_b_a", c.layout.n_b_a);
    read_field(j, "m_b_rf", c.layout.m_b_rf);
    read_field(j, "m_b_a", c.layout.m_b_a);
    read_field(j, "n_u", c.layout.n_u);
    read_field(j, "m_u", c.layout.m_u);
    read_field(j, "spacing_over_lambda", c.layout.spacing_over_lambda);
    read_field(j, "n_subcarriers", c.n_subcarriers);
    read_field(j, "n_symbols", c.n_symbols);
    read_field(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    read_field(j, "symbol_duration_s", c.symbol_duration_s);
    read_field(j, "carrier_hz", c.carrier_hz);
    read_field(j, "p_b_dbm", c.p_b_dbm);
    read_field(j, "p_u_dbm", c.p_u_dbm);
    read_field(j, "sigma_b2_dbm", c.sigma_b2_dbm);
    read_field(j, "sigma_u2_dbm", c.sigma_u2_dbm);
    read_field(j, "lambda_b_dbm", c.lambda_b_dbm);
    read_field(j, "si_kappa_db", c.si_kappa_db);
    read_field(j, "si_pathloss_db", c.si_pathloss_db);
    if (j.contains("si_nmse_db"))
      c.si_nmse_db = j["si_nmse_db"].is_null() ? std::nullopt
                                               : std::optional<double>(j["si_nmse_db"].get<double>());
    read_field(j, "n_taps", c.n_taps);
    read_field(j, "codebook_bits", c.codebook_bits);
    read_field(j, "music_grid_deg", c.music_grid_deg);
    read_field(j, "sensing_noise", c.sensing_noise);
    read_field(j, "separate_echoes", c.separate_echoes);
    if (j.contains("dl_scatterers")) {
      c.dl_scatterers.clear();
      for (const auto& t : j["dl_scatterers"]) c.dl_scatterers.push_back(target_from_json(t));
    }
    if (j.contains("passive_targets")) {
      c.passive_targets.clear();
      for (const auto& t : j["passive_targets"]) c.passive_targets.push_back(target_from_json(t));
    }
    if (j.contains("ul_user")) c.ul_user = target_from_json(j["ul_user"]);
    read_field(j, "ridge_rel", c.ridge_rel);
    read_field(j, "solver_tol", c.solver_tol);
    read_field(j, "solver_max_iter", c.solver_max_iter);
    read_field(j, "seed", c.seed);
    read_field(j, "trials", c.trials);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

ScenarioConfig config_from_json(const std::string& text) {
  return config_from_json(text, table1_profile());
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

constexpr std::uint32_t kStreamTrial = 0x7472;
constexpr std::uint32_t kStreamKkt = 0x6b6b;
constexpr std::uint32_t kStreamNull = 0x6e75;
constexpr double kRangeAngleStepDeg = 1.0;

Rng make_rng(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Complex draw_gain(const TargetSpec& t, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double ph = t.gain_phase_deg ? deg_to_rad(*t.gain_phase_deg) : phase(rng);
  return std::polar(t.gain_abs, ph);
}

struct Scene {
  std::vector<TargetParams> targets;  // DL scatterers, passive targets, UL user last
  std::vector<std::string> roles;
  CMatrix h_dl, h_ul, h_bb, h_bb_hat;
};

Scene draw_scene(const ScenarioConfig& cfg, Rng& rng) {
  const ArrayLayout& lay = cfg.layout;
  const double d = lay.spacing_over_lambda;
  Scene s;
  auto add = [&](const TargetSpec& t, const char* role) {
    s.targets.push_back({draw_gain(t, rng), t.angle_deg, t.range_m, t.velocity_mps});
    s.roles.emplace_back(role);
  };
  for (const auto& t : cfg.dl_scatterers) add(t, "dl_scatterer");
  for (const auto& t : cfg.passive_targets) add(t, "passive");
  add(cfg.ul_user, "ul_user");

  // Communication path gains are drawn separately from the radar reflections.
  std::vector<PathParams> dl_paths;
  for (const auto& t : cfg.dl_scatterers) dl_paths.push_back({draw_gain(t, rng), t.angle_deg});
  const PathParams ul_path{draw_gain(cfg.ul_user, rng), cfg.ul_user.angle_deg};

  s.h_dl = gen_dl_channel(dl_paths, lay.m_u, lay.n_b(), d);
  s.h_ul = gen_ul_channel(ul_path, lay.m_b(), lay.n_u, d);
  s.h_bb = gen_si_channel(lay.m_b(), lay.n_b(), cfg.si_kappa_db, cfg.si_pathloss_db, rng);
  s.h_bb_hat = cfg.si_nmse_db ? perturb_estimate(s.h_bb, *cfg.si_nmse_db, rng) : s.h_bb;
  return s;
}

/// Sensing-slot analog beams: one codebook entry per chain, spread evenly in
/// sin-space and offset by a quarter spacing so that no DFT grid direction
/// falls on the nulls of every beam.
AnalogBeamformer probing_beams(const Codebook& cb, int n_rf) {
  const double spacing = static_cast<double>(cb.size()) / n_rf;
  std::vector<int> idx(n_rf);
  for (int i = 0; i < n_rf; ++i)
    idx[i] = std::min(static_cast<int>(cb.size()) - 1, static_cast<int>(std::floor((i + 0.25) * spacing)));
  return AnalogBeamformer::from_codebook(cb, idx);
}

struct SensingSlot {
  AnalogBeamformer v_rf, w_rf;
  SignalGrid x, y;
};

SensingSlot simulate_sensing_slot(const ScenarioConfig& cfg, const Scene& scene, Rng& rng) {
  const ArrayLayout& lay = cfg.layout;
  const double d = lay.spacing_over_lambda;
  const Waveform wf = cfg.waveform();
  const double p_b = dbm_to_watt(cfg.p_b_dbm);
  const double sigma_b2 = dbm_to_watt(cfg.sigma_b2_dbm);

  SensingSlot slot;
  slot.v_rf = probing_beams(dft_codebook(lay.n_b_a, cfg.codebook_bits, d), lay.n_b_rf);
  slot.w_rf = probing_beams(dft_codebook(lay.m_b_a, cfg.codebook_bits, d), lay.m_b_rf);
  const CMatrix& v = slot.v_rf.matrix();
  const CMatrix& w = slot.w_rf.matrix();
  const double amp = std::sqrt(p_b / lay.n_b_rf);  // V_bb = amp * I

  // Cancellers built from the SI estimate leave (H~ - H~_hat) V_bb behind.
  const CMatrix h_tilde = w.adjoint() * scene.h_bb * v;
  const CMatrix h_tilde_hat = w.adjoint() * scene.h_bb_hat * v;
  const CancellerPair canc = build_cancellers(h_tilde_hat, cfg.n_taps);
  const CMatrix si_left = post_digital_residual(h_tilde, canc) * amp;

  const std::size_t k = scene.targets.size();
  std::vector<CVector> rx_beam(k);  // W^H a_M(theta_k)
  std::vector<CVector> tx_beam(k);  // (a_N^H(theta_k) V_rf)^T, conjugated
  for (std::size_t i = 0; i < k; ++i) {
    rx_beam[i] = w.adjoint() * ula_response(lay.m_b(), scene.targets[i].angle_deg, d);
    tx_beam[i] = v.adjoint() * ula_response(lay.n_b(), scene.targets[i].angle_deg, d);
  }
  const CVector v_u = top_right_singular_vectors(scene.h_ul, 1).col(0) *
                      std::sqrt(dbm_to_watt(cfg.p_u_dbm));
  const CVector ul_rx = w.adjoint() * (scene.h_ul * v_u);

  const double h = 1.0 / std::sqrt(2.0);
  std::bernoulli_distribution bit(0.5);
  auto qpsk = [&]() { return Complex(bit(rng) ? h : -h, bit(rng) ? h : -h); };

  slot.x = SignalGrid(wf.n_subcarriers, wf.n_symbols);
  slot.y = SignalGrid(wf.n_subcarriers, wf.n_symbols);
  CVector s(lay.n_b_rf);
  for (int p = 0; p < wf.n_subcarriers; ++p) {
    for (int q = 0; q < wf.n_symbols; ++q) {
      for (int i = 0; i < lay.n_b_rf; ++i) s(i) = qpsk();
      const CVector bb = amp * s;
      CVector y = si_left * s + ul_rx * qpsk();
      for (std::size_t t = 0; t < k; ++t) {
        const Complex echo = scene.targets[t].gain * radar_phase(scene.targets[t], p, q, wf) *
                             tx_beam[t].dot(bb);
        y += echo * rx_beam[t];
      }
      if (cfg.sensing_noise)
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += complex_normal(rng, sigma_b2);
      slot.x.at(p, q) = v * bb;
      slot.y.at(p, q) = std::move(y);
    }
  }
  return slot;
}

void fill_maps(const ScenarioConfig& cfg, const SensingSlot& slot,
               const std::vector<DelayDopplerMap>& target_maps, SensingMaps& maps,
               double angle_step) {
  const Waveform wf = cfg.waveform();
  const double d = cfg.layout.spacing_over_lambda;
  maps.ranges_m.clear();
  maps.velocities_mps.clear();
  maps.angles_deg.clear();
  for (int n = 0; n < wf.n_subcarriers; ++n) maps.ranges_m.push_back(n * wf.range_bin_m());
  const int m_min = -wf.n_symbols / 2;
  for (int c = 0; c < wf.n_symbols; ++c)
    maps.velocities_mps.push_back((c + m_min) * wf.velocity_bin_mps());
  maps.range_velocity = combine_normalized_maps(target_maps);

  const int n_angles = static_cast<int>(std::floor(180.0 / angle_step + 1e-9)) + 1;
  maps.range_angle = RMatrix::Zero(n_angles, wf.n_subcarriers);
  for (int a = 0; a < n_angles; ++a) {
    const double theta = std::min(90.0, -90.0 + a * angle_step);
    maps.angles_deg.push_back(theta);
    const auto quotient = delay_doppler_quotient(slot.y, slot.x, theta, slot.w_rf, d);
    maps.range_angle.row(a) = delay_doppler_map(quotient.z).magnitude.rowwise().maxCoeff().transpose();
  }
}

double nearest_bin(double value, double bin) { return std::round(value / bin); }

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, int trial, SensingMaps* maps) {
  TrialResult res;
  res.trial = trial;
  try {
    cfg.validate();
    const ArrayLayout& lay = cfg.layout;
    const double d = lay.spacing_over_lambda;
    const Waveform wf = cfg.waveform();
    Rng rng = make_rng(cfg.seed, kStreamTrial, static_cast<std::uint64_t>(trial));
    const Scene scene = draw_scene(cfg, rng);
    const int k = static_cast<int>(scene.targets.size());
    const int n_dl = static_cast<int>(cfg.dl_scatterers.size());

    // Slot 1: sensing.
    const SensingSlot slot = simulate_sensing_slot(cfg, scene, rng);
    const MusicResult music =
        music_doas(sample_covariance(slot.y.cells), k, cfg.music_grid_deg, slot.w_rf.matrix(), d);
    res.music_reliable = music.reliable;

    // Estimates are ascending; pair them with the targets in angular order.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scene.targets[a].angle_deg < scene.targets[b].angle_deg;
    });
    std::vector<double> doa(k);
    for (int i = 0; i < k; ++i) doa[order[i]] = music.doas_deg[i];

    std::vector<SignalGrid> echoes;
    if (cfg.separate_echoes) echoes = separate_targets(slot.y, doa, slot.w_rf, d);
    std::vector<DelayDopplerMap> target_maps;
    for (int t = 0; t < k; ++t) {
      const TargetParams& tp = scene.targets[t];
      const SignalGrid& y_t = cfg.separate_echoes ? echoes[t] : slot.y;
      const auto quotient = delay_doppler_quotient(y_t, slot.x, doa[t], slot.w_rf, d);
      target_maps.push_back(delay_doppler_map(quotient.z));
      const DelayDopplerMap& map = target_maps.back();
      const DelayDopplerEstimate dd = recover_parameters(map.peak_n, map.peak_m, wf);

      TargetReport tr;
      tr.role = scene.roles[t];
      tr.true_angle_deg = tp.angle_deg;
      tr.true_range_m = tp.range_m;
      tr.true_velocity_mps = tp.velocity_mps;
      tr.true_n = static_cast<int>(nearest_bin(tp.range_m, wf.range_bin_m()));
      tr.true_m = static_cast<int>(nearest_bin(tp.velocity_mps, wf.velocity_bin_mps()));
      tr.estimate = {doa[t], map.peak_n, map.peak_m, dd.delay_s, dd.doppler_hz, dd.range_m,
                     dd.velocity_mps};
      res.targets.push_back(tr);
      res.max_doa_error_deg = std::max(res.max_doa_error_deg, std::abs(doa[t] - tp.angle_deg));
    }
    if (maps) fill_maps(cfg, slot, target_maps, *maps, kRangeAngleStepDeg);

    // Slot 2: beamformers from the estimated directions.
    const std::vector<double> interferers(doa.begin(), doa.end() - 1);
    const std::vector<double> dl_doas(doa.begin(), doa.begin() + n_dl);
    const EstimatedChannels est =
        build_estimated_channels(lay, interferers, dl_doas, doa.back(), scene.h_bb_hat);

    AlgorithmConfig alg;
    alg.layout = lay;
    alg.codebook_bits = cfg.codebook_bits;
    alg.n_taps = cfg.n_taps;
    alg.p_b_watts = dbm_to_watt(cfg.p_b_dbm);
    alg.p_u_watts = dbm_to_watt(cfg.p_u_dbm);
    alg.lambda_b_watts = dbm_to_watt(cfg.lambda_b_dbm);
    alg.ridge_rel = cfg.ridge_rel;
    alg.numeric.tol = cfg.solver_tol;
    alg.numeric.max_iter = cfg.solver_max_iter;
    const HybridBeamformers bf = run_algorithm1(est, alg);
    res.closed_form = bf.closed_form;

    // Evaluation against the true channels.
    EstimatedChannels truth;
    truth.h_rad = radar_channel_at(scene.targets, 0, 0, wf, lay.m_b(), lay.n_b(), d);
    const std::vector<TargetParams> non_ul(scene.targets.begin(), scene.targets.end() - 1);
    truth.h_rad_int = radar_channel_at(non_ul, 0, 0, wf, lay.m_b(), lay.n_b(), d);
    truth.h_dl = scene.h_dl;
    truth.h_ul = scene.h_ul;
    truth.h_bb = scene.h_bb;
    const CMatrix& w = bf.w_b_rf.matrix();
    const CMatrix h_tilde = w.adjoint() * scene.h_bb * bf.v_b_rf.matrix();

    const double sigma_b2 = dbm_to_watt(cfg.sigma_b2_dbm);
    const double sigma_u2 = dbm_to_watt(cfg.sigma_u2_dbm);
    res.metrics = evaluate_links(bf, truth, h_tilde, sigma_b2, sigma_u2);
    const CMatrix w_mss = mss_rx_combiner(w.adjoint() * est.h_ul, 1);
    res.gamma_ul_mss = ul_sinr(bf, w_mss, truth.h_ul, truth.h_rad, h_tilde, sigma_b2);
    res.rate_ul_mss = rate_from_sinr(res.gamma_ul_mss);
    res.rate_ideal = ideal_dl_rate(truth.h_dl, alg.p_b_watts, sigma_u2, lay.streams());
    res.dl_stream_sinr = dl_stream_sinrs(bf, truth.h_dl, sigma_u2);

    const RVector resid = analog_residual_power_per_chain(h_tilde, bf.cancellers.analog, bf.v_b_bb);
    res.si_residual_w.assign(resid.data(), resid.data() + resid.size());
    res.tx_power_w = tx_power(bf.v_b_rf, bf.v_b_bb);
    res.ul_power_w = bf.v_u_bb.squaredNorm();
    for (Eigen::Index c = 0; c < bf.w_b_bb.cols(); ++c)
      res.max_combiner_norm_error =
          std::max(res.max_combiner_norm_error, std::abs(bf.w_b_bb.col(c).norm() - 1.0));
    const CMatrix int_eff = w.adjoint() * est.h_rad_int;
    const double int_norm = int_eff.norm();
    res.nulling_ratio = int_norm > 0.0 ? (bf.w_b_bb.adjoint() * int_eff).norm() / int_norm : 0.0;
    res.ok = true;
  } catch (const EstimationFailure& e) {
    res.error = std::string("sensing: ") + e.what();
  } catch (const Error& e) {
    res.error = e.what();
  }
  return res;
}

int RunReport::n_ok() const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(),
                                        [](const TrialResult& t) { return t.ok; }));
}

bool RunReport::all_checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  for (int t = 0; t < cfg.trials; ++t) {
    SensingMaps maps;
    const bool want_maps = opts.maps && !report.maps;
    report.trials.push_back(run_trial(cfg, t, want_maps ? &maps : nullptr));
    if (want_maps && report.trials.back().ok) report.maps = std::move(maps);
  }
  if (report.n_ok() == 0)
    throw Error("every trial failed; first error: " + report.trials.front().error);
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SweepVariable sweep_variable_from_string(const std::string& name) {
  if (name == "p_b_dbm") return SweepVariable::p_b_dbm;
  if (name == "p_u_dbm") return SweepVariable::p_u_dbm;
  if (name == "n_taps") return SweepVariable::n_taps;
  throw InvalidArgument("unknown sweep variable '" + name + "'");
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::p_b_dbm: return "p_b_dbm";
    case SweepVariable::p_u_dbm: return "p_u_dbm";
    case SweepVariable::n_taps: return "n_taps";
  }
  return "";
}

namespace {

SweepRow aggregate(double value, const std::vector<TrialResult>& trials) {
  SweepRow row;
  row.value = value;
  for (const auto& t : trials) {
    if (!t.ok) continue;
    ++row.n_ok;
    row.rate_dl += t.metrics.rate_dl;
    row.rate_ideal += t.rate_ideal;
    row.rate_ul_nsp += t.metrics.rate_ul;
    row.rate_ul_mss += t.rate_ul_mss;
    row.gamma_rad += t.metrics.gamma_rad;
  }
  if (row.n_ok > 0) {
    const double n = row.n_ok;
    row.rate_dl /= n;
    row.rate_ideal /= n;
    row.rate_ul_nsp /= n;
    row.rate_ul_mss /= n;
    row.gamma_rad /= n;
  }
  return row;
}

ScenarioConfig with_value(ScenarioConfig cfg, SweepVariable variable, double value) {
  switch (variable) {
    case SweepVariable::p_b_dbm: cfg.p_b_dbm = value; break;
    case SweepVariable::p_u_dbm: cfg.p_u_dbm = value; break;
    case SweepVariable::n_taps: {
      const double r = std::round(value);
      if (std::abs(r - value) > 1e-9) throw InvalidArgument("n_taps sweep values must be integers");
      cfg.n_taps = static_cast<int>(r);
      break;
    }
  }
  return cfg;
}

}  // namespace

RunReport sweep(const ScenarioConfig& cfg, SweepVariable variable,
                const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  report.sweep_variable = to_string(variable);
  for (double v : values) {
    const ScenarioConfig point = with_value(cfg, variable, v);
    point.validate();
    std::vector<TrialResult> trials;
    for (int t = 0; t < point.trials; ++t) trials.push_back(run_trial(point, t));
    report.sweep.push_back(aggregate(v, trials));
    for (auto& t : trials) report.trials.push_back(std::move(t));
  }
  if (report.n_ok() == 0) throw Error("every trial of the sweep failed");
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Validation suite

namespace {

CheckResult check_max(std::string name, double worst, double limit, std::string detail = {}) {
  return {std::move(name), worst <= limit, worst, limit, std::move(detail)};
}

void scenario_checks(const RunReport& run, const ScenarioConfig& cfg,
                     std::vector<CheckResult>& out) {
  const double p_b = dbm_to_watt(cfg.p_b_dbm);
  const double p_u = dbm_to_watt(cfg.p_u_dbm);
  const double lambda_b = dbm_to_watt(cfg.lambda_b_dbm);
  double tx = -std::numeric_limits<double>::infinity(), ul = tx, si = tx, rate_gap = tx;
  double norm_err = 0.0, nulling = 0.0;
  bool finite = true;
  for (const auto& t : run.trials) {
    if (!t.ok) continue;
    tx = std::max(tx, t.tx_power_w - p_b);
    ul = std::max(ul, t.ul_power_w - p_u);
    for (double r : t.si_residual_w) si = std::max(si, r);
    rate_gap = std::max(rate_gap, t.metrics.rate_dl - t.rate_ideal);
    norm_err = std::max(norm_err, t.max_combiner_norm_error);
    nulling = std::max(nulling, t.nulling_ratio);
    for (double v : {t.metrics.gamma_rad, t.metrics.gamma_dl, t.metrics.gamma_ul, t.rate_ideal,
                     t.rate_ul_mss, t.tx_power_w})
      finite = finite && std::isfinite(v) && v >= 0.0;
  }
  out.push_back(check_max("trials_completed", static_cast<double>(run.trials.size()) - run.n_ok(), 0.0,
                          std::to_string(run.n_ok()) + " of " + std::to_string(run.trials.size())));
  out.push_back(check_max("tx_power_budget", tx, 1e-9, "max |V_rf V_bb|_F^2 - P_b (W)"));
  out.push_back(check_max("ul_power_budget", ul, 1e-12, "max |v_u|^2 - P_u (W)"));
  out.push_back(check_max("combiner_unit_norm", norm_err, 1e-12));
  out.push_back(check_max("nsp_nulling_trials", nulling, 1e-9, "|W_bb^H H_int_eff| / |H_int_eff|"));
  if (!cfg.si_nmse_db)
    out.push_back(check_max("si_budget", si, lambda_b, "max per-chain analog residual (W)"));
  out.push_back(check_max("dl_rate_le_ideal", rate_gap, 1e-12, "max rate_dl - rate_ideal"));
  out.push_back({"metrics_finite", finite, finite ? 0.0 : 1.0, 0.0, {}});
}

void precoder_checks(const ScenarioConfig& cfg, std::vector<CheckResult>& out) {
  Rng rng = make_rng(cfg.seed, kStreamKkt, 0);
  std::uniform_real_distribution<double> power_dbm(0.0, 40.0);
  double slack = 0.0, stationarity = 0.0, negative_zeta = 0.0, gap = 0.0, violation = 0.0;
  for (int i = 0; i < 100; ++i) {
    const CMatrix h = complex_normal_matrix(rng, 4, 3);
    const CVector t1 = complex_normal_matrix(rng, 3, 1).col(0);
    const CMatrix g = precoder_target(h, 2, dbm_to_watt(power_dbm(rng)) / 2);
    const auto free = lagrangian_tx_precoder(h, t1, std::numeric_limits<double>::infinity(), g, 0.0);
    const double lambda = 0.25 * free.unconstrained_leakage * free.unconstrained_leakage;
    const auto cf = lagrangian_tx_precoder(h, t1, lambda, g, 0.0);
    const CMatrix& v = cf.precoder.matrix;
    const double leak = (v.adjoint() * t1).squaredNorm();
    negative_zeta = std::max(negative_zeta, -cf.zeta);
    slack = std::max(slack, std::abs(cf.zeta * (leak - lambda)) / lambda);
    const CMatrix grad = h.adjoint() * (h * v - g) + cf.zeta * t1 * (t1.adjoint() * v);
    stationarity = std::max(stationarity, grad.norm() / (h.adjoint() * g).norm());

    const auto num = numeric_tx_precoder(h, t1.adjoint(), lambda, g);
    const double f_cf = precoder_objective(h, v, g);
    gap = std::max(gap, std::abs(f_cf - num.objective) / std::max(num.objective, 1e-300));
    violation = std::max(violation, leak / lambda - 1.0);
  }
  out.push_back(check_max("closed_form_zeta_nonnegative", negative_zeta, 0.0));
  out.push_back(check_max("closed_form_complementary_slackness", slack, 1e-8));
  out.push_back(check_max("closed_form_stationarity", stationarity, 1e-6));
  out.push_back(check_max("closed_form_vs_numeric_gap", gap, 1e-3));
  out.push_back(check_max("closed_form_constraint", violation, 1e-6));
}

void nulling_checks(const ScenarioConfig& cfg, std::vector<CheckResult>& out) {
  Rng rng = make_rng(cfg.seed, kStreamNull, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const CMatrix a = complex_normal_matrix(rng, 3, 8);
    const CMatrix h_int = a.adjoint();
    const CMatrix h_ul = complex_normal_matrix(rng, 8, 1);
    const CMatrix w = nsp_rx_combiner(h_ul, h_int, 1);
    worst = std::max(worst, (w.adjoint() * h_int).norm() / h_int.norm());
  }
  out.push_back(check_max("nsp_nulling_random", worst, 1e-9, "1000 instances, A 3x8"));

  bool raised = false;
  try {
    CMatrix h_int = CMatrix::Zero(2, 1);
    h_int(0, 0) = 1.0;
    nsp_rx_combiner(h_int, h_int, 1);
  } catch (const DegenerateCombiner&) {
    raised = true;
  }
  out.push_back({"nsp_degenerate_raises", raised, raised ? 0.0 : 1.0, 0.0, {}});
}

}  // namespace

RunReport run_validation(const ScenarioConfig& cfg_in) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioConfig cfg = cfg_in;
  cfg.validate();
  RunReport report;
  report.config = cfg;
  report.trials.reserve(cfg.trials);
  for (int t = 0; t < cfg.trials; ++t) report.trials.push_back(run_trial(cfg, t));
  scenario_checks(report, cfg, report.checks);
  precoder_checks(cfg, report.checks);
  nulling_checks(cfg, report.checks);

  ScenarioConfig perfect = cfg;
  perfect.si_nmse_db.reset();
  const int full = perfect.layout.m_b_rf * perfect.layout.n_b_rf;
  const int half = perfect.layout.m_b_rf * (perfect.layout.n_b_rf / 2);
  const RunReport taps = sweep(perfect, SweepVariable::n_taps,
                               {0.0, static_cast<double>(half), static_cast<double>(full)});
  double drop = 0.0;
  for (std::size_t i = 1; i < taps.sweep.size(); ++i)
    drop = std::max(drop, taps.sweep[i - 1].rate_dl - taps.sweep[i].rate_dl);
  report.checks.push_back(check_max("dl_rate_nondecreasing_in_taps", drop, 0.0,
                                    "largest mean-rate drop between tap counts (bps/Hz)"));

  std::vector<double> p_u;
  for (int v = 0; v <= 30; v += 5) p_u.push_back(v);
  const RunReport ul = sweep(cfg, SweepVariable::p_u_dbm, p_u);
  double deficit = -std::numeric_limits<double>::infinity();
  for (const auto& row : ul.sweep) deficit = std::max(deficit, row.rate_ul_mss - row.rate_ul_nsp);
  report.checks.push_back(check_max("ul_nsp_ge_mss", deficit, 0.0,
                                    "largest mean rate_ul_mss - rate_ul_nsp over the P_u sweep"));
  report.sweep_variable = "p_u_dbm";
  report.sweep = ul.sweep;
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json estimate_json(const TargetReport& t) {
  Json j;
  j["role"] = t.role;
  j["true_angle_deg"] = t.true_angle_deg;
  j["true_range_m"] = t.true_range_m;
  j["true_velocity_mps"] = t.true_velocity_mps;
  j["true_n"] = t.true_n;
  j["true_m"] = t.true_m;
  j["doa_deg"] = t.estimate.doa_deg;
  j["n_star"] = t.estimate.n_star;
  j["m_star"] = t.estimate.m_star;
  j["delay_s"] = t.estimate.delay_s;
  j["doppler_hz"] = t.estimate.doppler_hz;
  j["range_m"] = t.estimate.range_m;
  j["velocity_mps"] = t.estimate.velocity_mps;
  return j;
}

Json trial_json(const TrialResult& t) {
  Json j;
  j["trial"] = t.trial;
  j["ok"] = t.ok;
  if (!t.ok) {
    j["error"] = t.error;
    return j;
  }
  j["targets"] = Json::array();
  for (const auto& tr : t.targets) j["targets"].push_back(estimate_json(tr));
  j["music_reliable"] = t.music_reliable;
  j["max_doa_error_deg"] = t.max_doa_error_deg;
  j["gamma_rad"] = t.metrics.gamma_rad;
  j["gamma_dl"] = t.metrics.gamma_dl;
  j["gamma_ul"] = t.metrics.gamma_ul;
  j["rate_dl"] = t.metrics.rate_dl;
  j["rate_ul_nsp"] = t.metrics.rate_ul;
  j["gamma_ul_mss"] = t.gamma_ul_mss;
  j["rate_ul_mss"] = t.rate_ul_mss;
  j["rate_ideal"] = t.rate_ideal;
  j["dl_stream_sinr"] = t.dl_stream_sinr;
  j["si_residual_w"] = t.si_residual_w;
  j["tx_power_w"] = t.tx_power_w;
  j["ul_power_w"] = t.ul_power_w;
  j["nulling_ratio"] = t.nulling_ratio;
  j["closed_form"] = t.closed_form;
  return j;
}

Json matrix_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  Json j;
  j["config"] = config_json(report.config);
  j["seed"] = report.config.seed;
  j["n_trials"] = report.trials.size();
  j["n_ok"] = report.n_ok();

  SweepRow mean = aggregate(0.0, report.trials);
  Json summary;
  summary["rate_dl"] = mean.rate_dl;
  summary["rate_ideal"] = mean.rate_ideal;
  summary["rate_ul_nsp"] = mean.rate_ul_nsp;
  summary["rate_ul_mss"] = mean.rate_ul_mss;
  summary["gamma_rad"] = mean.gamma_rad;
  j["summary"] = summary;

  if (!report.checks.empty()) {
    j["all_checks_passed"] = report.all_checks_passed();
    Json checks = Json::array();
    for (const auto& c : report.checks) {
      Json cj;
      cj["name"] = c.name;
      cj["passed"] = c.passed;
      cj["observed"] = c.worst;
      cj["limit"] = c.limit;
      if (!c.detail.empty()) cj["detail"] = c.detail;
      checks.push_back(cj);
    }
    j["checks"] = checks;
  }
  if (!report.sweep.empty()) {
    j["sweep_variable"] = report.sweep_variable;
    Json rows = Json::array();
    for (const auto& r : report.sweep) {
      Json rj;
      rj["sweep_value"] = r.value;
      rj["rate_dl"] = r.rate_dl;
      rj["rate_ideal"] = r.rate_ideal;
      rj["rate_ul_nsp"] = r.rate_ul_nsp;
      rj["rate_ul_mss"] = r.rate_ul_mss;
      rj["gamma_rad"] = r.gamma_rad;
      rj["n_ok"] = r.n_ok;
      rows.push_back(rj);
    }
    j["sweep"] = rows;
  }
  Json trials = Json::array();
  for (const auto& t : report.trials) trials.push_back(trial_json(t));
  j["trials"] = trials;

  if (report.maps) {
    const SensingMaps& m = *report.maps;
    Json maps;
    maps["range_angle"] = {{"angle_deg", m.angles_deg},
                           {"range_m", m.ranges_m},
                           {"magnitude", matrix_json(m.range_angle)}};
    maps["range_velocity"] = {{"range_m", m.ranges_m},
                              {"velocity_mps", m.velocities_mps},
                              {"magnitude", matrix_json(m.range_velocity)}};
    j["maps"] = maps;
  }
  return j.dump(2) + "\n";
}

std::string rates_csv(const RunReport& report) {
  std::string out = "sweep_value,rate_dl,rate_ideal,rate_ul_nsp,rate_ul_mss,gamma_rad\n";
  std::vector<SweepRow> rows = report.sweep;
  if (rows.empty()) rows.push_back(aggregate(0.0, report.trials));
  for (const auto& r : rows) {
    out += format_number(r.value) + "," + format_number(r.rate_dl) + "," +
           format_number(r.rate_ideal) + "," + format_number(r.rate_ul_nsp) + "," +
           format_number(r.rate_ul_mss) + "," + format_number(r.gamma_rad) + "\n";
  }
  return out;
}

std::string range_angle_csv(const SensingMaps& maps) {
  std::string out = "angle_deg,range_m,magnitude\n";
  for (std::size_t a = 0; a < maps.angles_deg.size(); ++a)
    for (std::size_t n = 0; n < maps.ranges_m.size(); ++n)
      out += format_number(maps.angles_deg[a]) + "," + format_number(maps.ranges_m[n]) + "," +
             format_number(maps.range_angle(a, n)) + "\n";
  return out;
}

std::string range_velocity_csv(const SensingMaps& maps) {
  std::string out = "range_m,velocity_mps,magnitude\n";
  for (std::size_t n = 0; n < maps.ranges_m.size(); ++n)
    for (std::size_t v = 0; v < maps.velocities_mps.size(); ++v)
      out += format_number(maps.ranges_m[n]) + "," + format_number(maps.velocities_mps[v]) + "," +
             format_number(maps.range_velocity(n, v)) + "\n";
  return out;
}

}  // namespace fdisac
