#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdisac/runner.hpp"

namespace py = pybind11;
using namespace fdisac;

namespace {

std::vector<PathParams> to_paths(const std::vector<std::pair<Complex, double>>& paths) {
  std::vector<PathParams> out;
  for (const auto& [gain, angle] : paths) out.push_back({gain, angle});
  return out;
}

py::dict music_to_dict(const MusicResult& r) {
  py::dict d;
  d["doas_deg"] = r.doas_deg;
  d["grid_deg"] = r.grid_deg;
  d["spectrum"] = r.spectrum;
  d["eigenvalues"] = r.eigenvalues;
  d["reliable"] = r.reliable;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Full-duplex MIMO ISAC simulation core";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", error.ptr());
  py::register_exception<EstimationFailure>(m, "EstimationFailure", error.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", error.ptr());
  py::register_exception<InfeasibleResult>(m, "InfeasibleResult", error.ptr());
  py::register_exception<DegenerateCombiner>(m, "DegenerateCombiner", error.ptr());

  m.def("dbm_to_watt", &dbm_to_watt, py::arg("x_dbm"));

  m.def("steering_vector", &ula_response, py::arg("n_elems"), py::arg("angle_deg"),
        py::arg("spacing_over_lambda") = 0.5);

  m.def(
      "dft_codebook",
      [](int n_elems, int n_bits, double spacing) {
        const Codebook cb = dft_codebook(n_elems, n_bits, spacing);
        CMatrix beams(static_cast<Eigen::Index>(cb.size()), n_elems);
        for (std::size_t i = 0; i < cb.size(); ++i) beams.row(static_cast<Eigen::Index>(i)) = cb[i].transpose();
        return py::make_tuple(beams, cb.angles_deg);
      },
      py::arg("n_elems"), py::arg("n_bits"), py::arg("spacing_over_lambda") = 0.5,
      "Returns (beams, angles_deg); row i of beams is codebook entry i.");

  m.def(
      "gen_dl_channel",
      [](const std::vector<std::pair<Complex, double>>& paths, int m_u, int n_b, double spacing) {
        return gen_dl_channel(to_paths(paths), m_u, n_b, spacing);
      },
      py::arg("paths"), py::arg("m_u"), py::arg("n_b"), py::arg("spacing_over_lambda") = 0.5,
      "paths: list of (complex gain, angle_deg).");

  m.def(
      "gen_ul_channel",
      [](Complex gain, double angle, int m_b, int n_u, double spacing) {
        return gen_ul_channel({gain, angle}, m_b, n_u, spacing);
      },
      py::arg("gain"), py::arg("angle_deg"), py::arg("m_b"), py::arg("n_u"),
      py::arg("spacing_over_lambda") = 0.5);

  m.def(
      "gen_si_channel",
      [](int m_b, int n_b, double kappa_db, double pathloss_db, std::uint64_t seed) {
        Rng rng(seed);
        return gen_si_channel(m_b, n_b, kappa_db, pathloss_db, rng);
      },
      py::arg("m_b"), py::arg("n_b"), py::arg("kappa_db"), py::arg("pathloss_db"), py::arg("seed"));

  m.def(
      "music_doas",
      [](const CMatrix& r, int k, double step, int array_size, double spacing) {
        return music_to_dict(music_doas(r, k, step, array_size, spacing));
      },
      py::arg("covariance"), py::arg("k"), py::arg("grid_step_deg"), py::arg("array_size"),
      py::arg("spacing_over_lambda") = 0.5);

  m.def(
      "periodogram_peak", [](const CMatrix& z) { return periodogram_peak(z); }, py::arg("z"),
      "Returns (n_star, m_star).");

  m.def(
      "delay_doppler_map",
      [](const CMatrix& z) {
        const DelayDopplerMap map = delay_doppler_map(z);
        return py::make_tuple(map.magnitude, map.m_min());
      },
      py::arg("z"), "Returns (magnitude, m_min); column c holds Doppler bin c + m_min.");

  m.def(
      "lagrangian_tx_precoder",
      [](const CMatrix& h, const CVector& t1, double lambda_b, const CMatrix& g, double ridge) {
        const auto sol = lagrangian_tx_precoder(h, t1, lambda_b, g, ridge);
        return py::make_tuple(sol.precoder.matrix, sol.zeta);
      },
      py::arg("h_dl_eff"), py::arg("t1"), py::arg("lambda_b_watts"), py::arg("g_target"),
      py::arg("ridge") = 0.0, "Returns (V_bb, zeta).");

  m.def(
      "numeric_tx_precoder",
      [](const CMatrix& h, const CMatrix& leak_rows, double lambda_b, const CMatrix& g, double tol,
         int max_iter, double ridge) {
        NumericOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.ridge = ridge;
        const auto sol = numeric_tx_precoder(h, leak_rows, lambda_b, g, opts);
        return py::make_tuple(sol.precoder.matrix, sol.multipliers);
      },
      py::arg("h_dl_eff"), py::arg("leak_rows"), py::arg("lambda_b_watts"), py::arg("g_target"),
      py::arg("tol") = 1e-12, py::arg("max_iter") = 2000, py::arg("ridge") = 0.0,
      "Returns (V_bb, multipliers).");

  m.def("precoder_objective", &precoder_objective, py::arg("h"), py::arg("v"), py::arg("g"),
        py::arg("ridge") = 0.0);
  m.def("nsp_rx_combiner", &nsp_rx_combiner, py::arg("h_ul_eff"), py::arg("h_rad_int_eff"),
        py::arg("n_streams") = 1);
  m.def("mss_rx_combiner", &mss_rx_combiner, py::arg("h_ul_eff"), py::arg("n_streams") = 1);

  m.def(
      "default_config", [](const std::string& profile) { return config_to_json(profile_by_name(profile)); },
      py::arg("profile") = "table1");

  m.def(
      "run_scenario",
      [](const std::string& config_json, bool maps) {
        const ScenarioConfig cfg = config_from_json(config_json);
        cfg.validate();
        RunOptions opts;
        opts.maps = maps;
        py::gil_scoped_release release;
        return report_to_json(run_scenario(cfg, opts));
      },
      py::arg("config_json"), py::arg("maps") = false);

  m.def(
      "sweep",
      [](const std::string& config_json, const std::string& variable, const std::vector<double>& values) {
        const ScenarioConfig cfg = config_from_json(config_json);
        cfg.validate();
        const SweepVariable var = sweep_variable_from_string(variable);
        py::gil_scoped_release release;
        return report_to_json(sweep(cfg, var, values));
      },
      py::arg("config_json"), py::arg("variable"), py::arg("values"));

  m.def(
      "run_validation",
      [](const std::string& config_json) {
        const ScenarioConfig cfg = config_from_json(config_json);
        cfg.validate();
        py::gil_scoped_release release;
        return report_to_json(run_validation(cfg));
      },
      py::arg("config_json"));
}
