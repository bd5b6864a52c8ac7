import numpy as np
import pytest

import fdisac


def test_steering_vector_phase():
    a = fdisac.steering_vector(2, 30.0)
    assert a.shape == (2,)
    assert abs(a[1] - 1j) < 1e-12
    with pytest.raises(fdisac.InvalidArgument):
        fdisac.steering_vector(4, 91.0)


def test_codebook_constant_modulus():
    beams, angles = fdisac.dft_codebook(16, 5)
    assert beams.shape == (32, 16)
    assert len(angles) == 32
    assert np.allclose(np.abs(beams) ** 2, 1.0 / 16)


def test_channels():
    h = fdisac.gen_dl_channel([(1.0, -25.0), (1.0, 25.0)], 4, 16)
    assert np.linalg.matrix_rank(h) == 2
    u = fdisac.gen_ul_channel(2.0, -10.0, 4, 2)
    assert np.isclose(np.linalg.svd(u, compute_uv=False)[0], 2 * np.sqrt(8))
    a = fdisac.gen_si_channel(4, 4, 35.0, 40.0, seed=3)
    b = fdisac.gen_si_channel(4, 4, 35.0, 40.0, seed=3)
    assert np.array_equal(a, b)


def test_music_single_source():
    a = fdisac.steering_vector(8, 20.0)
    r = np.outer(a, a.conj()) + 0.01 * np.eye(8)
    res = fdisac.music_doas(r, 1, 0.1, 8)
    assert res["doas_deg"] == pytest.approx([20.0])
    assert res["reliable"]


def test_periodogram_peak():
    p, q = np.meshgrid(np.arange(64), np.arange(14), indexing="ij")
    z = np.exp(-2j * np.pi * p * 5 / 64 + 2j * np.pi * q * (-3) / 14)
    assert fdisac.periodogram_peak(z) == (5, -3)


def test_precoders_agree():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    g = h @ np.eye(3)[:, :2]
    t1 = 0.1 * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    free_leak = np.linalg.norm(np.eye(3)[:, :2].conj().T @ t1) ** 2
    lam = 0.2 * free_leak
    v_cf, zeta = fdisac.lagrangian_tx_precoder(h, t1, lam, g)
    v_num, mult = fdisac.numeric_tx_precoder(h, t1.conj()[None, :], lam, g)
    assert zeta > 0
    f_cf = fdisac.precoder_objective(h, v_cf, g)
    f_num = fdisac.precoder_objective(h, v_num, g)
    assert abs(f_cf - f_num) <= 1e-6 * max(f_num, 1e-12)
    assert np.linalg.norm(v_cf.conj().T @ t1) ** 2 <= lam * (1 + 1e-9)
    assert mult[0] == pytest.approx(zeta, rel=1e-6)


def test_nsp_nulls_and_degenerate():
    rng = np.random.default_rng(1)
    h_ul = rng.standard_normal((6, 1)) + 1j * rng.standard_normal((6, 1))
    h_int = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    w = fdisac.nsp_rx_combiner(h_ul, h_int)
    assert np.isclose(np.linalg.norm(w), 1.0)
    assert np.linalg.norm(h_int.conj().T @ w) <= 1e-10 * np.linalg.norm(h_int)
    with pytest.raises(fdisac.DegenerateCombiner):
        fdisac.nsp_rx_combiner(h_ul, np.hstack([h_ul, h_int]))


def test_dbm_to_watt():
    assert fdisac.dbm_to_watt(30.0) == pytest.approx(1.0)


def test_run_scenario_fast():
    report = fdisac.run_scenario({"trials": 2, "seed": 5}, profile="fast")
    assert len(report["trials"]) == 2
    assert report["config"]["n_subcarriers"] == 64
    again = fdisac.run_scenario({"trials": 2, "seed": 5}, profile="fast")
    assert report == again


def test_validation_fast():
    report = fdisac.run_validation({"trials": 3})
    assert all(c["passed"] for c in report["checks"])


def test_bad_config_raises():
    with pytest.raises(fdisac.InvalidArgument):
        fdisac.run_scenario({"trials": 0}, profile="fast")
