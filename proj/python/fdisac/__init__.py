"""Full-duplex MIMO ISAC simulation: sensing, hybrid beamforming, link metrics."""

import json

from ._core import (
    ConstraintViolation,
    DegenerateCombiner,
    Error,
    EstimationFailure,
    InfeasibleResult,
    InvalidArgument,
    NumericalFailure,
    dbm_to_watt,
    delay_doppler_map,
    dft_codebook,
    gen_dl_channel,
    gen_si_channel,
    gen_ul_channel,
    lagrangian_tx_precoder,
    mss_rx_combiner,
    music_doas,
    nsp_rx_combiner,
    numeric_tx_precoder,
    periodogram_peak,
    precoder_objective,
    steering_vector,
)
from . import _core

__all__ = [
    "ConstraintViolation",
    "DegenerateCombiner",
    "Error",
    "EstimationFailure",
    "InfeasibleResult",
    "InvalidArgument",
    "NumericalFailure",
    "dbm_to_watt",
    "default_config",
    "delay_doppler_map",
    "dft_codebook",
    "gen_dl_channel",
    "gen_si_channel",
    "gen_ul_channel",
    "lagrangian_tx_precoder",
    "mss_rx_combiner",
    "music_doas",
    "nsp_rx_combiner",
    "numeric_tx_precoder",
    "periodogram_peak",
    "precoder_objective",
    "run_scenario",
    "run_validation",
    "steering_vector",
    "sweep",
]


def default_config(profile="table1"):
    """Scenario parameters of a named profile as a dict."""
    return json.loads(_core.default_config(profile))


def _config_text(config, profile):
    doc = {"profile": profile}
    doc.update(config or {})
    return json.dumps(doc)


def run_scenario(config=None, profile="table1", maps=False):
    """Runs every trial and returns the report as a dict."""
    return json.loads(_core.run_scenario(_config_text(config, profile), maps))


def sweep(variable, values, config=None, profile="table1"):
    """Sweeps p_b_dbm, p_u_dbm or n_taps; one row per value."""
    return json.loads(_core.sweep(_config_text(config, profile), variable, list(values)))


def run_validation(config=None, profile="fast"):
    """Invariant, KKT and nulling checks."""
    return json.loads(_core.run_validation(_config_text(config, profile)))
