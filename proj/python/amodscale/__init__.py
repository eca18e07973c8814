"""Travel-time calibration of road networks from trip records, and a batched
AMoD fleet simulator."""

import json as _json

from . import _core
from ._core import Network, load_network, pair_weight

__version__ = _core.__version__

__all__ = [
    "Network",
    "load_network",
    "pair_weight",
    "calibrate",
    "percentiles",
    "histogram",
    "simulate",
]


def calibrate(network, trips, method="asm", utc_offset="+00:00", dt_scale=1800, cell_m=1000.0,
              smin_mps=0.5, threads=1):
    """Per-period scaling factors as a list of dicts, one per period."""
    return _json.loads(_core.calibrate(network, str(trips), method, utc_offset, dt_scale, cell_m,
                                       smin_mps, threads))


def percentiles(errors):
    return _json.loads(_core.percentiles(list(errors)))


def histogram(errors, edges=None):
    return _json.loads(_core.histogram(list(errors), [] if edges is None else list(edges)))


def simulate(network, trips, fleet_size, utc_offset="+00:00", seed=0, profile=None, **params):
    """KPIs of one run. `profile` is a calibrate() result; free flow when None.

    Extra keyword arguments override scenario parameters (dt_max_s, zeta, ...).
    """
    scenario = "\n".join(f"{k} = {v}" for k, v in params.items())
    prof = "" if profile is None else _json.dumps(profile)
    return _json.loads(_core.simulate(network, str(trips), int(fleet_size), utc_offset, int(seed),
                                      scenario, prof))
