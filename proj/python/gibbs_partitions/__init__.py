"""Gibbs partitions: exact finite-n laws, samplers and limit-law checks.

Schemes are plain dicts in the config format, e.g.
    {"w": {"kind": "closed_form", "e": 4}, "v": {"kind": "closed_form", "e": 2, "rho": "critical"}}
"""

import json

from . import _core
from ._core import GibbsError, dense_h, dilute_Z_cdf, dilute_Z_density, frechet_cdf, pp_intensity

__all__ = [
    "GibbsError",
    "classify",
    "exact_law",
    "sample",
    "run_suite",
    "dense_h",
    "dilute_Z_cdf",
    "dilute_Z_density",
    "frechet_cdf",
    "pp_intensity",
]


def _text(scheme):
    return scheme if isinstance(scheme, str) else json.dumps(scheme)


def _load(text):
    # floats come back with 17 digits; inf / nan are spelled as strings
    return json.loads(text, parse_constant=float)


def classify(scheme):
    return _load(_core.classify(_text(scheme)))


def exact_law(scheme, n, law="N"):
    """law: N | largest | deficit | prefix1 | partition_function"""
    return _core.exact_law(_text(scheme), n, law)


def sample(scheme, n, replicates=1, seed=0, method="exact"):
    return _core.sample(_text(scheme), n, replicates, seed, method)


def run_suite(config, out_dir="", seed=None, threads=1, csv=True):
    """Returns (exit_code, reports, error)."""
    code, reports, err = _core.run_suite(str(config), str(out_dir), seed, threads, csv)
    return code, _load(reports), (json.loads(err) if err else None)
