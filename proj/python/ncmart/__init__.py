"""Tail bounds for noncommutative supermartingales."""

import json

from ._ncmart import (
    REPORT_SCHEMA_VERSION,
    BoundParams,
    NcmartError,
    azuma_classical_bound,
    enumerate_exact,
    gt_terms,
    lemma_gap,
    minimal_index,
    simulate_crossing,
    wilson_interval,
)
from . import _ncmart

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "BoundParams",
    "NcmartError",
    "azuma_classical_bound",
    "bound",
    "enumerate_exact",
    "gt_terms",
    "lemma_gap",
    "minimal_index",
    "run_experiment",
    "simulate_crossing",
    "verify_chain",
    "wilson_interval",
]


def bound(mode, params, envelope="khan"):
    """Closed-form report for one bound mode as a dict."""
    return json.loads(_ncmart.bound(mode, params, envelope))


def verify_chain(mode, params, *, steps, kind="conjugated", seed=0, rotation=None, horizon=None):
    """Bound report with lattice traces of a generated chain filled in."""
    return json.loads(
        _ncmart.verify_chain(mode, params, steps=steps, kind=kind, seed=seed, rotation=rotation, horizon=horizon)
    )


def run_experiment(config):
    """Runs a batch config (dict); returns (exit_code, report dict, {csv name: text})."""
    code, report, csv = _ncmart.run_experiment(json.dumps(config))
    return code, json.loads(report), csv
