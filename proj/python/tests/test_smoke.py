import math

import numpy as np
import pytest

import ncmart


def hoeffding(**kw):
    args = dict(alpha=1.0, beta=1.0, a=1.0, b=1.0, c=1.0, m=3)
    args.update(kw)
    return ncmart.BoundParams(**args)


def test_hoeffding_constants():
    a = ncmart.bound("ncbr", hoeffding())
    b = ncmart.bound("azuma_nc", hoeffding())
    assert a["tag"] == "cor_ncbr"
    assert a["constant"] == pytest.approx(math.exp(-2) * math.cosh(2), rel=1e-12)
    assert b["constant"] == pytest.approx(0.5 * math.exp(-1.5) + 0.5 * math.exp(0.5), rel=1e-12)
    rhs = [row["rhs"] for row in a["rows"]]
    assert rhs == sorted(rhs, reverse=True)


def test_lemma_gap_nonnegative():
    for lam in np.linspace(0, 1, 11):
        for x in np.linspace(-20, 20, 41):
            assert ncmart.lemma_gap(float(lam), float(x)) >= -1e-12


def test_golden_thompson_random_pair():
    rng = np.random.default_rng(7)
    g1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    g2 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    product, total = ncmart.gt_terms((g1 + g1.conj().T) / 2, (g2 + g2.conj().T) / 2)
    assert product >= total - 1e-9 * max(1.0, product)


def test_non_hermitian_input_raises_with_kind():
    with pytest.raises(ncmart.NcmartError) as info:
        ncmart.gt_terms(np.array([[0, 1], [0, 0]], dtype=complex), np.eye(2, dtype=complex))
    assert info.value.kind == "NonHermitianInput"


def test_no_finite_index():
    with pytest.raises(ncmart.NcmartError) as info:
        ncmart.minimal_index(1.0)
    assert info.value.kind == "NoFiniteIndex"


def test_exact_and_monte_carlo_agree():
    exact = ncmart.enumerate_exact([(-1.0, 0.5), (1.0, 0.5)], alpha=1.0, beta=1.0, a=0.5, b=0.8, m=1, i=3, horizon=12)
    est = ncmart.simulate_crossing(alpha=1.0, beta=1.0, a=0.5, b=0.8, m=1, i=3, horizon=12, n_paths=20000, seed=3)
    assert 0.0 < exact < 1.0
    assert abs(est["p_hat"] - exact) < 5 * math.sqrt(exact * (1 - exact) / 20000)
    lo, hi = ncmart.wilson_interval(est["hits"], est["n_paths"])
    assert (lo, hi) == (est["ci_low"], est["ci_high"])


def test_verify_chain_within_bound():
    report = ncmart.verify_chain("ncbr", hoeffding(a=0.5, b=0.8), steps=6, rotation=0.1, seed=11)
    assert report["passed"]
    assert all(row["lhs"] <= row["rhs"] + 1e-9 for row in report["rows"])


def test_run_experiment_bounds():
    code, report, csv = ncmart.run_experiment({"mode": "bounds", "preset": "hoeffding"})
    assert code == 0
    assert report["schema_version"] == ncmart.REPORT_SCHEMA_VERSION
    assert "bounds.csv" in csv


def test_run_experiment_missing_seed_is_config_error():
    code, _, _ = ncmart.run_experiment({"mode": "mc-run", "preset": "hoeffding"})
    assert code == 2
