import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mda.bounds import (BoundConstants, bound_report, excess_risk_bound, generalization_bound,
                        trace_bkb)
from mda.data import generate_synthetic, table2_preset
from mda.eigsolver import HyperParams
from mda.pipeline import fit


@settings(max_examples=80, deadline=None)
@given(st.floats(0, 100), st.integers(1, 10**6), st.integers(1, 50),
       st.floats(1e-4, 0.99), st.floats(0.1, 10))
def test_bounds_match_high_precision(tr, n, m, delta, scale):
    k = BoundConstants(L_loss=scale, U_loss=2 * scale, delta=delta)
    assert excess_risk_bound(tr, n, k) == pytest.approx(float(oracles.excess_risk_hp(tr, n, k)),
                                                       rel=1e-12)
    n_bar = max(1.0, n / m)
    assert generalization_bound(tr, m, n_bar, k) == pytest.approx(
        float(oracles.generalization_hp(tr, m, n_bar, k)), rel=1e-12)


def test_zero_trace_leaves_sampling_terms():
    k = BoundConstants()
    assert excess_risk_bound(0.0, 100, k) == pytest.approx(math.sqrt(2 * math.log(40) / 100))


def test_constants_validation():
    for kw in ({"delta": 1.0}, {"delta": 0.0}, {"L_loss": -1.0}, {"U_kx": math.inf}):
        with pytest.raises(ValueError):
            BoundConstants(**kw)
    with pytest.raises(ValueError):
        excess_risk_bound(1.0, 0, BoundConstants())
    with pytest.raises(ValueError):
        generalization_bound(1.0, 0, 5, BoundConstants())


@pytest.fixture(scope="module")
def model():
    return fit(generate_synthetic(table2_preset()[:2], 3), "median", HyperParams())


def test_trace_bkb(model):
    B, K = model.B, model.K_centered.values
    assert trace_bkb(model) == pytest.approx(np.trace(B.T @ K @ B), rel=1e-12)
    assert trace_bkb(model, centered=False) == pytest.approx(
        np.trace(B.T @ model.K_raw.values @ B), rel=1e-12)


def test_bound_report(model):
    rep = bound_report(model)
    assert (rep.n, rep.m, rep.n_bar) == (300, 2, 150.0)
    d = rep.to_dict()
    assert d["constants"]["delta"] == 0.05
    assert d["excess_risk_bound"] == excess_risk_bound(rep.tr_bkb, 300, BoundConstants())
