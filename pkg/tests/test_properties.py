"""Randomized invariants over the valid parameter domain."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rabispec.gfunction import g_value
from rabispec.model import ModelKind, ModelParams, SectorLabel, bogolubov_frame, critical_coupling_value
from rabispec.observables import SpinBosonState, bar_partner, entanglement_entropy, reduced_spin_density
from rabispec.oracle import build_hamiltonian, oracle_spectrum, parity_classes

kinds = st.sampled_from([ModelKind.TWO_PHOTON, ModelKind.TWO_MODE])
lams = st.floats(0.05, 3.0)
fracs = st.floats(0.0, 0.97)


def make(kind, delta, lam, frac, n0=0):
    g = frac * critical_coupling_value(kind, 1.0, lam)
    sec = SectorLabel.even() if kind is ModelKind.TWO_PHOTON else SectorLabel.pair(n0)
    return ModelParams(kind, 1.0, delta, g, lam, sec)


@given(kinds, st.floats(-1, 1), lams, fracs)
def test_bogolubov_norm(kind, delta, lam, frac):
    fr = bogolubov_frame(make(kind, delta, lam, frac))
    assert abs(fr.u ** 2 - fr.v ** 2 - 1.0) < 1e-10 * fr.u ** 2
    assert 0.0 <= fr.beta <= np.pi / 2


@given(kinds, lams, st.floats(0.0, 0.9), st.floats(0.01, 0.07))
def test_eta_decreases_with_coupling(kind, lam, f1, df):
    a = bogolubov_frame(make(kind, 0.2, lam, f1)).eta
    b = bogolubov_frame(make(kind, 0.2, lam, f1 + df)).eta
    assert b < a


@settings(max_examples=25, deadline=None)
@given(kinds, st.floats(-1, 1), st.floats(0.0, 3.0), st.floats(0.0, 1.2), st.integers(0, 3))
def test_spectrum_even_in_g(kind, delta, lam, g, n0):
    sec = SectorLabel.even() if kind is ModelKind.TWO_PHOTON else SectorLabel.pair(n0)
    p = ModelParams(kind, 1.0, delta, g, lam, sec)
    q = p.with_g(-g)
    a, b = oracle_spectrum(p, 40).eigenvalues, oracle_spectrum(q, 40).eigenvalues
    assert np.max(np.abs(a - b)) < 1e-10 * max(1.0, np.max(np.abs(a)))


@settings(max_examples=25, deadline=None)
@given(kinds, st.floats(-1, 1), st.floats(0.0, 3.0), st.floats(-1.2, 1.2), st.integers(0, 3))
def test_parity_classes_conserved(kind, delta, lam, g, n0):
    sec = SectorLabel.even() if kind is ModelKind.TWO_PHOTON else SectorLabel.pair(n0)
    H = build_hamiltonian(ModelParams(kind, 1.0, delta, g, lam, sec), 20).entries
    cls = parity_classes(kind, 20)
    i, j = np.nonzero(H)
    assert np.all(cls[i] == cls[j])


@settings(max_examples=30, deadline=None)
@given(kinds, st.floats(-0.5, 0.5), lams, st.floats(0.05, 0.9), st.floats(-1.0, 2.0),
       st.floats(0.01, 100.0))
def test_d_scale_keeps_signs(kind, delta, lam, frac, E, scale):
    p = make(kind, delta, lam, frac)
    a, b = g_value(p, E), g_value(p, E, d_scale=scale)
    assert a.converged == b.converged
    if a.converged:
        assert np.sign(a.g_plus) == np.sign(b.g_plus) and np.sign(a.g_minus) == np.sign(b.g_minus)


@settings(max_examples=30, deadline=None)
@given(kinds, st.floats(-0.5, 0.5), lams, st.floats(0.05, 0.9), st.floats(-1.0, 2.0))
def test_g_value_deterministic(kind, delta, lam, frac, E):
    p = make(kind, delta, lam, frac)
    a, b = g_value(p, E), g_value(p, E)
    assert np.array_equal([a.g_plus, a.g_minus], [b.g_plus, b.g_minus], equal_nan=True)


@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_entropy_bounds(v):
    v = np.array(v) / np.linalg.norm(v)
    s = entanglement_entropy(reduced_spin_density(SpinBosonState.from_vector(v, ModelKind.TWO_PHOTON)))
    assert 0.0 <= s <= 1.0


@given(kinds, st.lists(st.floats(-1, 1), min_size=12, max_size=12))
def test_parity_operator_order(kind, v):
    v = np.array(v, dtype=complex)
    st_ = SpinBosonState.from_vector(v, kind, normalized=False)
    order = 4 if kind is ModelKind.TWO_PHOTON else 2
    for _ in range(order):
        st_ = bar_partner(st_, kind)
    assert np.allclose(st_.interleaved(), v, atol=1e-15)
