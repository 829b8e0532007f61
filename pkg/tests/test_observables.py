import math

import numpy as np
import pytest

from rabispec.errors import DomainError, NotDegenerateError, OutOfDomainError
from rabispec.model import ModelKind, two_mode, two_photon
from rabispec.observables import (SpinBosonState, assemble_crossing_state, bar_partner, condensation_scan,
                                  entanglement_entropy, entropy_sweep, isotropic_reference_point,
                                  participation_ratio, photon_number_distribution, reduced_spin_density,
                                  supercritical_scan)
from rabispec.oracle import oracle_spectrum, parity_classes

G_EVEN = 4 * math.sqrt(2) / (5 * math.sqrt(3))
G_ODD = math.sqrt(0.4 / (3 * (1 - 1 / 16)))
G_TM0 = 4 / math.sqrt(15)
G_TM1 = math.sqrt(0.8 / (2 * 0.75))

CROSSINGS = [
    (two_photon(g=G_EVEN), 0, (1, -1)),
    (two_photon(g=G_ODD, parity="odd"), 1, (1j, -1j)),
    (two_mode(g=G_TM0, n0=0), 0, (1, -1)),
    (two_mode(g=G_TM1, n0=1), 0, (1, -1)),
]


def state(up, down):
    return SpinBosonState("bareFock", np.array(up, dtype=float), np.array(down, dtype=float), True)


def test_entropy_limits():
    assert entanglement_entropy(reduced_spin_density(state([1, 0], [0, 0]))) == 0.0
    s = 1 / math.sqrt(2)
    assert entanglement_entropy(reduced_spin_density(state([s, 0], [0, s]))) == pytest.approx(1.0, abs=1e-15)
    # spin superposition times one boson state is a product state
    assert entanglement_entropy(reduced_spin_density(state([s, 0], [s, 0]))) == pytest.approx(0.0, abs=1e-12)


def test_normalization_required():
    with pytest.raises(DomainError):
        reduced_spin_density(state([1, 1], [0, 0]))
    with pytest.raises(DomainError):
        photon_number_distribution(SpinBosonState("alphaFock", np.ones(1), np.zeros(1), True))


def test_participation_ratio():
    assert participation_ratio(np.full(8, 1 / 8)) == pytest.approx(8.0)
    assert participation_ratio(np.array([1.0, 0.0])) == 1.0


def test_interleaving_roundtrip():
    v = np.arange(6.0)
    st = SpinBosonState.from_vector(v, ModelKind.TWO_PHOTON, normalized=False)
    assert np.array_equal(st.up, [0, 2, 4]) and np.array_equal(st.interleaved(), v)


@pytest.mark.parametrize("params,m,Cs", CROSSINGS)
def test_crossing_states(params, m, Cs):
    N = 200
    a = assemble_crossing_state(params, Cs[0], m=m, n_trunc=N)
    b = assemble_crossing_state(params, Cs[1], m=m, n_trunc=N)
    assert a.residual < 1e-7 and b.residual < 1e-7
    va, vb = a.state.interleaved(), b.state.interleaved()
    assert abs(np.vdot(va, vb)) < 1e-10
    phases = (1j) ** parity_classes(params.kind, N) if params.kind is ModelKind.TWO_PHOTON \
        else (-1.0) ** parity_classes(params.kind, N)
    for C, v in zip(Cs, (va, vb)):
        assert np.allclose(phases * v, C * v, atol=1e-12)


def test_bar_partner_involution(tp):
    v = np.random.default_rng(1).normal(size=2 * 11)
    st = SpinBosonState.from_vector(v, tp.kind, normalized=False)
    twice = bar_partner(bar_partner(st, tp.kind), tp.kind).interleaved()
    cls = parity_classes(tp.kind, 10)
    assert np.allclose(twice, (-1.0) ** cls * v, atol=1e-15)
    tm_st = SpinBosonState.from_vector(v, ModelKind.TWO_MODE, normalized=False)
    assert np.allclose(bar_partner(bar_partner(tm_st, ModelKind.TWO_MODE), ModelKind.TWO_MODE).interleaved(), v)


def test_crossing_state_guards():
    with pytest.raises(NotDegenerateError):
        assemble_crossing_state(two_photon(g=G_EVEN + 0.01), 1)
    with pytest.raises(DomainError):
        assemble_crossing_state(two_photon(g=G_EVEN), 1j)


def test_isotropic_reference():
    ref = isotropic_reference_point(1.0, 0.3)
    p = two_photon(delta=ref.delta, g=0.3, lam=1.0)
    dec = oracle_spectrum(p, 300)
    hits = [c for c in range(4) if np.min(np.abs(dec.by_class(c) - ref.E)) < 1e-9]
    assert len(hits) >= 2
    eta = math.sqrt(1 - 4 * 0.3 ** 2)
    assert ref.delta == pytest.approx(math.sqrt(2 * (3 * eta ** 2 - 1)), rel=1e-14)
    assert ref.K0 == 1.0 and ref.L0 == pytest.approx(-ref.delta / (2 * eta), rel=1e-12)
    with pytest.raises(OutOfDomainError):
        isotropic_reference_point(1.0, 0.45)


def test_entropy_sweep_even_jump():
    sw = entropy_sweep(two_photon(), np.linspace(0.60, 0.70, 6), n_trunc=150, parity="even")
    assert len(sw.jumps) == 1
    j = sw.jumps[0]
    assert j.g_lo <= G_EVEN <= j.g_hi and j.g_hi - j.g_lo <= 1e-6
    assert j.parity_lo != j.parity_hi
    assert all(0.0 <= r.S <= 1.0 for r in sw.rows)


def test_entropy_sweep_parity_guard(tm):
    with pytest.raises(DomainError):
        entropy_sweep(tm, [0.1], parity="even")


def test_condensation_scan_trend():
    rows = condensation_scan(two_photon(), [0.4, 0.6, 0.79], k=5, n_trunc=150)
    etas = [r.eta for r in rows]
    assert etas == sorted(etas, reverse=True)
    assert rows[-1].pole_spread < rows[0].pole_spread
    assert rows[-1].oracle_spread < rows[0].oracle_spread
    assert all(r.poles[0] > -0.5 for r in rows)


def test_supercritical_small():
    rep = supercritical_scan(two_photon(), 0.85, (60, 90), n_levels=4)
    assert rep.slopes.shape == (2, 4)
    assert 0.0 <= rep.ground_entropy <= 1.0
    with pytest.raises(OutOfDomainError):
        supercritical_scan(two_photon(), 0.5, (60, 90))
