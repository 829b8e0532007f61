import math

import numpy as np
import pytest

from rabispec.errors import FormulaMismatchError, InsufficientCutoffError, OutOfDomainError
from rabispec.model import bogolubov_frame, two_mode, two_photon
from rabispec.oracle import (alpha_fock, bogolubov_conjugation_check, build_hamiltonian, diagonalize,
                             pair_fock, pair_ladder_ops, parity_classes, parity_matrix, stable_levels,
                             two_mode_vacuum, vacuum_state_alpha)


def idx(n, up):
    return 2 * n + (0 if up else 1)


def test_two_photon_elements(tp):
    H = build_hamiltonian(tp, 10).entries
    assert H[idx(0, True), idx(2, False)] == pytest.approx(tp.g * math.sqrt(2), abs=1e-15)
    assert H[idx(2, True), idx(0, False)] == pytest.approx(tp.lam * tp.g * math.sqrt(2), abs=1e-15)
    assert np.array_equal(H, H.T)


def test_two_mode_elements():
    p = two_mode(n0=2)
    H = build_hamiltonian(p, 10).entries
    # <up, n=1| g a1 a2 |down, n=2> with ladder states |n0+n, n>
    assert H[idx(1, True), idx(2, False)] == pytest.approx(p.g * math.sqrt(2 * 4), abs=1e-15)
    assert H[idx(0, False), idx(0, False)] == pytest.approx(2 * p.omega - p.delta)


def test_zero_coupling_diagonal():
    H = build_hamiltonian(two_photon(g=0.0), 8).entries
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0
    n = np.arange(9)
    assert np.allclose(np.diag(H)[0::2], n + 0.2) and np.allclose(np.diag(H)[1::2], n - 0.2)


def test_small_cutoff_by_enumeration(tp):
    N = 4
    w, d, g, lam = tp.omega, tp.delta, tp.g, tp.lam
    H = np.zeros((2 * N + 2, 2 * N + 2))
    for n in range(N + 1):
        H[idx(n, True), idx(n, True)] = w * n + d
        H[idx(n, False), idx(n, False)] = w * n - d
        if n + 2 <= N:
            amp = math.sqrt((n + 1) * (n + 2))
            H[idx(n, True), idx(n + 2, False)] = H[idx(n + 2, False), idx(n, True)] = g * amp
            H[idx(n + 2, True), idx(n, False)] = H[idx(n, False), idx(n + 2, True)] = lam * g * amp
    assert np.allclose(diagonalize(build_hamiltonian(tp, N)).eigenvalues, np.linalg.eigvalsh(H), atol=1e-14)
    with pytest.raises(OutOfDomainError):
        build_hamiltonian(tp, 3)


def test_parity_phases(tp):
    ph = parity_matrix(tp, 3).phases
    assert ph[idx(0, True)] == pytest.approx(-1)
    assert ph[idx(0, False)] == pytest.approx(1)
    assert ph[idx(1, True)] == pytest.approx(-1j)
    cls = parity_classes(two_mode(), 3)
    assert list(cls[:4]) == [1, 0, 0, 1]


@pytest.mark.parametrize("params", [two_photon(g=0.5), two_mode(g=1.0, n0=1)])
def test_diagonalize(params):
    T = build_hamiltonian(params, 60)
    dec = diagonalize(T)
    V, E = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(E) >= 0)
    assert np.allclose(V.T @ V, np.eye(T.dim), atol=1e-12)
    res = np.linalg.norm(T.entries @ V - V * E, axis=0)
    assert res.max() < 1e-10 * np.linalg.norm(T.entries, 2)
    cls = parity_classes(params.kind, 60)
    for k in range(0, T.dim, 7):
        support = np.abs(V[:, k]) > 1e-14
        assert set(cls[support]) == {dec.parity_labels[k]}


def test_dimension_cap(tp):
    with pytest.raises(OutOfDomainError):
        diagonalize(build_hamiltonian(tp, 40), cap=50)


def test_two_by_two_closed_form():
    a, b, c = 0.3, 0.7, -1.1
    ev = np.linalg.eigvalsh(np.array([[a, b], [b, c]]))
    mid, rad = (a + c) / 2, math.hypot((a - c) / 2, b)
    assert ev == pytest.approx([mid - rad, mid + rad], abs=1e-15)


@pytest.mark.parametrize("params", [two_photon(), two_photon(g=-0.3, lam=1.7, delta=-0.4),
                                    two_mode(), two_mode(n0=3, g=0.9, lam=0.2)])
def test_conjugation_check(params):
    rep = bogolubov_conjugation_check(params, 60)
    assert rep.max_deviation < 1e-10 * params.omega
    with pytest.raises(FormulaMismatchError):
        bogolubov_conjugation_check(params, 60, threshold=1e-30)


def test_alpha_vacuum_is_annihilated(tp):
    fr = bogolubov_frame(tp)
    N = 80
    vac = vacuum_state_alpha(fr, N)
    a = np.diag(np.sqrt(np.arange(1.0, N + 1)), 1)
    alpha = fr.u * a + fr.v * a.T
    assert np.linalg.norm((alpha @ vac)[: N - 2]) < 1e-12
    one = alpha_fock(fr, N, 1)
    assert np.linalg.norm((alpha.T @ alpha @ one - one)[: N - 2]) < 1e-10


def test_pair_vacuum_is_annihilated():
    p = two_mode(n0=1, g=0.8)
    fr = bogolubov_frame(p)
    N = 80
    vac = two_mode_vacuum(fr, 1, N)
    lower, raise_ = pair_ladder_ops(1, N + 1)
    ntot = 1 + 2.0 * np.arange(N + 1)
    u, v = fr.u, fr.v
    b1b2 = u * u * lower + v * v * raise_ + u * v * np.diag(ntot + 1.0)
    assert np.linalg.norm((b1b2 @ vac)[: N - 2]) < 1e-12
    assert np.linalg.norm(pair_fock(fr, 1, N, 1)) > 1.0


def test_insufficient_cutoff():
    with pytest.raises(InsufficientCutoffError):
        vacuum_state_alpha(bogolubov_frame(two_photon(g=0.79)), 10)


def test_stable_levels(tp):
    rep = stable_levels(tp, 100, 6)
    assert rep.stable.all() and rep.n_check == 150
