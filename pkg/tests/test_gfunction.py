import math

import numpy as np
import pytest

from rabispec.errors import PoleProximityError
from rabispec.gfunction import (EPS_POLE, d_coefficient, g_branch, g_value, g_values, log_d_coefficient,
                                nearest_pole, pole_energies)
from rabispec.model import SectorLabel, bogolubov_frame, two_mode, two_photon
from rabispec.recurrence import build_chain


def test_d_coefficient_products(tp, tm):
    fr = bogolubov_frame(tp)
    assert d_coefficient(fr, 0, SectorLabel.even()) == pytest.approx(fr.u ** -0.5, rel=1e-15)
    assert d_coefficient(fr, 1, SectorLabel.odd()) == pytest.approx(fr.u ** -1.5, rel=1e-15)
    assert d_coefficient(fr, 4, SectorLabel.even()) == pytest.approx(fr.u ** -0.5 * 3 * fr.x ** 2, rel=1e-13)
    assert d_coefficient(fr, 3, SectorLabel.even()) == 0.0
    frm = bogolubov_frame(tm)
    assert d_coefficient(frm, 2, SectorLabel.pair(1)) == pytest.approx(frm.u ** -2 * 6 * frm.x ** 2, rel=1e-13)


@pytest.mark.parametrize("params", [two_photon(), two_photon(parity="odd"), two_mode(n0=1)])
def test_d_coefficient_matches_chain(params):
    ch = build_chain(params, 0.1)
    fr = bogolubov_frame(params)
    for m, D in zip(ch.indices[:20], ch.D[:20]):
        assert d_coefficient(fr, int(m), params.sector) == pytest.approx(D, rel=1e-12)


def test_log_d_is_finite_at_large_index(tp):
    logd, sign = log_d_coefficient(bogolubov_frame(tp.with_g(0.79)), 4000, SectorLabel.even())
    assert math.isfinite(logd) and sign == 1.0


def test_pole_energies(tp, tm):
    ps = pole_energies(tp, 3)
    ep = ps.eta_prime
    assert ps.energies == pytest.approx((ep / 2 - 0.5, 2.5 * ep - 0.5, 4.5 * ep - 0.5), abs=1e-15)
    odd = pole_energies(tp.with_sector(SectorLabel.odd()), 2).energies
    assert odd == pytest.approx((1.5 * ep - 0.5, 3.5 * ep - 0.5), abs=1e-15)
    pm = pole_energies(tm, 3)
    assert np.diff(pm.energies) == pytest.approx([2 * pm.eta_prime] * 2, abs=1e-14)


def test_reference_ground_pole():
    # lambda = 0.25, g = 0.3 lowest pole, closed-form check of the frame chain
    assert pole_energies(two_photon(), 1).energies[0] == pytest.approx(-0.04838, abs=1e-5)


def test_nearest_pole(tp):
    fr = bogolubov_frame(tp)
    poles = pole_energies(tp, 4, fr).energies
    for k, p in enumerate(poles):
        assert nearest_pole(tp, p + 1e-3, fr) == (2 * k, pytest.approx(p))
    assert nearest_pole(tp, -10.0, fr)[0] == 0


def test_zero_coupling_zeros():
    p = two_photon(g=0.0)
    for E in (-0.2, 2.2, 3.8):
        assert abs(g_value(p, E).g_plus) < 1e-14
    for E in (0.2, 1.8, 4.2):
        assert abs(g_value(p, E).g_minus) < 1e-14
    q = two_photon(g=0.0, parity="odd")
    assert abs(g_value(q, 0.8).g_plus) < 1e-14 and abs(g_value(q, 1.2).g_minus) < 1e-14


def test_pole_margin(tp):
    pole = pole_energies(tp, 1).energies[0]
    s = g_value(tp, pole + 0.5 * EPS_POLE)
    assert not s.converged and math.isnan(s.g_plus)
    with pytest.raises(PoleProximityError):
        g_branch(tp, pole, "+")


def test_d_scale(tp):
    a, b = g_value(tp, 0.3), g_value(tp, 0.3, d_scale=3.0)
    assert b.g_plus == pytest.approx(3 * a.g_plus, rel=1e-15)
    assert b.g_minus == pytest.approx(3 * a.g_minus, rel=1e-15)


@pytest.mark.parametrize("params", [two_photon(), two_photon(parity="odd", g=0.7), two_mode(n0=1)])
def test_vectorized_matches_scalar(params):
    E = np.linspace(-0.9, 3.0, 157)
    gp, gm, ok = g_values(params, E)
    for e, a, b, o in zip(E, gp, gm, ok):
        s = g_value(params, e)
        assert o == s.converged
        if o:
            assert a == pytest.approx(s.g_plus, rel=1e-12, abs=1e-14)
            assert b == pytest.approx(s.g_minus, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("params", [two_photon(delta=0.0, g=0.35, lam=1.0),
                                    two_photon(delta=0.0, g=0.2, lam=1.0, parity="odd"),
                                    two_mode(delta=0.0, g=0.7, lam=1.0, n0=1)])
def test_isotropic_zero_detuning_spectrum_is_pole_set(params):
    from rabispec.oracle import oracle_spectrum
    poles = np.array(pole_energies(params, 5).energies)
    dec = oracle_spectrum(params, 300)
    for branch in "+-":
        cls = params.sector.with_branch(branch).parity_class
        assert np.allclose(dec.by_class(cls)[:5], poles, atol=1e-10)
