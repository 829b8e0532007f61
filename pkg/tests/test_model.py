import math

import numpy as np
import pytest

from rabispec.errors import DomainError, SingularAnisotropyError, ValidityError
from rabispec.model import (ModelKind, ModelParams, RotationFrames, SectorLabel, bogolubov_frame,
                            critical_coupling, critical_coupling_value, rotated_couplings, two_mode,
                            two_photon)


def test_critical_coupling_values():
    assert critical_coupling_value("two-photon", 1.0, 0.25) == pytest.approx(0.8, abs=1e-15)
    assert critical_coupling_value("two-mode", 1.0, 0.5) == pytest.approx(4 / 3, abs=1e-15)
    with pytest.raises(SingularAnisotropyError):
        critical_coupling_value("two-photon", 1.0, -1.0)


def test_frame_identities(tp, tm):
    for p in (tp, tm):
        fr = bogolubov_frame(p)
        assert fr.u ** 2 - fr.v ** 2 == pytest.approx(1.0, abs=1e-12)
        assert 0 < fr.eta <= 1
        assert fr.g_critical == critical_coupling(p)
        assert math.cos(2 * fr.beta) == pytest.approx((1 - p.lam) / (1 + p.lam) * fr.eta, abs=1e-14)


def test_frame_at_zero_coupling():
    fr = bogolubov_frame(two_photon(g=0.0))
    assert fr.eta == 1.0 and fr.u == 1.0 and fr.v == 0.0
    assert fr.eta_prime == 1.0


def test_isotropic_beta_is_quarter_pi():
    fr = bogolubov_frame(two_photon(g=0.3, lam=1.0))
    assert fr.beta == pytest.approx(math.pi / 4, abs=1e-15)


def test_beta_beyond_quarter_pi_for_lambda_above_one():
    fr = bogolubov_frame(two_photon(g=0.2, lam=1.5))
    assert math.pi / 4 < fr.beta < math.pi / 2


def test_signed_v_for_negative_g():
    a, b = bogolubov_frame(two_photon(g=0.3)), bogolubov_frame(two_photon(g=-0.3))
    assert b.v == -a.v and b.u == a.u and b.eta == a.eta


def test_validity_boundary():
    with pytest.raises(ValidityError):
        bogolubov_frame(two_photon(g=0.8))
    with pytest.raises(ValidityError):
        bogolubov_frame(two_mode(g=4 / 3 + 1e-12))


def test_rotation_frames_orthogonal():
    fr = RotationFrames.from_beta(0.3)
    assert fr.is_orthogonal()
    assert np.allclose(fr.V, fr.U.T)


def test_rotated_couplings_isotropic():
    rc = rotated_couplings(two_photon(g=0.4, lam=1.0), math.pi / 4)
    assert rc.p == pytest.approx(0.0, abs=1e-16)
    assert rc.q == pytest.approx(0.2)
    assert rc.r == pytest.approx(0.4)


def test_sector_labels():
    assert SectorLabel.even().parity_class == 0
    assert SectorLabel.even("-").parity_class == 2
    assert SectorLabel.odd().parity_class == 1
    assert SectorLabel.odd("-").parity_class == 3
    assert SectorLabel.pair(1, "-").parity_class == 1
    assert SectorLabel.odd().start == 1 and SectorLabel.pair(3).start == 0
    assert SectorLabel.even().kappa == 0.25 and SectorLabel.pair(1).kappa == 1.0
    with pytest.raises(DomainError):
        SectorLabel(ModelKind.TWO_PHOTON, "both")
    with pytest.raises(DomainError):
        SectorLabel.pair(-1)


def test_params_validation():
    with pytest.raises(DomainError):
        ModelParams("two-photon", -1.0, 0.2, 0.3, 0.25)
    with pytest.raises(DomainError):
        ModelParams("two-photon", 1.0, 0.2, 0.3, -0.5)
    with pytest.raises(DomainError):
        ModelParams("two-photon", 1.0, 0.2, 0.3, 0.25, SectorLabel.pair(0))
    p = ModelParams("tm", 1.0, 0.2, 0.3, 0.5)
    assert p.kind is ModelKind.TWO_MODE and p.n0 == 0
