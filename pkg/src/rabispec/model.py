"""Model parameters, sector labels, spin rotations and the Bogolubov frame.

Both models share one code path. ``ModelKind.TWO_PHOTON`` couples the spin to
a single mode through a^2 and a^+2; ``ModelKind.TWO_MODE`` couples through the
pair operators a1 a2 and a1^+ a2^+ inside a fixed ladder |n0+n, n>.
The constant ``c`` (1 or 2) absorbs every difference in the frame formulas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, SingularAnisotropyError, ValidityError


class ModelKind(enum.Enum):
    TWO_PHOTON = "two-photon"
    TWO_MODE = "two-mode"

    @property
    def c(self) -> float:
        return 1.0 if self is ModelKind.TWO_PHOTON else 2.0

    @property
    def step(self) -> int:
        """Chain step in the boson index."""
        return 2 if self is ModelKind.TWO_PHOTON else 1

    @classmethod
    def parse(cls, text) -> "ModelKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "-")
        aliases = {"two-photon": cls.TWO_PHOTON, "2ph": cls.TWO_PHOTON, "tp": cls.TWO_PHOTON,
                   "two-mode": cls.TWO_MODE, "2m": cls.TWO_MODE, "tm": cls.TWO_MODE}
        if key not in aliases:
            raise ValueError(f"unknown model kind {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class SectorLabel:
    """Invariant subspace plus G-function branch.

    ``parity`` is "even" or "odd" for the two-photon model and None for the
    two-mode model, which instead carries ``n0``.
    """

    kind: ModelKind
    parity: str | None = "even"
    n0: int | None = None
    branch: str = "+"

    def __post_init__(self):
        if self.branch not in ("+", "-"):
            raise DomainError(f"branch must be '+' or '-', got {self.branch!r}")
        if self.kind is ModelKind.TWO_PHOTON:
            if self.parity not in ("even", "odd"):
                raise DomainError(f"two-photon sector needs parity even/odd, got {self.parity!r}")
            if self.n0 is not None:
                raise DomainError("two-photon sectors carry no n0")
        else:
            if self.parity is not None:
                raise DomainError("two-mode sectors carry no photon parity")
            if self.n0 is None or int(self.n0) != self.n0 or self.n0 < 0:
                raise DomainError(f"two-mode sector needs integer n0 >= 0, got {self.n0!r}")

    @classmethod
    def even(cls, branch="+"):
        return cls(ModelKind.TWO_PHOTON, "even", None, branch)

    @classmethod
    def odd(cls, branch="+"):
        return cls(ModelKind.TWO_PHOTON, "odd", None, branch)

    @classmethod
    def pair(cls, n0, branch="+"):
        return cls(ModelKind.TWO_MODE, None, int(n0), branch)

    @property
    def kappa(self) -> float:
        if self.kind is ModelKind.TWO_PHOTON:
            return 0.25 if self.parity == "even" else 0.75
        return (self.n0 + 1) / 2

    @property
    def start(self) -> int:
        """First chain index: 1 for the odd two-photon sector, else 0."""
        return 1 if self.parity == "odd" else 0

    def with_branch(self, branch: str) -> "SectorLabel":
        return replace(self, branch=branch)

    @property
    def parity_class(self) -> int:
        """Oracle parity class whose eigenvalues are the zeros of this branch.

        Two-photon classes are integers mod 4 mapping to {1, i, -1, -i};
        two-mode classes are mod 2 mapping to {1, -1}.
        """
        if self.kind is ModelKind.TWO_PHOTON:
            return self.start + (0 if self.branch == "+" else 2)
        return 0 if self.branch == "+" else 1

    def describe(self) -> str:
        if self.kind is ModelKind.TWO_PHOTON:
            return f"{self.parity}{self.branch}"
        return f"n0={self.n0}{self.branch}"


@dataclass(frozen=True)
class ModelParams:
    kind: ModelKind
    omega: float
    delta: float
    g: float
    lam: float
    sector: SectorLabel = None

    def __post_init__(self):
        kind = ModelKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        for name in ("omega", "delta", "g", "lam"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise DomainError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.lam < 0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")
        if self.sector is None:
            default = SectorLabel.even() if kind is ModelKind.TWO_PHOTON else SectorLabel.pair(0)
            object.__setattr__(self, "sector", default)
        elif self.sector.kind is not kind:
            raise DomainError("sector label belongs to the other model")

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=float(g))

    def with_sector(self, sector: SectorLabel) -> "ModelParams":
        return replace(self, sector=sector)

    @property
    def n0(self) -> int:
        return self.sector.n0 if self.sector.n0 is not None else 0


def two_photon(omega=1.0, delta=0.2, g=0.3, lam=0.25, parity="even", branch="+") -> ModelParams:
    return ModelParams(ModelKind.TWO_PHOTON, omega, delta, g, lam,
                       SectorLabel(ModelKind.TWO_PHOTON, parity, None, branch))


def two_mode(omega=1.0, delta=0.2, g=0.5, lam=0.5, n0=0, branch="+") -> ModelParams:
    return ModelParams(ModelKind.TWO_MODE, omega, delta, g, lam, SectorLabel.pair(n0, branch))


# --- rotations -------------------------------------------------------------

W_MATRIX = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)


def rotation(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class RotationFrames:
    """W, U and the back-map V with Psi = V^T Phi (V = U^T, i.e. Psi = U Phi)."""

    W: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @classmethod
    def from_beta(cls, beta: float) -> "RotationFrames":
        U = rotation(beta)
        return cls(W_MATRIX.copy(), U, U.T.copy())

    def is_orthogonal(self, tol=1e-14) -> bool:
        eye = np.eye(2)
        return all(np.allclose(M.T @ M, eye, atol=tol) for M in (self.W, self.U, self.V))


@dataclass(frozen=True)
class RotatedCouplings:
    p: float
    q: float
    r: float
    s: float
    t: float


def rotated_couplings(params: ModelParams, beta: float) -> RotatedCouplings:
    c2, s2 = math.cos(2 * beta), math.sin(2 * beta)
    cb2, sb2 = math.cos(beta) ** 2, math.sin(beta) ** 2
    lam, g = params.lam, params.g
    return RotatedCouplings(
        p=params.delta * c2,
        q=params.delta * s2,
        r=0.5 * s2 * (1 + lam) * g,
        s=(cb2 - lam * sb2) * g,
        t=(lam * cb2 - sb2) * g,
    )


# --- Bogolubov frame -------------------------------------------------------

def critical_coupling(params: ModelParams) -> float:
    return critical_coupling_value(params.kind, params.omega, params.lam)


def critical_coupling_value(kind, omega: float, lam: float) -> float:
    """c*omega/|1+lambda| without constructing a ModelParams."""
    if lam == -1.0:
        raise SingularAnisotropyError("lambda = -1 makes the critical coupling infinite")
    return ModelKind.parse(kind).c * omega / abs(1.0 + lam)


@dataclass(frozen=True)
class BogolubovFrame:
    """Squeezing amplitudes and the spin rotation angle at fixed parameters.

    ``eta`` is the squeeze ratio (zeta for the two-mode model) and
    ``eta_prime`` the pole spacing factor. ``x = v/u`` and ``v_over_g`` are
    kept separately so the g -> 0 limit stays exact.
    """

    u: float
    v: float
    eta: float
    beta: float
    eta_prime: float
    g_critical: float
    valid: bool
    v_over_g: float = field(default=0.0, repr=False)

    @property
    def x(self) -> float:
        return self.v / self.u

    @property
    def cos2beta(self) -> float:
        return math.cos(2 * self.beta)


def bogolubov_frame(params: ModelParams) -> BogolubovFrame:
    gc = critical_coupling(params)
    g, lam, w = params.g, params.lam, params.omega
    if not abs(g) < gc:
        raise ValidityError(g, gc)
    cw = params.kind.c * w
    y = (g / cw) ** 2
    den = 1.0 - (1.0 - lam) ** 2 * y
    eta = math.sqrt((1.0 - (1.0 + lam) ** 2 * y) / den)
    u = math.sqrt((1.0 + eta) / (2.0 * eta))
    # v^2 = (1 - eta)/(2 eta) rewritten so that v/g stays exact near g = 0;
    # v carries the sign of g
    v_over_g = math.sqrt(2.0 * lam / (cw * cw * den * (1.0 + eta) * eta))
    v = g * v_over_g
    cos2b = min(1.0, max(-1.0, (1.0 - lam) / (1.0 + lam) * eta))
    beta = 0.5 * math.acos(cos2b)
    return BogolubovFrame(u=u, v=v, eta=eta, beta=beta, eta_prime=eta * den,
                          g_critical=gc, valid=True, v_over_g=v_over_g)
