"""Coefficient chains K_m, L_m of the squeezed-vacuum ansatz at trial energy E.

Two evaluation routes are provided.

``printed_chain`` runs the three-term recurrence
    a_m K_{m+s} = b_m K_m + c_m K_{m-s}
literally. It is short-range only: K_m grows factorially and the weights carry
1/f_m, so it is used for the Juddian numerator and for cross-checks.

``build_chain`` is the production route. It works with the D-weighted
quantities Khat_m = K_m D_m and Lhat_m = L_m D_m and solves the two
coupled eigen-equation rows at each level as a 2x2 linear system for
(Lhat_m, Khat_{m+s}). The determinant of that system is linear in E and
vanishes only at the pole energies, so zeros of f_m are harmless and the
terms stay O(1) along the whole chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NearSingularFError, NonConvergenceError, OutOfDomainError, PoleProximityError
from .model import (BogolubovFrame, ModelKind, ModelParams, RotatedCouplings, SectorLabel,
                    bogolubov_frame, rotated_couplings)

EPS_F = 1e-10
EPS_A = 1e-10
DEFAULT_TOL = 1e-12
DEFAULT_MAX_M = 400


@dataclass(frozen=True)
class ChainContext:
    """Energy-independent constants shared by every chain at fixed parameters."""

    params: ModelParams
    frame: BogolubovFrame
    couplings: RotatedCouplings
    h: float       # 2r/eta, the pair-coupling weight of the lower block
    h_over_x: float
    g_over_x: float

    @classmethod
    def build(cls, params: ModelParams, frame: BogolubovFrame | None = None) -> "ChainContext":
        if params.lam == 0.0:
            raise OutOfDomainError(
                "lambda = 0 leaves no counter-rotating coupling; the squeezed frame is trivial "
                "and the G-function construction degenerates (use the oracle)")
        frame = frame or bogolubov_frame(params)
        rc = rotated_couplings(params, frame.beta)
        c = params.kind.c
        return cls(params=params, frame=frame, couplings=rc,
                   h=2.0 * rc.r / frame.eta,
                   h_over_x=2.0 * c * params.omega * frame.u ** 2,
                   g_over_x=frame.u / frame.v_over_g)

    @property
    def kind(self) -> ModelKind:
        return self.params.kind

    @property
    def step(self) -> int:
        return self.params.kind.step

    @property
    def start(self) -> int:
        return self.params.sector.start

    def weights(self, E: float, m: int):
        """(d_m, f_m, e_m) at energy E."""
        p, q, r = self.couplings.p, self.couplings.q, self.couplings.r
        w, lam, g, eta = self.params.omega, self.params.lam, self.params.g, self.frame.eta
        if self.kind is ModelKind.TWO_PHOTON:
            k = m + 0.5
            d = q + r * (1 - lam) * (2 * m + 1) * g / w
            f = w * eta * k - w / 2 + p - E
            e = w * (2 / eta - eta) * k - w / 2 - p - E
        else:
            k = self.params.n0 + 2 * m + 1
            d = q + r * (1 - lam) * k * g / (2 * w)
            f = w * eta * k - w + p - E
            e = w * (2 / eta - eta) * k - w - p - E
        return d, f, e

    def forward_factor(self, m: int) -> float:
        """P_m: the K_{m+s} coefficient produced by the lowering operator."""
        if self.kind is ModelKind.TWO_PHOTON:
            return (m + 2) * (m + 1)
        return (m + 1) * (self.params.n0 + m + 1)

    def backward_factor(self, m: int) -> float:
        """Q_m = P_{m-s}."""
        if self.kind is ModelKind.TWO_PHOTON:
            return m * (m - 1)
        return m * (self.params.n0 + m)

    def mu(self, m: int) -> float:
        """D_{m+s} / D_m = x * mu_m."""
        if self.kind is ModelKind.TWO_PHOTON:
            return m + 1 + self.start
        return self.params.n0 + m + 1

    def d_start(self) -> float:
        u = self.frame.u
        if self.kind is ModelKind.TWO_PHOTON:
            return u ** -0.5 if self.start == 0 else u ** -1.5
        return u ** -(self.params.n0 + 1)

    def pole(self, m: int) -> float:
        return pole_at(self.params, self.frame, m)


def pole_at(params: ModelParams, frame: BogolubovFrame, m: int) -> float:
    """Energy where the chain determinant at index m vanishes."""
    w, ep = params.omega, frame.eta_prime
    if params.kind is ModelKind.TWO_PHOTON:
        return w * ep * (m + 0.5) - w / 2
    return w * ep * (params.n0 + 2 * m + 1) - w


@dataclass(frozen=True)
class ChainCoefficients:
    m: int
    d_m: float
    f_m: float
    a_m: float
    b_m: float
    c_m: float


def chain_coefficients(params: ModelParams, frame: BogolubovFrame | None, E: float, m: int,
                       eps_f: float = EPS_F, context: ChainContext | None = None) -> ChainCoefficients:
    """Printed recurrence weights at index m.

    f_m and f_{m-s} appear as denominators; an f that is closer to zero than
    eps_f*omega raises NearSingularFError. f_{m-s} is only needed when its
    numerator is nonzero (m >= s).
    """
    ctx = context or ChainContext.build(params, frame)
    s = ctx.step
    if ctx.kind is ModelKind.TWO_PHOTON and (m - ctx.start) % 2:
        raise OutOfDomainError(f"index {m} is not on the {params.sector.parity} chain")
    lam, g, h = params.lam, params.g, ctx.h
    eps = eps_f * params.omega
    d, f, e = ctx.weights(E, m)
    if abs(f) < eps:
        raise NearSingularFError(m, f)
    P, Q = ctx.forward_factor(m), ctx.backward_factor(m)
    a = (-d * (1 - lam) * g / f + h) * P
    b = -d * d / f + e
    c = -h
    if m - s >= ctx.start:
        d_prev, f_prev, _ = ctx.weights(E, m - s)
        if abs(f_prev) < eps:
            raise NearSingularFError(m - s, f_prev)
        b -= (1 - lam) ** 2 * g * g * Q / f_prev
        c += (1 - lam) * g * d_prev / f_prev
    return ChainCoefficients(m=m, d_m=d, f_m=f, a_m=a, b_m=b, c_m=c)


def printed_chain(params: ModelParams, E: float, count: int,
                  context: ChainContext | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled K from the literal three-term recurrence, K_start = 1.

    Returns (indices, K) with ``count`` entries. Intended for short chains.
    """
    ctx = context or ChainContext.build(params)
    s, m = ctx.step, ctx.start
    idx, K = [m], [1.0]
    prev = 0.0
    for _ in range(count - 1):
        cc = chain_coefficients(params, ctx.frame, E, m, context=ctx)
        if abs(cc.a_m) < EPS_A * params.omega:
            raise PoleProximityError(E, ctx.pole(m), abs(cc.a_m))
        nxt = (cc.b_m * K[-1] + cc.c_m * prev) / cc.a_m
        prev = K[-1]
        K.append(nxt)
        m += s
        idx.append(m)
    return np.array(idx), np.array(K)


def juddian_numerator(params: ModelParams, m: int, E: float | None = None,
                      context: ChainContext | None = None) -> float:
    """N_m = b_m K_m + c_m K_{m-s}, by default evaluated at the m-th pole.

    At a pole a_m vanishes, so K_{m+s} is finite only if N_m does too.
    """
    ctx = context or ChainContext.build(params)
    if E is None:
        E = ctx.pole(m)
    n_before = (m - ctx.start) // ctx.step
    idx, K = printed_chain(params, E, n_before + 1, context=ctx)
    cc = chain_coefficients(params, ctx.frame, E, m, context=ctx)
    k_prev = K[-2] if len(K) > 1 else 0.0
    return cc.b_m * K[-1] + cc.c_m * k_prev


@dataclass(frozen=True)
class CoefficientChain:
    """Chain at energy E.

    ``K_scaled``/``L_scaled`` hold K_m D_m and L_m D_m, the quantities the
    G-function sums. ``K``/``L`` are the raw coefficients with K_start = 1;
    they are NaN where D_m vanishes (g = 0).
    """

    E: float
    indices: np.ndarray
    K_scaled: np.ndarray
    L_scaled: np.ndarray
    D: np.ndarray
    truncation: int
    converged: bool
    tail_magnitude: float

    @property
    def K(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.D != 0, self.K_scaled / self.D, np.nan)

    @property
    def L(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.D != 0, self.L_scaled / self.D, np.nan)


def _run_chain(ctx: ChainContext, E: float, max_m: int, tol: float, eps_a: float):
    """Core loop. Returns (indices, Khat, Lhat, D, converged, tail, steps)."""
    params, frame = ctx.params, ctx.frame
    s, m = ctx.step, ctx.start
    lam, g = params.lam, params.g
    oml = 1.0 - lam
    x, h, hx, gx = frame.x, ctx.h, ctx.h_over_x, ctx.g_over_x
    eps = eps_a * params.omega
    two_photon = ctx.kind is ModelKind.TWO_PHOTON
    start, n0 = ctx.start, params.n0

    d_m = ctx.d_start()
    k_cur, k_prev, l_prev = d_m, 0.0, 0.0
    idx, kh, lh, dd = [], [], [], []
    acc = 0.0
    small = 0
    converged = False
    tail = math.inf
    for _ in range(max_m):
        d, f, e = ctx.weights(E, m)
        if two_photon:
            mu = m + 1 + start
            fwd = (m + 2) * (m + 1) / mu
            back = m - 1 + start
        else:
            fwd = m + 1
            back = n0 + m
        a12 = oml * gx * fwd
        a22 = -hx * fwd
        det = f * a22 + a12 * d
        if abs(det) < eps * hx * fwd:
            raise PoleProximityError(E, ctx.pole(m), abs(det / (hx * fwd)))
        bk = back * x
        r1 = d * k_cur
        r2 = -oml * g * bk * l_prev - e * k_cur + h * bk * k_prev
        l_cur = (r1 * a22 - a12 * r2) / det
        k_next = (f * r2 + d * r1) / det
        idx.append(m)
        kh.append(k_cur)
        lh.append(l_cur)
        dd.append(d_m)
        mag = abs(k_cur) + abs(l_cur)
        acc += mag
        tail = mag
        if mag < tol * acc:
            small += 1
            if small >= 4:
                converged = True
                break
        else:
            small = 0
        d_m = d_m * x * (m + 1 + start if two_photon else n0 + m + 1)
        k_prev, k_cur, l_prev = k_cur, k_next, l_cur
        m += s
    return idx, kh, lh, dd, converged, tail


def build_chain(params: ModelParams, E: float, sector: SectorLabel | None = None,
                max_m: int = DEFAULT_MAX_M, tol: float = DEFAULT_TOL, eps_a: float = EPS_A,
                context: ChainContext | None = None, raise_on_failure: bool = True) -> CoefficientChain:
    """Build the D-weighted chain at energy E.

    Truncation stops after four consecutive levels whose |Khat|+|Lhat| falls
    below tol times the running sum of magnitudes.
    """
    if sector is not None and sector != params.sector:
        params = params.with_sector(sector)
        context = None
    ctx = context or ChainContext.build(params)
    idx, kh, lh, dd, converged, tail = _run_chain(ctx, E, max_m, tol, eps_a)
    if not converged and raise_on_failure:
        raise NonConvergenceError(len(idx), tail)
    return CoefficientChain(E=float(E), indices=np.array(idx), K_scaled=np.array(kh),
                            L_scaled=np.array(lh), D=np.array(dd), truncation=idx[-1],
                            converged=converged, tail_magnitude=tail)
