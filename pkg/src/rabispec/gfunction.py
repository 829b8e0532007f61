"""D_m weights, pole energies and the branch functions G_+ and G_-."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, PoleProximityError
from .model import BogolubovFrame, ModelKind, ModelParams, SectorLabel, bogolubov_frame
from .recurrence import DEFAULT_MAX_M, DEFAULT_TOL, EPS_A, ChainContext, _run_chain

EPS_POLE = 1e-6


def log_d_coefficient(frame: BogolubovFrame, m: int, sector: SectorLabel) -> tuple[float, float]:
    """(log|D_m|, sign D_m). log|D_m| is -inf when D_m = 0."""
    u, x = frame.u, frame.x
    if sector.kind is ModelKind.TWO_PHOTON:
        if (m - sector.start) % 2:
            return -math.inf, 0.0
        k = m // 2
        base = -0.5 * math.log(u) if sector.start == 0 else -1.5 * math.log(u)
        # (2k)!/(2^k k!) and (2k+1)!/(2^k k!)
        logfac = math.lgamma(m + 1) - k * math.log(2.0) - math.lgamma(k + 1)
        power = k
    else:
        n0 = sector.n0
        base = -(n0 + 1) * math.log(u)
        logfac = math.lgamma(n0 + m + 1) - math.lgamma(n0 + 1)
        power = m
    if power == 0:
        return base + logfac, 1.0
    if x == 0.0:
        return -math.inf, 0.0
    sign = -1.0 if (x < 0 and power % 2) else 1.0
    return base + logfac + power * math.log(abs(x)), sign


def d_coefficient(frame: BogolubovFrame, m: int, sector: SectorLabel) -> float:
    """D_m as a float; overflows to inf for very large m (use the log form there)."""
    logd, sign = log_d_coefficient(frame, m, sector)
    if sign == 0.0:
        return 0.0
    try:
        return sign * math.exp(logd)
    except OverflowError:
        return sign * math.inf


@dataclass(frozen=True)
class PoleSet:
    sector: SectorLabel
    energies: tuple
    eta_prime: float


def pole_energies(params: ModelParams, count: int, frame: BogolubovFrame | None = None) -> PoleSet:
    frame = frame or bogolubov_frame(params)
    w, ep = params.omega, frame.eta_prime
    sec = params.sector
    if params.kind is ModelKind.TWO_PHOTON:
        ms = range(sec.start, sec.start + 2 * count, 2)
        energies = tuple(w * ep * (m + 0.5) - w / 2 for m in ms)
    else:
        energies = tuple(w * ep * (sec.n0 + 2 * k + 1) - w for k in range(count))
    return PoleSet(sector=sec, energies=energies, eta_prime=ep)


def nearest_pole(params: ModelParams, E: float, frame: BogolubovFrame) -> tuple[int, float]:
    """(chain index, energy) of the pole closest to E."""
    w, ep = params.omega, frame.eta_prime
    if params.kind is ModelKind.TWO_PHOTON:
        start = params.sector.start
        k = max(0, round(((E + w / 2) / (w * ep) - 0.5 - start) / 2))
        m = start + 2 * k
        return m, w * ep * (m + 0.5) - w / 2
    n0 = params.n0
    k = max(0, round(((E + w) / (w * ep) - 1 - n0) / 2))
    return k, w * ep * (n0 + 2 * k + 1) - w


@dataclass(frozen=True)
class GSample:
    E: float
    g_plus: float
    g_minus: float
    nearest_pole_distance: float
    converged: bool
    steps: int = 0
    tail: float = 0.0

    def branch(self, b: str) -> float:
        return self.g_plus if b == "+" else self.g_minus


def g_value(params: ModelParams, E: float, eps_pole: float = EPS_POLE, max_m: int = DEFAULT_MAX_M,
            tol: float = DEFAULT_TOL, d_scale: float = 1.0,
            context: ChainContext | None = None) -> GSample:
    """Evaluate both branches from one chain.

    Samples within eps_pole*omega of a pole, or whose chain fails to
    converge, come back with converged=False and NaN values.
    """
    ctx = context or ChainContext.build(params)
    _, pole = nearest_pole(params, E, ctx.frame)
    dist = abs(E - pole)
    if dist < eps_pole * params.omega:
        return GSample(E, math.nan, math.nan, dist, False)
    try:
        idx, kh, lh, dd, converged, tail = _run_chain(ctx, E, max_m, tol, EPS_A)
    except PoleProximityError:
        return GSample(E, math.nan, math.nan, dist, False)
    if not converged:
        return GSample(E, math.nan, math.nan, dist, False, len(idx), tail)
    cb, sb = math.cos(ctx.frame.beta), math.sin(ctx.frame.beta)
    gp = math.fsum(-cb * l + sb * k for k, l in zip(kh, lh)) * d_scale
    gm = math.fsum(sb * l + cb * k for k, l in zip(kh, lh)) * d_scale
    return GSample(E, gp, gm, dist, True, len(idx), tail)


def g_branch(params: ModelParams, E: float, branch: str, context: ChainContext | None = None,
             **opts) -> float:
    """One branch value; raises instead of returning NaN."""
    s = g_value(params, E, context=context, **opts)
    if not s.converged:
        if s.steps:
            raise NonConvergenceError(s.steps, s.tail)
        raise PoleProximityError(E, E, s.nearest_pole_distance)
    return s.branch(branch)


def g_curve(params: ModelParams, energies, **opts) -> list[GSample]:
    ctx = ChainContext.build(params)
    return [g_value(params, float(E), context=ctx, **opts) for E in np.asarray(energies, dtype=float)]


def g_values(params: ModelParams, energies, eps_pole: float = EPS_POLE, max_m: int = DEFAULT_MAX_M,
             tol: float = DEFAULT_TOL, context: ChainContext | None = None):
    """Vectorized G_+ and G_- on an energy grid.

    Runs one chain per energy in lockstep with numpy arrays; each element
    stops accumulating once it meets the same convergence rule as
    ``build_chain``. Sums are Kahan-compensated. Returns
    (g_plus, g_minus, ok) with NaN where ``ok`` is False.
    """
    ctx = context or ChainContext.build(params)
    E = np.asarray(energies, dtype=float)
    frame = ctx.frame
    w, lam, g = params.omega, params.lam, params.g
    oml = 1.0 - lam
    x, h, hx, gx = frame.x, ctx.h, ctx.h_over_x, ctx.g_over_x
    cb, sb = math.cos(frame.beta), math.sin(frame.beta)
    two_photon = ctx.kind is ModelKind.TWO_PHOTON
    start, n0, s = ctx.start, params.n0, ctx.step

    poles = np.array([nearest_pole(params, e, frame)[1] for e in E]) if E.size else E
    ok = np.abs(E - poles) >= eps_pole * w
    active = ok.copy()
    n = E.size
    k_cur = np.full(n, ctx.d_start())
    k_prev = np.zeros(n)
    l_prev = np.zeros(n)
    sp, cp = np.zeros(n), np.zeros(n)
    sm, cm = np.zeros(n), np.zeros(n)
    acc = np.zeros(n)
    small = np.zeros(n, dtype=int)
    m = start
    with np.errstate(all="ignore"):
        for _ in range(max_m):
            if not active.any():
                break
            d, f, e = ctx.weights(E, m)
            if two_photon:
                fwd = (m + 2) * (m + 1) / (m + 1 + start)
                back = m - 1 + start
            else:
                fwd = m + 1
                back = n0 + m
            a12 = oml * gx * fwd
            a22 = -hx * fwd
            det = f * a22 + a12 * d
            bad = np.abs(det) < EPS_A * w * hx * fwd
            if bad.any():
                ok &= ~(bad & active)
                active &= ~bad
            bk = back * x
            r1 = d * k_cur
            r2 = -oml * g * bk * l_prev - e * k_cur + h * bk * k_prev
            l_cur = (r1 * a22 - a12 * r2) / det
            k_next = (f * r2 + d * r1) / det
            for term, tot, comp in ((-cb * l_cur + sb * k_cur, sp, cp), (sb * l_cur + cb * k_cur, sm, cm)):
                y = np.where(active, term, 0.0) - comp
                t = tot + y
                comp[:] = (t - tot) - y
                tot[:] = t
            mag = np.abs(k_cur) + np.abs(l_cur)
            acc += np.where(active, mag, 0.0)
            hit = mag < tol * acc
            small = np.where(hit, small + 1, 0)
            active &= ~(small >= 4)
            k_prev, k_cur, l_prev = k_cur, k_next, l_cur
            m += s
    ok &= ~active   # still running at max_m: not converged
    ok &= np.isfinite(sp) & np.isfinite(sm)
    return np.where(ok, sp, np.nan), np.where(ok, sm, np.nan), ok
