"""Root finding on G, Juddian points, coupling sweeps and the RWA estimate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoSolutionError, OutOfDomainError
from .gfunction import EPS_POLE, g_value, g_values
from .model import (ModelKind, ModelParams, SectorLabel, bogolubov_frame, critical_coupling,
                    critical_coupling_value)
from .oracle import oracle_spectrum
from .recurrence import ChainContext, juddian_numerator, pole_at

log = logging.getLogger(__name__)

ROOT_TOL = 1e-10
DEDUP_TOL = 1e-8
SAMPLES = 200
INSURANCE_NTRUNC = 300
NEAR_POLE_BAND = 1e-4


@dataclass(frozen=True)
class RootRecord:
    E: float
    branch: str
    sector: SectorLabel
    bracket: tuple
    residual: float
    method: str = "bisection"


@dataclass(frozen=True)
class JuddianPoint:
    m: int
    g_star: float
    E_star: float
    kind: str
    sector: SectorLabel


def _pole_list(ctx: ChainContext, e_max: float) -> list[float]:
    poles = []
    m = ctx.start
    if ctx.frame.eta_prime <= 0:
        return poles
    while True:
        p = ctx.pole(m)
        poles.append(p)
        if p > e_max:
            break
        m += ctx.step
    return poles


def _bisect(fn, lo, hi, flo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if not math.isfinite(fm):
            break
        if fm == 0.0:
            return mid, mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def _scan_branch_roots(params, ctx, intervals, samples, tol, eps_pole):
    found = {"+": [], "-": []}
    for lo, hi in intervals:
        grid = np.linspace(lo, hi, samples)
        gp, gm, ok = g_values(params, grid, eps_pole=eps_pole, context=ctx)
        if not ok.all():
            log.warning("G not available at %d of %d samples in [%.6g, %.6g]; roots may be missed",
                        int((~ok).sum()), samples, lo, hi)
        for branch, vals in (("+", gp), ("-", gm)):
            idx = np.flatnonzero(ok)
            for i0, i1 in zip(idx[:-1], idx[1:]):
                v0, v1 = vals[i0], vals[i1]
                if v0 == 0.0:
                    found[branch].append((grid[i0], grid[i0], grid[i0], "bisection"))
                    continue
                if v0 * v1 >= 0:
                    continue

                def fn(E, b=branch):
                    return g_value(params, E, eps_pole=0.0, context=ctx).branch(b)

                E, a, b = _bisect(fn, grid[i0], grid[i1], v0, tol)
                found[branch].append((E, a, b, "bisection"))
    return found


def _near_pole_roots(params, ctx, poles, window, eps_pole, tol):
    """Roots within a narrow band around each pole.

    (E - p) G(E) is regular at the pole p, so its zeros there are eigenvalues
    the sampled scan cannot see: roots inside the eps_pole margin close to a
    Juddian coupling, and at the Juddian coupling itself the pole energy,
    where the singularity cancels and G stays finite.
    """
    out = {"+": [], "-": []}
    w = params.omega
    band = NEAR_POLE_BAND * w

    def reg(E, b, p):
        s = g_value(params, E, eps_pole=0.0, context=ctx)
        return (E - p) * s.branch(b) if s.converged else math.nan

    for p in poles:
        if not window[0] < p < window[1]:
            continue
        # asymmetric so that no bisection midpoint lands on p itself
        lo, hi = max(window[0], p - band), min(window[1], p + 1.37 * band)
        for b in "+-":
            flo, fhi = reg(lo, b, p), reg(hi, b, p)
            if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0:
                continue
            # bisection stops by itself once the chain refuses E this close to p
            E, a, c = _bisect(lambda E: reg(E, b, p), lo, hi, flo, tol)
            method = "removable-pole" if c - a > tol else "bisection"
            out[b].append((p if method == "removable-pole" else E, a, c, method))
    return out


def find_roots(params: ModelParams, window: tuple, tol: float = ROOT_TOL, samples: int = SAMPLES,
               eps_pole: float = EPS_POLE, insurance_ntrunc: int | None = INSURANCE_NTRUNC,
               branches: str = "+-") -> list[RootRecord]:
    """Zeros of G_+ and G_- in the window for the sector in ``params``.

    Every inter-pole interval meeting the window is sampled on a uniform grid
    that stops eps_pole short of each pole; sign changes are bisected to
    ``tol``. When ``insurance_ntrunc`` is set, the root count per branch is
    compared with the oracle and a mismatch triggers one 4x refinement.
    """
    e_min, e_max = float(window[0]), float(window[1])
    if not (math.isfinite(e_min) and math.isfinite(e_max)) or e_max <= e_min:
        raise OutOfDomainError(f"bad energy window {window!r}")
    ctx = ChainContext.build(params)
    w = params.omega
    tol_abs = tol * w
    poles = _pole_list(ctx, e_max)
    edges = [e_min] + [p for p in poles if e_min < p < e_max] + [e_max]
    margin = 2 * eps_pole * w

    def intervals_for():
        out = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            lo2 = lo + margin if lo in poles else lo
            hi2 = hi - margin if hi in poles else hi
            if hi2 > lo2:
                out.append((lo2, hi2))
        return out

    def collect(n_samples):
        found = _scan_branch_roots(params, ctx, intervals_for(), n_samples, tol_abs, eps_pole)
        extra = _near_pole_roots(params, ctx, poles, (e_min, e_max), eps_pole, tol_abs)
        records = []
        for b in branches:
            items = sorted(found[b] + extra[b])
            kept = []
            for E, lo, hi, method in items:
                if kept and abs(E - kept[-1][0]) < DEDUP_TOL * w:
                    continue
                kept.append((E, lo, hi, method))
            sec = params.sector.with_branch(b)
            for E, lo, hi, method in kept:
                s = g_value(params, E, eps_pole=0.0, context=ctx)
                res = abs(s.branch(b)) if s.converged else math.nan
                records.append(RootRecord(E, b, sec, (lo, hi), res, method))
        return records

    records = collect(samples)
    if insurance_ntrunc:
        expected = _oracle_counts(params, (e_min, e_max), insurance_ntrunc)
        got = {b: sum(1 for r in records if r.branch == b) for b in branches}
        if any(got[b] != expected[b] for b in branches):
            records = collect(4 * samples)
            got = {b: sum(1 for r in records if r.branch == b) for b in branches}
            if any(got[b] != expected[b] for b in branches):
                log.warning("root count %s differs from oracle count %s in window [%g, %g] (%s)",
                            got, expected, e_min, e_max, params.sector.describe())
    return sorted(records, key=lambda r: (r.E, r.branch))


def _oracle_counts(params: ModelParams, window, n_trunc) -> dict:
    dec = oracle_spectrum(params, n_trunc)
    out = {}
    for b in "+-":
        c = params.sector.with_branch(b).parity_class
        ev = dec.by_class(c)
        out[b] = int(np.sum((ev > window[0]) & (ev < window[1])))
    return out


def default_window(params: ModelParams, n_levels: int) -> tuple[float, float]:
    """[-omega - |Delta|, omega eta' (2 nLevels + 1) + |Delta|]."""
    frame = bogolubov_frame(params)
    w, d = params.omega, abs(params.delta)
    return (-w - d, w * frame.eta_prime * (2 * n_levels + 1) + d)


# --- Juddian points ---------------------------------------------------------

def juddian_analytic(kind, omega: float, delta: float, lam: float, index: int,
                     n0: int = 0) -> JuddianPoint:
    kind = ModelKind.parse(kind)
    one_m = 1.0 - lam * lam
    if lam == 1.0 and delta != 0.0:
        raise NoSolutionError("the isotropic model has no closed-form crossing with Delta != 0")
    if kind is ModelKind.TWO_PHOTON:
        if index not in (0, 1):
            raise OutOfDomainError("closed forms exist for m = 0 and m = 1 only")
        g2 = 2 * omega * delta / ((2 * index + 1) * one_m)
        sector = SectorLabel.even() if index == 0 else SectorLabel.odd()
    else:
        if index != 0:
            raise OutOfDomainError("the two-mode closed form exists for m = 0 only")
        g2 = 4 * delta * omega / ((n0 + 1) * one_m)
        sector = SectorLabel.pair(n0)
    if g2 < 0:
        raise NoSolutionError(f"no real coupling solves the crossing condition (g^2 = {g2:.6g})")
    g_star = math.sqrt(g2)
    gc = critical_coupling_value(kind, omega, lam)
    if g_star >= gc:
        raise OutOfDomainError(f"g* = {g_star:.10g} is not below g_c = {gc:.10g}")
    params = ModelParams(kind, omega, delta, g_star, lam, sector)
    return JuddianPoint(index, g_star, pole_at(params, bogolubov_frame(params), index), "analytic", sector)


def juddian_numeric(family: ModelParams, m: int, g_range: tuple, samples: int = 200,
                    g_tol: float = 1e-9) -> list[JuddianPoint]:
    """Couplings where the m-th pole becomes removable.

    Scans N_m(E_pole(g), g) over g, bisects each sign change in g and keeps
    only brackets where |N_m| actually shrinks (sign flips through a pole of
    N_m itself are discarded).
    """
    gc = critical_coupling(family)
    lo, hi = float(g_range[0]), float(g_range[1])
    if not (0 <= lo < hi) or hi >= gc:
        raise OutOfDomainError(f"gRange {g_range!r} must lie inside [0, g_c={gc:.10g})")
    if family.kind is ModelKind.TWO_PHOTON:
        sector = SectorLabel.even() if m % 2 == 0 else SectorLabel.odd()
    else:
        sector = family.sector.with_branch("+")
    fam = family.with_sector(sector)
    start = sector.start
    if (m - start) % fam.kind.step:
        raise OutOfDomainError(f"index {m} is not on a chain")

    def numer(g):
        if g == 0.0:
            return math.nan
        return juddian_numerator(fam.with_g(g), m)

    grid = np.linspace(lo, hi, samples)
    vals = [numer(g) for g in grid]
    out = []
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)) or a * b > 0:
            continue
        gs, glo, ghi = _bisect(numer, grid[i], grid[i + 1], a, g_tol)
        if abs(numer(gs)) > min(abs(a), abs(b)):
            continue
        p = fam.with_g(gs)
        E = ChainContext.build(p).pole(m)
        out.append(JuddianPoint(m, gs, E, "numeric", sector))
    return out


# --- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class Level:
    g: float
    level_index: int
    branch: str
    sector: str
    E: float
    source: str


@dataclass(frozen=True)
class Crossing:
    g: float
    E: float
    sector: str
    levels: tuple           # (rank on the + branch, rank on the - branch)
    bracket: tuple


@dataclass
class SweepResult:
    g_grid: np.ndarray
    per_g: list
    crossings: list = field(default_factory=list)


def _sectors(family: ModelParams) -> list[SectorLabel]:
    if family.kind is ModelKind.TWO_PHOTON:
        return [SectorLabel.even(), SectorLabel.odd()]
    return [family.sector.with_branch("+")]


def sector_levels(params: ModelParams, n_levels: int, window=None, insurance_ntrunc=None) -> dict:
    """Lowest n_levels roots of each branch for the sector in ``params``."""
    window = window or default_window(params, n_levels)
    roots = find_roots(params, window, insurance_ntrunc=insurance_ntrunc)
    return {b: [r.E for r in roots if r.branch == b][:n_levels] for b in "+-"}


_ORACLE_CLASS = {
    ModelKind.TWO_PHOTON: {0: ("even", "+"), 2: ("even", "-"), 1: ("odd", "+"), 3: ("odd", "-")},
    ModelKind.TWO_MODE: {0: (None, "+"), 1: (None, "-")},
}


def _sector_name(sec: SectorLabel) -> str:
    return sec.parity if sec.kind is ModelKind.TWO_PHOTON else f"n0={sec.n0}"


def oracle_levels(params: ModelParams, n_levels: int, n_trunc: int) -> list[Level]:
    dec = oracle_spectrum(params, n_trunc)
    out = []
    for c, (par, b) in _ORACLE_CLASS[params.kind].items():
        sec = SectorLabel(params.kind, par, None if par else params.n0, b)
        for k, E in enumerate(dec.by_class(c)[:n_levels]):
            out.append(Level(params.g, k, b, _sector_name(sec), float(E), "oracle"))
    return sorted(out, key=lambda L: (L.E, L.sector, L.branch))


def _order_labels(levels: dict, depth: int) -> list[str]:
    merged = sorted([(E, "+") for E in levels["+"]] + [(E, "-") for E in levels["-"]])
    return [b for _, b in merged[:depth]]


def _levels_at(task):
    """Worker body for one grid point: (g, {sector name: levels} or None, rows)."""
    family, g, n_levels, window, oracle_ntrunc, insurance_ntrunc, gc = task
    p = family.with_g(g)
    if abs(g) >= gc:
        return None, oracle_levels(p, n_levels, oracle_ntrunc)
    rows, per_sector = [], {}
    for sec in _sectors(family):
        lv = sector_levels(p.with_sector(sec), n_levels, window, insurance_ntrunc)
        per_sector[_sector_name(sec)] = lv
        for b in "+-":
            for k, E in enumerate(lv[b]):
                rows.append(Level(float(g), k, b, _sector_name(sec), E, "exact"))
    return per_sector, sorted(rows, key=lambda L: (L.E, L.sector, L.branch))


def _ordered_map(fn, tasks, workers):
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def sweep_spectrum(family: ModelParams, g_grid, n_levels: int, window=None,
                   oracle_ntrunc: int = INSURANCE_NTRUNC, refine_tol: float = 1e-7,
                   insurance_ntrunc=None, workers: int = 1) -> SweepResult:
    """Lowest n_levels per branch and sector over a coupling grid.

    A change in the +/- label sequence of the merged, sorted levels between
    adjacent grid points marks a crossing, which is then refined by bisection
    in g on the difference of the two swapped levels. Grid points at or
    beyond g_c get oracle levels instead. ``workers`` > 1 spreads grid points
    over processes; results keep grid order.
    """
    g_grid = np.asarray(g_grid, dtype=float)
    gc = critical_coupling(family)
    for g in g_grid:
        if abs(g) >= gc:
            log.warning("g=%.6g >= g_c=%.6g: oracle-only levels", g, gc)
    tasks = [(family, float(g), n_levels, window, oracle_ntrunc, insurance_ntrunc, gc) for g in g_grid]
    results = _ordered_map(_levels_at, tasks, workers)
    per_g = [rows for _, rows in results]
    by_sector = {_sector_name(s): [] for s in _sectors(family)}
    for per_sector, _ in results:
        for name in by_sector:
            by_sector[name].append(None if per_sector is None else per_sector[name])

    crossings = []
    for sec in _sectors(family):
        name = _sector_name(sec)
        series = by_sector[name]
        for i in range(len(g_grid) - 1):
            a, b = series[i], series[i + 1]
            if a is None or b is None:
                continue
            depth = min(len(a["+"]), len(a["-"]), len(b["+"]), len(b["-"]))
            la, lb = _order_labels(a, 2 * depth), _order_labels(b, 2 * depth)
            for pos in range(min(len(la), len(lb)) - 1):
                if la[pos] != lb[pos]:
                    kp = la[:pos].count("+")
                    km = la[:pos].count("-")
                    cr = _refine_crossing(family.with_sector(sec), n_levels, window,
                                          g_grid[i], g_grid[i + 1], kp, km, refine_tol)
                    if cr is not None:
                        crossings.append(cr)
                    break
    crossings.sort(key=lambda c: (c.g, c.E))
    return SweepResult(g_grid, per_g, crossings)


def _refine_crossing(family, n_levels, window, g_lo, g_hi, kp, km, tol):
    def diff(g):
        lv = sector_levels(family.with_g(g), n_levels, window)
        if len(lv["+"]) <= kp or len(lv["-"]) <= km:
            return math.nan, math.nan
        return lv["+"][kp] - lv["-"][km], 0.5 * (lv["+"][kp] + lv["-"][km])

    d_lo, e_lo = diff(g_lo)
    d_hi, e_hi = diff(g_hi)
    if not (math.isfinite(d_lo) and math.isfinite(d_hi)) or d_lo * d_hi > 0:
        return None
    energy = 0.5 * (e_lo + e_hi)
    while g_hi - g_lo > tol:
        mid = 0.5 * (g_lo + g_hi)
        d_mid, e_mid = diff(mid)
        if not math.isfinite(d_mid):
            # a root fell inside the pole margin: the bracket is already tight
            break
        energy = e_mid
        if (d_mid > 0) == (d_lo > 0):
            g_lo, d_lo = mid, d_mid
        else:
            g_hi = mid
    return Crossing(0.5 * (g_lo + g_hi), energy, _sector_name(family.sector), (kp, km), (g_lo, g_hi))


def rwa_ground_estimate(n: int, params: ModelParams) -> float:
    if n < 0:
        raise OutOfDomainError("n must be non-negative")
    w, d, g = params.omega, params.delta, params.g
    return (n + 1) * w / 2 - math.sqrt((w - d) ** 2 + g * g * (n + 1) * (n + 2))
