"""Eigenstates, spin entanglement and the near-critical scans."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientCutoffError, NotDegenerateError, OutOfDomainError
from .gfunction import pole_energies
from .model import ModelKind, ModelParams, SectorLabel, bogolubov_frame, critical_coupling, rotation
from .oracle import (build_hamiltonian, diagonalize, oracle_spectrum, parity_classes, parity_name,
                     two_mode_vacuum, alpha_fock, vacuum_state_alpha)
from .recurrence import ChainContext, pole_at

log = logging.getLogger(__name__)

JUMP_THRESHOLD = 0.05


@dataclass(frozen=True)
class SpinBosonState:
    """Spin-up and spin-down boson amplitudes.

    basis is "bareFock" (two-photon n), "pairLadder" (two-mode |n0+n, n>) or
    "alphaFock".
    """

    basis: str
    up: np.ndarray
    down: np.ndarray
    normalized: bool

    @property
    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.up) ** 2) + np.sum(np.abs(self.down) ** 2)))

    def interleaved(self) -> np.ndarray:
        """Vector in the oracle ordering 2n+s."""
        out = np.empty(2 * len(self.up), dtype=np.result_type(self.up, self.down))
        out[0::2] = self.up
        out[1::2] = self.down
        return out

    def normalize(self) -> "SpinBosonState":
        n = self.norm
        return SpinBosonState(self.basis, self.up / n, self.down / n, True)

    @classmethod
    def from_vector(cls, vec: np.ndarray, kind: ModelKind, normalized: bool = True) -> "SpinBosonState":
        basis = "bareFock" if kind is ModelKind.TWO_PHOTON else "pairLadder"
        return cls(basis, np.array(vec[0::2]), np.array(vec[1::2]), normalized)


@dataclass(frozen=True)
class ReducedSpinDensity:
    matrix: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, 1.0)


def reduced_spin_density(state: SpinBosonState, tol: float = 1e-12) -> ReducedSpinDensity:
    if not state.normalized or abs(state.norm - 1.0) > tol:
        raise DomainError(f"state must be normalized (norm {state.norm:.15g})")
    r11 = float(np.sum(np.abs(state.up) ** 2))
    r22 = float(np.sum(np.abs(state.down) ** 2))
    r12 = complex(np.sum(state.up * np.conj(state.down)))
    if r12.imag == 0.0:
        rho = np.array([[r11, r12.real], [r12.real, r22]])
    else:
        rho = np.array([[r11, r12], [np.conj(r12), r22]])
    return ReducedSpinDensity(rho)


def entanglement_entropy(rho: ReducedSpinDensity) -> float:
    """Base-2 von Neumann entropy, 0 log 0 = 0."""
    lam = rho.eigenvalues
    lam = lam[lam > 0]
    s = float(-np.sum(lam * np.log2(lam)))
    return min(1.0, max(0.0, s))


def photon_number_distribution(state: SpinBosonState) -> np.ndarray:
    if state.basis == "alphaFock":
        raise DomainError("photon distribution needs a bare-basis state")
    if not state.normalized:
        raise DomainError("state must be normalized")
    return np.abs(state.up) ** 2 + np.abs(state.down) ** 2


def participation_ratio(P: np.ndarray) -> float:
    return float(1.0 / np.sum(np.asarray(P) ** 2))


# --- degenerate states at Juddian points ------------------------------------

def _parity_phases(kind: ModelKind, n_trunc: int) -> np.ndarray:
    cls = parity_classes(kind, n_trunc)
    return (1j) ** cls if kind is ModelKind.TWO_PHOTON else (-1.0) ** cls


def bar_partner(state: SpinBosonState, kind: ModelKind) -> SpinBosonState:
    """Image under the parity operator: i^n on the boson combined with -sigma_z
    (two-photon), (-1)^n with -sigma_z (two-mode)."""
    n_trunc = len(state.up) - 1
    vec = _parity_phases(kind, n_trunc) * state.interleaved()
    return SpinBosonState(state.basis, vec[0::2], vec[1::2], state.normalized)


@dataclass(frozen=True)
class CrossingState:
    state: SpinBosonState
    E: float
    C: complex
    residual: float
    closed_form: SpinBosonState   # the unsymmetrized product state Psi


def _closed_form_psi(params: ModelParams, m: int, n_trunc: int) -> SpinBosonState:
    """Psi = U (tan 2beta |s>>, |s>>), proportional to (sin beta, cos beta) |s>>."""
    frame = bogolubov_frame(params)
    if params.kind is ModelKind.TWO_PHOTON:
        s_vec = vacuum_state_alpha(frame, n_trunc) if m == 0 else alpha_fock(frame, n_trunc, 1)
        basis = "bareFock"
    else:
        s_vec = two_mode_vacuum(frame, params.n0, n_trunc)
        basis = "pairLadder"
    phi = np.array([math.tan(2 * frame.beta), 1.0])
    spin = rotation(frame.beta) @ phi
    return SpinBosonState(basis, spin[0] * s_vec, spin[1] * s_vec, False).normalize()


def assemble_crossing_state(params: ModelParams, C: complex, m: int | None = None, n_trunc: int = 200,
                            residual_tol: float = 1e-7) -> CrossingState:
    """Parity-resolved eigenstate C Psi + bar(Psi) at a Juddian crossing.

    ``params`` must sit at the crossing; the eigen-residual against the
    oracle Hamiltonian is the acceptance test and a failure raises
    NotDegenerateError.
    """
    if m is None:
        m = params.sector.start
    allowed = ({1, -1} if params.kind is ModelKind.TWO_MODE or m % 2 == 0 else {1j, -1j})
    if C not in allowed:
        raise DomainError(f"C must be one of {sorted(allowed, key=str)} here, got {C!r}")
    if params.kind is ModelKind.TWO_PHOTON and m not in (0, 1):
        raise OutOfDomainError("closed-form crossing states exist for m = 0 and m = 1")
    if params.kind is ModelKind.TWO_MODE and m != 0:
        raise OutOfDomainError("the two-mode closed-form crossing state exists for m = 0")
    frame = bogolubov_frame(params)
    E = pole_at(params, frame, m)
    psi = _closed_form_psi(params, m, n_trunc)
    bar = bar_partner(psi, params.kind)
    vec = C * psi.interleaved() + bar.interleaved()
    vec = vec / np.linalg.norm(vec)
    H = build_hamiltonian(params, n_trunc).entries
    # the last few boson levels feel the cutoff; judge the residual away from it
    res_vec = H @ vec - E * vec
    residual = float(np.linalg.norm(res_vec[: 2 * (n_trunc - 3)]))
    if residual > residual_tol:
        raise NotDegenerateError(
            f"eigen-residual {residual:.3e} at E={E:.12g}; parameters are not at a crossing")
    state = SpinBosonState.from_vector(vec, params.kind)
    return CrossingState(state, E, C, residual, psi)


@dataclass(frozen=True)
class IsotropicReference:
    delta: float
    E: float
    K0: float
    L0: float


def isotropic_reference_point(omega: float, g: float) -> IsotropicReference:
    """First crossing of the isotropic two-photon model at fixed g.

    With lambda = 1 the pole at m = 2 turns removable when b_0 vanishes, i.e.
    Delta^2 = 2 omega^2 (3 eta^2 - 1); there K_0 = 1 and L_0 = d_0/f_0.
    """
    probe = ModelParams(ModelKind.TWO_PHOTON, omega, 0.0, g, 1.0, SectorLabel.even())
    eta = bogolubov_frame(probe).eta
    arg = 2 * (3 * eta * eta - 1)
    if arg <= 0:
        raise OutOfDomainError("no isotropic crossing of this kind for eta^2 <= 1/3")
    delta = omega * math.sqrt(arg)
    params = ModelParams(ModelKind.TWO_PHOTON, omega, delta, g, 1.0, SectorLabel.even())
    ctx = ChainContext.build(params)
    E = ctx.pole(2)
    d0, f0, _ = ctx.weights(E, 0)
    return IsotropicReference(delta, E, 1.0, d0 / f0)


# --- entropy sweeps ---------------------------------------------------------

@dataclass(frozen=True)
class EntropyRow:
    g: float
    level: int
    E: float
    S: float
    parity: str
    ambiguous: bool


@dataclass(frozen=True)
class EntropyJump:
    level: int
    g_lo: float
    g_hi: float
    S_lo: float
    S_hi: float
    parity_lo: str
    parity_hi: str


@dataclass
class EntropySweep:
    rows: list
    jumps: list = field(default_factory=list)
    n_trunc: int = 0


_PARITY_CLASSES = {"even": (0, 2), "odd": (1, 3)}


def _level_entropies(params: ModelParams, n_trunc: int, levels, parity: str | None = None) -> list:
    dec = diagonalize(build_hamiltonian(params, n_trunc))
    keep = np.arange(len(dec.eigenvalues))
    if parity is not None:
        keep = keep[np.isin(dec.parity_labels, _PARITY_CLASSES[parity])]
    ev = dec.eigenvalues[keep]
    out = []
    for lv in levels:
        col = keep[lv]
        st = SpinBosonState.from_vector(dec.eigenvectors[:, col], params.kind)
        S = entanglement_entropy(reduced_spin_density(st, tol=1e-10))
        gap = min(abs(ev[lv] - ev[k]) for k in (lv - 1, lv + 1) if 0 <= k < len(ev))
        out.append((float(ev[lv]), S, parity_name(params.kind, int(dec.parity_labels[col])), gap < 1e-8))
    return out


def entropy_sweep(family: ModelParams, g_grid, levels=(0,), n_trunc: int = 200,
                  threshold: float = JUMP_THRESHOLD, refine_tol: float = 1e-6,
                  check_stability: bool = True, parity: str | None = None) -> EntropySweep:
    """Spin entropy of oracle eigenstates along a coupling grid.

    Level 0 is the ground state, 1 the first excited. ``parity`` ("even" or
    "odd", two-photon only) restricts the levels to one Fock subspace. Every
    |dS| > threshold between neighbouring grid points is bisected in g down
    to refine_tol; ambiguous marks levels within 1e-8 of a neighbour.
    """
    if parity is not None and (family.kind is not ModelKind.TWO_PHOTON or parity not in _PARITY_CLASSES):
        raise DomainError(f"parity restriction {parity!r} needs the two-photon model and even/odd")
    g_grid = np.asarray(g_grid, dtype=float)
    if check_stability:
        g_top = float(g_grid[np.argmax(np.abs(g_grid))])
        p = family.with_g(g_top)
        a = oracle_spectrum(p, n_trunc).eigenvalues[: max(levels) + 2]
        b = oracle_spectrum(p, int(1.5 * n_trunc)).eigenvalues[: max(levels) + 2]
        shift = float(np.max(np.abs(a - b)))
        if shift > 1e-8:
            raise InsufficientCutoffError(shift, n_trunc)
    rows = []
    table = []
    for g in g_grid:
        vals = _level_entropies(family.with_g(g), n_trunc, levels, parity)
        table.append(vals)
        for lv, (E, S, par, amb) in zip(levels, vals):
            rows.append(EntropyRow(float(g), lv, E, S, par, amb))
    jumps = []
    for j, lv in enumerate(levels):
        for i in range(len(g_grid) - 1):
            s0, s1 = table[i][j][1], table[i + 1][j][1]
            if abs(s1 - s0) <= threshold:
                continue
            lo, hi = float(g_grid[i]), float(g_grid[i + 1])
            S_lo, S_hi = s0, s1
            p_lo, p_hi = table[i][j][2], table[i + 1][j][2]
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                _, S_mid, p_mid, _ = _level_entropies(family.with_g(mid), n_trunc, (lv,), parity)[0]
                if abs(S_mid - S_lo) <= abs(S_mid - S_hi):
                    lo, S_lo, p_lo = mid, S_mid, p_mid
                else:
                    hi, S_hi, p_hi = mid, S_mid, p_mid
            # a steep but smooth change shrinks with the bracket; a jump does not
            if abs(S_hi - S_lo) > threshold:
                jumps.append(EntropyJump(lv, lo, hi, S_lo, S_hi, p_lo, p_hi))
    return EntropySweep(rows, jumps, n_trunc)


# --- near-critical scans -----------------------------------------------------

@dataclass(frozen=True)
class CondensationRow:
    g: float
    eta: float
    poles: tuple
    pole_spread: float
    oracle_spread: float


def condensation_scan(family: ModelParams, g_grid, k: int = 5, n_trunc: int = 200) -> list[CondensationRow]:
    """eta, the first k poles and the oracle spread E_{k-1} - E_0 along g -> g_c.

    For the two-photon model the first k poles are merged over both parities.
    The oracle spread uses the full spectrum (all parity classes).
    """
    gc = critical_coupling(family)
    rows = []
    for g in np.asarray(g_grid, dtype=float):
        if abs(g) >= gc:
            raise OutOfDomainError(f"g={g} is not below g_c={gc}")
        p = family.with_g(g)
        frame = bogolubov_frame(p)
        if p.kind is ModelKind.TWO_PHOTON:
            poles = tuple(pole_at(p, frame, m) for m in range(k))
        else:
            poles = pole_energies(p, k, frame).energies
        ev = oracle_spectrum(p, n_trunc).eigenvalues
        rows.append(CondensationRow(float(g), frame.eta, poles, poles[-1] - poles[0],
                                    float(ev[k - 1] - ev[0])))
    return rows


@dataclass(frozen=True)
class SupercriticalReport:
    g: float
    n_trunc_list: tuple
    slopes: np.ndarray                 # (len(N), n_levels) dE/dg
    exponent: float                    # fit of log mean|slope| vs log N
    exponent_ground: float
    fit_residual: float
    ground_energies: tuple
    monotone: bool
    ground_entropy: float
    participation_ratio: float
    level_classes: tuple
    grouped: bool


def supercritical_scan(family: ModelParams, g: float, n_trunc_list=(200, 400, 600, 800, 1000),
                       n_levels: int = 12, dg: float = 1e-3) -> SupercriticalReport:
    """Truncation dependence of the level slopes beyond g_c.

    For each cutoff N the slopes dE/dg of the lowest levels come from a
    least-squares line through g - dg, g, g + dg; the exponent x is the slope
    of log mean|dE/dg| against log N. Entropy, participation ratio and the
    parity grouping refer to the first cutoff.
    """
    gc = critical_coupling(family)
    if not abs(g) > gc:
        raise OutOfDomainError(f"g={g} must exceed g_c={gc}")
    Ns = tuple(int(n) for n in n_trunc_list)
    gs = np.array([g - dg, g, g + dg])
    slopes = []
    grounds = []
    for N in Ns:
        E = np.array([oracle_spectrum(family.with_g(x), N).eigenvalues[:n_levels] for x in gs])
        slopes.append(np.polyfit(gs, E, 1)[0])
        grounds.append(float(E[1, 0]))
    slopes = np.array(slopes)
    logN = np.log(np.array(Ns, dtype=float))
    mean_abs = np.mean(np.abs(slopes), axis=1)
    coef, res, *_ = np.polyfit(logN, np.log(mean_abs), 1, full=True)
    x0 = np.polyfit(logN, np.log(np.abs(slopes[:, 0])), 1)[0]
    monotone = all(b <= a + 1e-12 for a, b in zip(grounds, grounds[1:]))
    if not monotone:
        log.warning("ground energy is not monotone in the cutoff: %s", grounds)
    p = family.with_g(g)
    dec = diagonalize(build_hamiltonian(p, Ns[0]))
    st = SpinBosonState.from_vector(dec.eigenvectors[:, 0], p.kind)
    S = entanglement_entropy(reduced_spin_density(st, tol=1e-10))
    pr = participation_ratio(photon_number_distribution(st))
    classes = tuple(int(c) for c in dec.parity_labels[:n_levels])
    n_cls = 4 if p.kind is ModelKind.TWO_PHOTON else 2
    grouped = all(len(set(classes[i:i + n_cls])) == n_cls for i in range(0, len(classes) - n_cls + 1, n_cls))
    return SupercriticalReport(g, Ns, slopes, float(coef[0]), float(x0),
                               float(res[0]) if len(res) else 0.0, tuple(grounds), monotone,
                               S, pr, classes, grouped)
