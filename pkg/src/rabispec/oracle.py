"""Truncated Fock-space oracle.

The bare Hamiltonian is built directly in a product basis, index 2n+s with
boson index n major and spin s minor (s=0 spin up, s=1 spin down). For the
two-mode model n labels the ladder state |n0+n, n>. Nothing here uses the
squeezed frame except ``bogolubov_conjugation_check`` and the vacuum
converters, which construct it numerically from truncated ladder matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import EigenSolverError, FormulaMismatchError, InsufficientCutoffError, OutOfDomainError
from .model import BogolubovFrame, ModelKind, ModelParams, bogolubov_frame, rotated_couplings, rotation

DIM_CAP = 4096
PARITY_NAMES = {ModelKind.TWO_PHOTON: ("+1", "+i", "-1", "-i"), ModelKind.TWO_MODE: ("+1", "-1")}


@dataclass(frozen=True)
class TruncatedHamiltonian:
    kind: ModelKind
    n_trunc: int
    dim: int
    entries: np.ndarray
    params: ModelParams
    basis: str = "index 2n+s: boson n major, spin s minor (0 up, 1 down)"


def build_hamiltonian(params: ModelParams, n_trunc: int) -> TruncatedHamiltonian:
    if n_trunc < 4:
        raise OutOfDomainError(f"nTrunc must be at least 4, got {n_trunc}")
    w, dlt, g, lam = params.omega, params.delta, params.g, params.lam
    n = np.arange(n_trunc + 1)
    dim = 2 * (n_trunc + 1)
    H = np.zeros((dim, dim))
    if params.kind is ModelKind.TWO_PHOTON:
        occ = n.astype(float)
        shift = 2
        amp = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))       # <n|a^2|n+2>
    else:
        occ = params.n0 + 2.0 * n
        shift = 1
        amp = np.sqrt((n[:-1] + 1.0) * (params.n0 + n[:-1] + 1.0))   # <n|a1 a2|n+1>
    H[2 * n, 2 * n] = w * occ + dlt
    H[2 * n + 1, 2 * n + 1] = w * occ - dlt
    lo = n[: len(amp)]
    # <up, n| g sigma+ A + lam g sigma+ A^dag |down, .>
    H[2 * lo, 2 * (lo + shift) + 1] = g * amp
    H[2 * (lo + shift), 2 * lo + 1] = lam * g * amp
    H = H + H.T - np.diag(np.diag(H))
    return TruncatedHamiltonian(params.kind, n_trunc, dim, H, params)


def parity_classes(params_or_kind, n_trunc: int) -> np.ndarray:
    """Integer parity class of every basis state.

    Two-photon: (n + 2[up]) mod 4, with classes 0,1,2,3 meaning +1,+i,-1,-i.
    Two-mode: (n + [up]) mod 2, with classes 0,1 meaning +1,-1.
    """
    kind = getattr(params_or_kind, "kind", params_or_kind)
    n = np.arange(n_trunc + 1)
    cls = np.empty(2 * (n_trunc + 1), dtype=int)
    if kind is ModelKind.TWO_PHOTON:
        cls[0::2] = (n + 2) % 4
        cls[1::2] = n % 4
    else:
        cls[0::2] = (n + 1) % 2
        cls[1::2] = n % 2
    return cls


@dataclass(frozen=True)
class ParityOperator:
    classes: np.ndarray
    modulus: int

    @property
    def phases(self) -> np.ndarray:
        return (1j) ** (self.classes * (4 // self.modulus))


def parity_matrix(params: ModelParams, n_trunc: int) -> ParityOperator:
    mod = 4 if params.kind is ModelKind.TWO_PHOTON else 2
    return ParityOperator(parity_classes(params.kind, n_trunc), mod)


def parity_name(kind: ModelKind, cls: int) -> str:
    return PARITY_NAMES[kind][cls]


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    parity_labels: np.ndarray   # integer classes
    kind: ModelKind

    def label_names(self) -> list[str]:
        return [parity_name(self.kind, int(c)) for c in self.parity_labels]

    def by_class(self, cls: int) -> np.ndarray:
        return self.eigenvalues[self.parity_labels == cls]


def diagonalize(H: TruncatedHamiltonian, cap: int = DIM_CAP, vectors: bool = True) -> EigenDecomposition:
    """Dense eigendecomposition, block by block over parity classes.

    H never couples different classes, so each block is diagonalized alone
    and every eigenvector carries an exact parity label.
    """
    if H.dim > cap:
        raise OutOfDomainError(f"matrix dimension {H.dim} exceeds the cap {cap}")
    classes = parity_classes(H.kind, H.n_trunc)
    vals, labels, vecs = [], [], []
    for c in np.unique(classes):
        sel = np.flatnonzero(classes == c)
        block = H.entries[np.ix_(sel, sel)]
        try:
            if vectors:
                ev, V = np.linalg.eigh(block)
            else:
                ev, V = np.linalg.eigvalsh(block), None
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(f"eigensolver failed on class {c} block: {exc}") from exc
        vals.append(ev)
        labels.append(np.full(len(ev), c))
        if vectors:
            full = np.zeros((H.dim, len(ev)))
            full[sel] = V
            vecs.append(full)
    vals = np.concatenate(vals)
    labels = np.concatenate(labels)
    order = np.argsort(vals, kind="stable")
    V = np.concatenate(vecs, axis=1)[:, order] if vectors else np.empty((H.dim, 0))
    return EigenDecomposition(vals[order], V, labels[order], H.kind)


def oracle_spectrum(params: ModelParams, n_trunc: int) -> EigenDecomposition:
    return diagonalize(build_hamiltonian(params, n_trunc), vectors=False)


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    labels: np.ndarray
    shifts: np.ndarray
    stable: np.ndarray
    n_trunc: int
    n_check: int


def stable_levels(params: ModelParams, n_trunc: int, count: int, factor: float = 1.5,
                  tol: float = 1e-8) -> StabilityReport:
    """Lowest ``count`` levels and whether each moves by < tol when nTrunc grows by ``factor``."""
    a = oracle_spectrum(params, n_trunc)
    n2 = int(math.ceil(factor * n_trunc))
    b = oracle_spectrum(params, n2)
    ev, lab = a.eigenvalues[:count], a.parity_labels[:count]
    shifts = np.empty(len(ev))
    for c in np.unique(lab):
        mine = np.flatnonzero(lab == c)
        ref = b.by_class(c)[: len(mine)]
        shifts[mine] = np.abs(ev[mine] - ref)
    return StabilityReport(ev, lab, shifts, shifts < tol, n_trunc, n2)


# --- squeezed frame built numerically ---------------------------------------

def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n + 1)), 1)


@dataclass(frozen=True)
class ConjugationReport:
    max_deviation: float
    by_class: dict = field(default_factory=dict)
    threshold: float = 0.0
    n_trunc: int = 0


def _predicted_blocks(params: ModelParams, frame: BogolubovFrame, ops: dict) -> dict:
    """Transformed Hamiltonian written with squeezed-frame operators."""
    w, lam, g = params.omega, params.lam, params.g
    eta = frame.eta
    rc = rotated_couplings(params, frame.beta)
    p, q, r = rc.p, rc.q, rc.r
    one = ops["I"]
    if params.kind is ModelKind.TWO_PHOTON:
        N, lower, raise_ = ops["N"], ops["lower"], ops["raise"]
        h11 = w * eta * (N + 0.5 * one) - (w / 2 - p) * one
        common = -q * one - r * (1 - lam) * (g / w) * (2 * N + one)
        h12 = common + (1 - lam) * g * lower
        h21 = common + (1 - lam) * g * raise_
        h22 = (w * (2 / eta - eta) * (N + 0.5 * one) - (w / 2 + p) * one
               - (2 * r / eta) * (lower + raise_))
    else:
        M, lower, raise_ = ops["N"], ops["lower"], ops["raise"]
        h11 = w * eta * (M + one) - (w - p) * one
        common = -q * one - r * (1 - lam) * (g / (2 * w)) * (M + one)
        h12 = common + (1 - lam) * g * lower
        h21 = common + (1 - lam) * g * raise_
        h22 = w * (2 / eta - eta) * (M + one) - (w + p) * one - (2 * r / eta) * (lower + raise_)
    return {"H11": h11, "H12": h12, "H21": h21, "H22": h22}


def _rotated_blocks(params: ModelParams, beta: float, bare: dict) -> dict:
    """U^T H U with H = [[w N + D, g A + lam g A^+], [g A^+ + lam g A, w N - D]]."""
    w, dlt, g, lam = params.omega, params.delta, params.g, params.lam
    one, N, A, Ad = bare["I"], bare["N"], bare["A"], bare["Ad"]
    blocks = [[w * N + dlt * one, g * A + lam * g * Ad],
              [g * Ad + lam * g * A, w * N - dlt * one]]
    U = rotation(beta)
    out = {}
    for i in range(2):
        for j in range(2):
            acc = 0 * one
            for k in range(2):
                for l in range(2):
                    coef = U[k, i] * U[l, j]
                    if coef != 0.0:
                        acc = acc + coef * blocks[k][l]
            out[f"H{i + 1}{j + 1}"] = acc
    return out


def _two_photon_ops(frame: BogolubovFrame, size: int):
    a = _ladder(size - 1)
    ad = a.T
    one = np.eye(size)
    alpha = frame.u * a + frame.v * ad
    alpha_d = alpha.T
    bare = {"I": one, "N": ad @ a, "A": a @ a, "Ad": ad @ ad}
    sq = {"I": one, "N": alpha_d @ alpha, "lower": alpha @ alpha, "raise": alpha_d @ alpha_d}
    return bare, sq


def _two_mode_ops(frame: BogolubovFrame, n0: int, n_trunc: int):
    """Full two-mode operators, restricted afterwards to the |n0+n, n> ladder."""
    size = n_trunc + n0 + 8
    a = sp.csr_matrix(_ladder(size - 1))
    eye = sp.identity(size, format="csr")
    a1 = sp.kron(a, eye, format="csr")
    a2 = sp.kron(eye, a, format="csr")
    a1d, a2d = a1.T.tocsr(), a2.T.tocsr()
    u, v = frame.u, frame.v
    b1 = u * a1 + v * a2d
    b2 = u * a2 + v * a1d
    b1d, b2d = b1.T.tocsr(), b2.T.tocsr()
    sel = np.array([(n0 + n) * size + n for n in range(n_trunc + 1)])

    def restrict(op):
        return op[sel][:, sel].toarray()

    one = np.eye(n_trunc + 1)
    bare = {"I": one, "N": restrict(a1d @ a1 + a2d @ a2), "A": restrict(a1 @ a2),
            "Ad": restrict(a1d @ a2d)}
    sq = {"I": one, "N": restrict(b1d @ b1 + b2d @ b2), "lower": restrict(b1 @ b2),
          "raise": restrict(b1d @ b2d)}
    return bare, sq


def bogolubov_conjugation_check(params: ModelParams, n_trunc: int = 60, threshold: float = 1e-8,
                                raise_on_mismatch: bool = True) -> ConjugationReport:
    """Compare U^T H U against the closed-form transformed Hamiltonian.

    The squeezed operators are built by matrix algebra from truncated ladder
    matrices; only elements with both indices below nTrunc-4 are compared.
    """
    frame = bogolubov_frame(params)
    if params.kind is ModelKind.TWO_PHOTON:
        bare, sq = _two_photon_ops(frame, n_trunc + 1)
    else:
        bare, sq = _two_mode_ops(frame, params.n0, n_trunc)
    rot = _rotated_blocks(params, frame.beta, bare)
    pred = _predicted_blocks(params, frame, sq)
    cut = n_trunc - 4
    by_class = {k: float(np.max(np.abs(rot[k][:cut, :cut] - pred[k][:cut, :cut]))) for k in rot}
    worst = max(by_class, key=by_class.get)
    report = ConjugationReport(by_class[worst], by_class, threshold * params.omega, n_trunc)
    if raise_on_mismatch and report.max_deviation > report.threshold:
        raise FormulaMismatchError(worst, report.max_deviation, report.threshold)
    return report


# --- vacuum states and squeezed Fock states ---------------------------------

def vacuum_state_alpha(frame: BogolubovFrame, n_trunc: int, tail_tol: float = 1e-10) -> np.ndarray:
    """Normalized |0>_alpha on the bare Fock basis 0..nTrunc.

    Amplitudes are built by ratio recursion on an extended range; the weight
    falling beyond nTrunc is the truncation tail.
    """
    ext = 2 * n_trunc + 2
    c = np.zeros(ext + 1)
    c[0] = 1.0
    for k in range(ext // 2):
        c[2 * k + 2] = c[2 * k] * (-frame.x) * math.sqrt((2 * k + 1) / (2 * k + 2))
    c /= np.linalg.norm(c)
    tail = float(np.sum(c[n_trunc + 1:] ** 2))
    if tail > tail_tol:
        raise InsufficientCutoffError(tail, n_trunc)
    return c[: n_trunc + 1].copy()


def alpha_fock(frame: BogolubovFrame, n_trunc: int, m: int, tail_tol: float = 1e-10) -> np.ndarray:
    """Unnormalized |m>_alpha = (alpha^+)^m |0>_alpha with alpha^+ = u a^+ + v a."""
    pad = n_trunc + m + 2
    vec = np.zeros(pad + 1)
    vec[: n_trunc + 1] = vacuum_state_alpha(frame, n_trunc, tail_tol)
    a = _ladder(pad)
    alpha_d = frame.u * a.T + frame.v * a
    for _ in range(m):
        vec = alpha_d @ vec
    return vec[: n_trunc + 1].copy()


def two_mode_vacuum(frame: BogolubovFrame, n0: int, n_trunc: int, tail_tol: float = 1e-10) -> np.ndarray:
    """Normalized |n0, 0>_b on the ladder |n0+n, n>, n = 0..nTrunc."""
    ext = 2 * n_trunc + 2
    c = np.zeros(ext + 1)
    c[0] = 1.0
    for n in range(ext):
        c[n + 1] = c[n] * (-frame.x) * math.sqrt((n0 + n + 1) / (n + 1))
    c /= np.linalg.norm(c)
    tail = float(np.sum(c[n_trunc + 1:] ** 2))
    if tail > tail_tol:
        raise InsufficientCutoffError(tail, n_trunc)
    return c[: n_trunc + 1].copy()


def pair_ladder_ops(n0: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """(a1 a2, a1^+ a2^+) restricted to the ladder |n0+n, n>, n < size."""
    n = np.arange(size - 1)
    lower = np.zeros((size, size))
    lower[n, n + 1] = np.sqrt((n + 1.0) * (n0 + n + 1.0))
    return lower, lower.T.copy()


def pair_fock(frame: BogolubovFrame, n0: int, n_trunc: int, m: int, tail_tol: float = 1e-10) -> np.ndarray:
    """Unnormalized |n0+m, m>_b = (b1^+ b2^+)^m |n0, 0>_b on the bare ladder."""
    pad = n_trunc + m + 2
    vec = np.zeros(pad + 1)
    vec[: n_trunc + 1] = two_mode_vacuum(frame, n0, n_trunc, tail_tol)
    lower, raise_ = pair_ladder_ops(n0, pad + 1)
    ntot = n0 + 2.0 * np.arange(pad + 1)
    u, v = frame.u, frame.v
    # b1^+ b2^+ = u^2 K+ + v^2 K- + u v (n1 + n2 + 1) inside the ladder
    B = u * u * raise_ + v * v * lower + u * v * np.diag(ntot + 1.0)
    for _ in range(m):
        vec = B @ vec
    return vec[: n_trunc + 1].copy()
