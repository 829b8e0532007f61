"""Batch command line: ``rabi <subcommand> [flags]``.

Configuration is resolved as defaults < preset < --config JSON < flags. Every
output begins with a header line carrying the resolved configuration, so a
file is enough to reproduce itself.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, NumericError, RabiError
from .gfunction import EPS_POLE, g_values, nearest_pole, pole_energies
from .model import ModelKind, ModelParams, SectorLabel, bogolubov_frame, critical_coupling
from .observables import condensation_scan, entropy_sweep, supercritical_scan
from .oracle import parity_name, stable_levels
from .spectrum import juddian_analytic, juddian_numeric, oracle_levels, sweep_spectrum

log = logging.getLogger("rabispec")

COMMANDS = ("gfunction", "spectrum", "juddian", "entropy", "oracle", "critical")

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rabi run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {"enum": ["two-photon", "two-mode"]},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number"},
        "g": {"type": "number"},
        "lambda": {"type": "number", "minimum": 0},
        "sector": {"enum": ["even", "odd"]},
        "n0": {"type": "integer", "minimum": 0},
        "gmin": {"type": "number"},
        "gmax": {"type": "number"},
        "gsteps": {"type": "integer", "minimum": 1},
        "emin": {"type": "number"},
        "emax": {"type": "number"},
        "steps": {"type": "integer", "minimum": 2},
        "levels": {"type": "integer", "minimum": 1},
        "ntrunc": {"type": "integer", "minimum": 4},
        "ntrunc_list": {"type": "array", "items": {"type": "integer", "minimum": 4}, "minItems": 2},
        "g_super": {"type": "number"},
        "k": {"type": "integer", "minimum": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "with_oracle": {"type": "boolean"},
        "out": {"type": ["string", "null"]},
        "format": {"enum": ["csv", "json"]},
    },
}


@dataclass
class RunConfig:
    model: str = "two-photon"
    omega: float = 1.0
    delta: float = 0.2
    g: float = 0.3
    lam: float = 0.25
    sector: str = "even"
    n0: int = 0
    gmin: float = 0.0
    gmax: float = 0.75
    gsteps: int = 31
    emin: float = -0.5
    emax: float = 4.0
    steps: int = 2000
    levels: int = 3
    ntrunc: int = 200
    ntrunc_list: tuple = (200, 400, 600, 800, 1000)
    g_super: float = 0.85
    k: int = 5
    tol: float = 1e-10
    with_oracle: bool = False
    out: str | None = None
    format: str = "csv"

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["ntrunc_list"] = list(d["ntrunc_list"])
        d.pop("out")
        return dict(sorted(d.items()))

    def params(self, g: float | None = None, branch: str = "+") -> ModelParams:
        kind = ModelKind.parse(self.model)
        if kind is ModelKind.TWO_PHOTON:
            sec = SectorLabel(kind, self.sector, None, branch)
        else:
            sec = SectorLabel.pair(self.n0, branch)
        return ModelParams(kind, self.omega, self.delta, self.g if g is None else g, self.lam, sec)

    def g_grid(self) -> np.ndarray:
        if self.gsteps == 1:
            return np.array([self.gmin])
        return np.linspace(self.gmin, self.gmax, self.gsteps)


PRESETS = {
    "fig1": dict(model="two-photon", omega=1.0, delta=0.2, g=0.3, lam=0.25, sector="even",
                 emin=-0.5, emax=4.0, steps=2000),
    "fig2": dict(model="two-photon", omega=1.0, delta=0.2, lam=0.25, gmin=0.0, gmax=0.79,
                 gsteps=80, levels=3),
    "fig3": dict(model="two-photon", omega=1.0, delta=0.2, lam=0.25, sector="even", gmin=0.0,
                 gmax=0.79, gsteps=80, levels=2),
    "fig4": dict(model="two-photon", omega=1.0, delta=0.2, lam=0.25, gmin=0.4, gmax=0.792,
                 gsteps=15, g_super=0.85, ntrunc=200, levels=12, k=5),
    "fig5": dict(model="two-mode", omega=1.0, delta=0.2, g=0.5, lam=0.5, n0=0, emin=-1.0,
                 emax=4.0, steps=2000),
    "fig6": dict(model="two-mode", omega=1.0, delta=0.2, lam=0.5, n0=0, gmin=0.0, gmax=1.3,
                 gsteps=66, levels=3),
    "fig7": dict(model="two-mode", omega=1.0, delta=0.2, lam=0.5, n0=0, gmin=0.0, gmax=1.3,
                 gsteps=66, levels=2),
}

_FLAG_KEYS = {"lambda": "lam"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabi", description="Exact spectra of anisotropic two-photon and "
                     "two-mode Rabi models, checked against truncated diagonalization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--model", choices=["two-photon", "two-mode"])
        for flag in ("omega", "delta", "g", "gmin", "gmax", "emin", "emax", "tol", "g-super"):
            p.add_argument(f"--{flag}", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--sector", choices=["even", "odd"])
        for flag in ("n0", "gsteps", "steps", "levels", "ntrunc", "k"):
            p.add_argument(f"--{flag}", type=int)
        p.add_argument("--ntrunc-list", type=lambda s: tuple(int(x) for x in s.split(",")))
        p.add_argument("--with-oracle", action="store_true", default=None)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.preset:
        values.update(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from exc
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            key = ".".join(str(p) for p in exc.absolute_path) or "config"
            raise ConfigError(key, exc.message) from exc
        for k, v in raw.items():
            values[_FLAG_KEYS.get(k, k)] = tuple(v) if k == "ntrunc_list" else v
    names = {f.name for f in fields(RunConfig)}
    for k, v in vars(args).items():
        if k in names and v is not None:
            values[k] = v
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    def need(ok, key, msg):
        if not ok:
            raise ConfigError(key, msg)

    need(cfg.model in ("two-photon", "two-mode"), "model", "must be two-photon or two-mode")
    for key in ("omega", "delta", "g", "lam", "gmin", "gmax", "emin", "emax", "tol", "g_super"):
        need(math.isfinite(float(getattr(cfg, key))), key, "must be finite")
    need(cfg.omega > 0, "omega", "must be positive")
    need(cfg.lam >= 0, "lambda", "must be non-negative")
    need(cfg.sector in ("even", "odd"), "sector", "must be even or odd")
    need(int(cfg.n0) == cfg.n0 and cfg.n0 >= 0, "n0", "must be a non-negative integer")
    need(cfg.emax > cfg.emin, "emax", "must exceed emin")
    need(cfg.steps >= 2, "steps", "must be at least 2")
    need(cfg.gsteps >= 1, "gsteps", "must be at least 1")
    need(cfg.gmax >= cfg.gmin, "gmax", "must not be below gmin")
    need(cfg.levels >= 1, "levels", "must be positive")
    need(cfg.ntrunc >= 4, "ntrunc", "must be at least 4")
    need(len(cfg.ntrunc_list) >= 2 and all(n >= 4 for n in cfg.ntrunc_list), "ntrunc_list",
         "needs at least two cutoffs >= 4")
    need(list(cfg.ntrunc_list) == sorted(cfg.ntrunc_list), "ntrunc_list", "must be ascending")
    need(cfg.k >= 2, "k", "must be at least 2")
    need(cfg.tol > 0, "tol", "must be positive")
    need(cfg.format in ("csv", "json"), "format", "must be csv or json")


# --- formatting -------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def header(command: str, cfg: RunConfig) -> str:
    return f"# rabi {command} config=" + json.dumps(cfg.to_json_dict(), separators=(",", ":"))


def render(command: str, cfg: RunConfig, columns, rows, extra: dict | None = None,
           notes=()) -> str:
    """CSV (with header and trailing '# key: json' lines) or a JSON document."""
    extra = extra or {}
    if cfg.format == "json":
        doc = {"command": command, "config": cfg.to_json_dict(), "columns": list(columns),
               "rows": [[_jsonable(v) for v in r] for r in rows], "notes": list(notes)}
        doc.update({k: _jsonable(v) for k, v in extra.items()})
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(header(command, cfg) + "\n")
    for n in notes:
        buf.write(f"# {n}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    for k, v in extra.items():
        buf.write(f"# {k}: " + json.dumps(_jsonable(v), separators=(",", ":")) + "\n")
    return buf.getvalue()


def emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def worker_count() -> int:
    raw = os.environ.get("RABI_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError("RABI_THREADS", f"not an integer: {raw!r}") from exc
    if n < 0:
        raise ConfigError("RABI_THREADS", "must be >= 0")
    return n or (os.cpu_count() or 1)


# --- commands ---------------------------------------------------------------

def cmd_gfunction(cfg: RunConfig) -> None:
    p = cfg.params()
    frame = bogolubov_frame(p)
    E = np.linspace(cfg.emin, cfg.emax, cfg.steps)
    gp, gm, ok = g_values(p, E)
    dist = np.array([abs(e - nearest_pole(p, e, frame)[1]) for e in E])
    near = dist < EPS_POLE * p.omega
    rows = [(e, a, b, n, o) for e, a, b, n, o in zip(E, gp, gm, near, ok)]
    count = 1
    while pole_energies(p, count, frame).energies[-1] <= cfg.emax and count < 10000:
        count += 1
    poles = [x for x in pole_energies(p, count, frame).energies if cfg.emin <= x <= cfg.emax]
    sidecar = {"sector": p.sector.describe(), "eta_prime": frame.eta_prime, "poles": poles}
    emit(render("gfunction", cfg, ["E", "G_plus", "G_minus", "near_pole", "converged"], rows), cfg)
    if cfg.out:
        with open(cfg.out + ".poles.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(_jsonable(sidecar), indent=1) + "\n")
    else:
        sys.stdout.write("# poles: " + json.dumps(_jsonable(sidecar), separators=(",", ":")) + "\n")


def cmd_spectrum(cfg: RunConfig) -> None:
    family = cfg.params()
    gc = critical_coupling(family)
    res = sweep_spectrum(family, cfg.g_grid(), cfg.levels, workers=worker_count())
    notes = []
    rows = []
    for g, levels in zip(res.g_grid, res.per_g):
        if abs(g) >= gc:
            notes.append(f"warning: g={fmt(g)} >= g_c={fmt(gc)}; oracle-only levels")
        for L in levels:
            rows.append((L.g, L.level_index, L.branch, L.sector, L.E, L.source))
        if cfg.with_oracle and abs(g) < gc:
            for L in oracle_levels(family.with_g(g), cfg.levels, cfg.ntrunc):
                rows.append((L.g, L.level_index, L.branch, L.sector, L.E, L.source))
    crossings = [{"g": c.g, "E": c.E, "sector": c.sector, "levels": list(c.levels),
                  "bracket": list(c.bracket)} for c in res.crossings]
    emit(render("spectrum", cfg, ["g", "level_index", "branch", "sector", "E", "source"], rows,
                {"crossings": crossings}, notes), cfg)


def cmd_juddian(cfg: RunConfig) -> None:
    kind = ModelKind.parse(cfg.model)
    family = cfg.params()
    gc = critical_coupling(family)
    targets = [(0, 0), (1, 0)] if kind is ModelKind.TWO_PHOTON else [(0, cfg.n0)]
    records = []
    for m, n0 in targets:
        ana = juddian_analytic(kind, cfg.omega, cfg.delta, cfg.lam, m, n0=n0)
        fam = family if kind is ModelKind.TWO_PHOTON else family.with_sector(SectorLabel.pair(n0))
        found = juddian_numeric(fam, m, (0.0, gc * (1 - 1e-9)), samples=400)
        best = min(found, key=lambda j: abs(j.g_star - ana.g_star)) if found else None
        records.append({
            "m": m, "sector": ana.sector.describe().rstrip("+-"),
            "g_analytic": ana.g_star, "E_analytic": ana.E_star,
            "g_numeric": best.g_star if best else None, "E_numeric": best.E_star if best else None,
            "delta_g": abs(best.g_star - ana.g_star) if best else None,
            "other_numeric": [{"g": j.g_star, "E": j.E_star} for j in found if j is not best],
        })
    cols = ["m", "sector", "g_analytic", "E_analytic", "g_numeric", "E_numeric", "delta_g"]
    if cfg.format == "json":
        doc = {"command": "juddian", "config": cfg.to_json_dict(), "points": _jsonable(records)}
        emit(json.dumps(doc, indent=1) + "\n", cfg)
    else:
        emit(render("juddian", cfg, cols, [[r[c] for c in cols] for r in records]), cfg)


def cmd_entropy(cfg: RunConfig) -> None:
    family = cfg.params()
    levels = tuple(range(min(cfg.levels, 2)))
    parity = cfg.sector if family.kind is ModelKind.TWO_PHOTON else None
    sw = entropy_sweep(family, cfg.g_grid(), levels=levels, n_trunc=cfg.ntrunc, parity=parity)
    rows = [(r.g, r.level, r.S, r.parity) for r in sw.rows]
    notes = [f"ambiguous: g={fmt(r.g)} level={r.level}" for r in sw.rows if r.ambiguous]
    jumps = [asdict(j) for j in sw.jumps]
    emit(render("entropy", cfg, ["g", "level", "S", "parity"], rows, {"jumps": jumps}, notes), cfg)


def cmd_oracle(cfg: RunConfig) -> None:
    p = cfg.params()
    count = 2 * (cfg.ntrunc + 1) if cfg.levels <= 0 else cfg.levels
    rep = stable_levels(p, cfg.ntrunc, count)
    rows = [(i, E, parity_name(p.kind, int(c)), s, bool(ok))
            for i, (E, c, s, ok) in enumerate(zip(rep.eigenvalues, rep.labels, rep.shifts, rep.stable))]
    emit(render("oracle", cfg, ["index", "E", "parity", "shift", "stable"], rows,
                {"stability": {"ntrunc": rep.n_trunc, "ntrunc_check": rep.n_check,
                               "all_stable": bool(np.all(rep.stable))}}), cfg)


def cmd_critical(cfg: RunConfig) -> None:
    family = cfg.params()
    rows_c = condensation_scan(family, cfg.g_grid(), k=cfg.k, n_trunc=cfg.ntrunc)
    rows = [(r.g, r.eta, *r.poles, r.pole_spread, r.oracle_spread) for r in rows_c]
    cols = ["g", "eta"] + [f"pole_{i}" for i in range(cfg.k)] + ["pole_spread", "oracle_spread"]
    rep = supercritical_scan(family, cfg.g_super, cfg.ntrunc_list, n_levels=cfg.levels)
    sup = {"g": rep.g, "ntrunc_list": list(rep.n_trunc_list), "exponent": rep.exponent,
           "exponent_ground": rep.exponent_ground, "fit_residual": rep.fit_residual,
           "ground_energies": list(rep.ground_energies), "monotone": rep.monotone,
           "ground_entropy": rep.ground_entropy, "participation_ratio": rep.participation_ratio,
           "level_parities": [parity_name(family.kind, c) for c in rep.level_classes],
           "grouped": rep.grouped, "slopes": rep.slopes}
    emit(render("critical", cfg, cols, rows, {"supercritical": sup}), cfg)


HANDLERS = {"gfunction": cmd_gfunction, "spectrum": cmd_spectrum, "juddian": cmd_juddian,
            "entropy": cmd_entropy, "oracle": cmd_oracle, "critical": cmd_critical}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        cfg = resolve_config(args)
        HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except RabiError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
