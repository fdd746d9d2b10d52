"""Command-line front end: solve, validate, compare, and convergence sweeps.

Configuration comes from an optional flat key=value file overridden by
command-line flags; all user-facing lengths are in mm and coefficients in
1/mm.  Output is schema-stable CSV suitable for gnuplot or pandas.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError
from .inversion import DensityField, InversionParams, density_curve
from .mc import McConfig, run_mc_fields
from .quadrature import gauss_legendre
from .spectral import MediumParams, solve_eigensystem

__all__ = ["main", "build_parser", "load_config"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_COMPARISON = 3

_DEFAULTS = {
    "mu_a": 0.01,
    "mu_s": 10.0,
    "g": 0.9,
    "lmax": 3,
    "N": 3,
    "rho": [5.0],
    "z_min": -50.0,
    "z_max": 50.0,
    "z_count": 101,
    "photons": 1_000_000,
    "seed": 1,
    "out": ".",
    "tol": 0.1,
    "cutoff": 1e-4,
    "shell_halfwidth": 0.5,
    "pairs": [(3, 3), (9, 5), (9, 9), (9, 11)],
}

_FLOAT_KEYS = ("mu_a", "mu_s", "g", "z_min", "z_max", "tol", "cutoff",
               "shell_halfwidth")
_INT_KEYS = ("lmax", "N", "z_count", "photons", "seed")


class UsageError(Exception):
    """Invalid configuration or arguments; maps to exit status 1."""


def _parse_rho(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad rho list: {text!r}") from exc
    if not values:
        raise UsageError("rho list is empty")
    return values


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    try:
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            a, b = chunk.split(",")
            pairs.append((int(a), int(b)))
    except ValueError as exc:
        raise UsageError(f"bad pairs spec: {text!r}") from exc
    if not pairs:
        raise UsageError("pairs spec is empty")
    return pairs


def load_config(path: str | Path) -> dict:
    """Read a flat key=value file; '#' starts a comment, blank lines ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key in _INT_KEYS:
            out[key] = int(value)
        elif key == "rho":
            out[key] = _parse_rho(value)
        elif key == "pairs":
            out[key] = _parse_pairs(value)
        elif key == "out":
            out[key] = value
        else:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ado3d",
        description="Energy density around a pencil beam: deterministic "
        "solver, Monte Carlo validator, and convergence sweeps.",
    )
    sub = parser.add_subparsers(dest="command")
    for name, help_text in (
        ("ado", "deterministic solve; one CSV per rho"),
        ("mc", "Monte Carlo estimate with standard errors"),
        ("compare", "run both and report pass/fail against a tolerance"),
        ("converge", "sweep (lmax, N) pairs against the largest pair"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--mu-a", dest="mu_a", type=float)
        p.add_argument("--mu-s", dest="mu_s", type=float)
        p.add_argument("--g", type=float)
        p.add_argument("--lmax", type=int)
        p.add_argument("--N", dest="N", type=int)
        p.add_argument("--rho", type=str, help="comma-separated list in mm")
        p.add_argument("--z-min", dest="z_min", type=float)
        p.add_argument("--z-max", dest="z_max", type=float)
        p.add_argument("--z-count", dest="z_count", type=int)
        p.add_argument("--photons", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--tol", type=float, help="relative tolerance")
        p.add_argument("--cutoff", type=float,
                       help="Russian-roulette weight threshold")
        p.add_argument("--shell-halfwidth", dest="shell_halfwidth", type=float,
                       help="MC scoring shell half-width in mm")
        p.add_argument("--pairs", type=str,
                       help="semicolon-separated lmax,N pairs for converge")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    for key in (*_FLOAT_KEYS, *_INT_KEYS, "out"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "rho", None) is not None:
        cfg["rho"] = _parse_rho(args.rho)
    if getattr(args, "pairs", None) is not None:
        cfg["pairs"] = _parse_pairs(args.pairs)
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["mu_a"] <= 0 or cfg["mu_s"] <= 0:
        raise UsageError("mu_a and mu_s must be positive")
    if not 0.0 <= cfg["g"] < 1.0:
        raise UsageError("g must be in [0, 1)")
    if cfg["lmax"] < 0 or cfg["N"] < 1:
        raise UsageError("lmax must be >= 0 and N >= 1")
    if cfg["z_count"] < 1 or cfg["z_max"] <= cfg["z_min"]:
        raise UsageError("need z_max > z_min and z_count >= 1")
    if any(r <= 0 for r in cfg["rho"]):
        raise UsageError("rho values must be positive")
    if cfg["photons"] < 1:
        raise UsageError("photons must be >= 1")
    if cfg["tol"] <= 0:
        raise UsageError("tol must be positive")
    if cfg["shell_halfwidth"] <= 0:
        raise UsageError("shell_halfwidth must be positive")


def _medium(cfg: dict, lmax: int | None = None) -> MediumParams:
    return MediumParams(
        mu_a=cfg["mu_a"],
        mu_s=cfg["mu_s"],
        anisotropy=cfg["g"],
        degree=cfg["lmax"] if lmax is None else lmax,
    )


def _z_grid(cfg: dict) -> np.ndarray:
    return np.linspace(cfg["z_min"], cfg["z_max"], cfg["z_count"])


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _solve_curves(cfg: dict, lmax: int, half_order: int) -> list[DensityField]:
    medium = _medium(cfg, lmax)
    system = solve_eigensystem(0, gauss_legendre(half_order), medium)
    z = _z_grid(cfg)
    return [density_curve(medium, system, rho, z) for rho in cfg["rho"]]


def _mc_curves(cfg: dict) -> list[DensityField]:
    hw = cfg["shell_halfwidth"]
    rhos = sorted(cfg["rho"])
    for r1, r2 in zip(rhos, rhos[1:]):
        if r2 - r1 < 2 * hw:
            raise UsageError(
                "rho values closer than twice the shell half-width"
            )
    edges = sorted({round(v, 12) for r in rhos for v in (r - hw, r + hw)})
    if edges[0] < 0:
        raise UsageError("shell half-width exceeds the smallest rho")
    z = _z_grid(cfg)
    dz = (cfg["z_max"] - cfg["z_min"]) / max(cfg["z_count"] - 1, 1)
    z_edges = np.linspace(
        cfg["z_min"] - 0.5 * dz, cfg["z_max"] + 0.5 * dz, cfg["z_count"] + 1
    )
    mc_cfg = McConfig(
        photons=cfg["photons"],
        seed=cfg["seed"],
        rho_edges=np.asarray(edges),
        z_edges=z_edges,
        weight_cutoff=cfg["cutoff"],
    )
    fields = run_mc_fields(_medium(cfg), mc_cfg)
    by_center = {round(f.rho, 9): f for f in fields}
    out = []
    for rho in cfg["rho"]:
        f = by_center[round(rho, 9)]
        out.append(
            DensityField(rho=rho, z=z, values=f.values, provenance="MC",
                         stderr=f.stderr)
        )
    return out


def _cmd_ado(cfg: dict) -> int:
    out = _out_dir(cfg)
    for curve in _solve_curves(cfg, cfg["lmax"], cfg["N"]):
        rows = [[curve.rho, z, u] for z, u in zip(curve.z, curve.values)]
        _write_csv(out / f"ado_rho{curve.rho:g}.csv",
                   ["rho_mm", "z_mm", "U"], rows)
    return EXIT_OK


def _cmd_mc(cfg: dict) -> int:
    out = _out_dir(cfg)
    for curve in _mc_curves(cfg):
        rows = [
            [curve.rho, z, u, e]
            for z, u, e in zip(curve.z, curve.values, curve.stderr)
        ]
        _write_csv(out / f"mc_rho{curve.rho:g}.csv",
                   ["rho_mm", "z_mm", "U", "stderr"], rows)
    return EXIT_OK


def _cmd_compare(cfg: dict) -> int:
    out = _out_dir(cfg)
    ado = _solve_curves(cfg, cfg["lmax"], cfg["N"])
    mc = _mc_curves(cfg)
    tol = cfg["tol"]
    all_pass = True
    summary = []
    for a, m in zip(ado, mc):
        rows = []
        worst = 0.0
        for z, ua, um, se in zip(a.z, a.values, m.values, m.stderr):
            rel = abs(ua - um) / um if um > 0 else np.inf
            ok = rel <= tol or abs(ua - um) <= 3.0 * se
            if um > 0:
                worst = max(worst, rel)
            all_pass &= ok
            rows.append([a.rho, z, ua, um, se, rel, 1.0 if ok else 0.0])
        _write_csv(
            out / f"compare_rho{a.rho:g}.csv",
            ["rho_mm", "z_mm", "U_ado", "U_mc", "stderr_mc", "rel_diff",
             "pass"],
            rows,
        )
        summary.append(f"rho={a.rho:g}mm max_rel_diff={worst:.3e}")
    verdict = "PASS" if all_pass else "FAIL"
    report = "\n".join(summary + [f"overall: {verdict} (tol={tol:g})"])
    (out / "compare_summary.txt").write_text(report + "\n")
    print(report)
    return EXIT_OK if all_pass else EXIT_COMPARISON


def _cmd_converge(cfg: dict) -> int:
    out = _out_dir(cfg)
    pairs = list(cfg["pairs"])
    reference = max(pairs)
    curves = {pair: _solve_curves(cfg, *pair) for pair in pairs}
    rows = []
    for pair in pairs:
        worst = 0.0
        for cur, ref in zip(curves[pair], curves[reference]):
            mask = ref.values > 0
            rel = np.abs(cur.values[mask] - ref.values[mask]) / ref.values[mask]
            worst = max(worst, float(np.max(rel)) if np.any(mask) else np.inf)
        rows.append([pair[0], pair[1], worst])
        print(f"lmax={pair[0]} N={pair[1]} max_rel_diff={worst:.3e} "
              f"(reference lmax={reference[0]} N={reference[1]})")
    _write_csv(out / "converge.csv", ["lmax", "N", "max_rel_diff"], rows)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _merge_config(args)
        handler = {
            "ado": _cmd_ado,
            "mc": _cmd_mc,
            "compare": _cmd_compare,
            "converge": _cmd_converge,
        }[args.command]
        return handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
