"""Command-line front-end.

Every subcommand reads a system (from a JSON file or from flags), runs one
analysis, and emits a deterministic JSON or CSV artifact that embeds the
resolved configuration and the system's validation report.

Exit status: 0 = computed with a positive verdict (or a pure computation),
2 = computed with a negative verdict (not certified, not orthogonal, ...),
1 = failure to compute (bad input, convergence error, budget).
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FractalSpecError
from .measure import FractalMeasure, atomic_approximation, fourier_mu_many
from .reports import SCHEMA_VERSION, render_csv, render_json, write_text
from .ruelle import as_box, attractor_hull, basis_certificate, contraction_probe, estimate_gamma
from .spectrum import (
    completeness_scan,
    enumerate_spectrum,
    orthogonality_matrix,
    q_partial_many,
    separation,
)
from .systems import AffineSystem, cantor_four, load_system, make_system, validate_system
from .verify import (
    dim_one_classify,
    hardy_roundtrip,
    max_orthogonal_clique,
    scaling_sweep,
    tiling_multiplicity,
)


def _parse_number(text: str, warn: bool = True) -> float:
    """Accept "p/q" exactly; plain decimals get a rounding warning."""
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    value = float(text)
    if warn and not float(value).is_integer():
        print(
            f"warning: decimal literal {text!r} parsed as binary float; "
            "use 'p/q' for exact rationals",
            file=_sys.stderr,
        )
    return value


def _parse_grid(spec: str, d: int) -> np.ndarray:
    """Parse "a:b:step[,a:b:step...]" into grid points (may be empty)."""
    parts = spec.split(",")
    if len(parts) != d:
        raise FractalSpecError(f"grid spec {spec!r} has {len(parts)} axes, system has {d}")
    axes = []
    for part in parts:
        fields = part.split(":")
        if len(fields) != 3:
            raise FractalSpecError(f"bad grid axis {part!r}, want a:b:step")
        a, b, step = (_parse_number(f, warn=False) for f in fields)
        if step <= 0:
            raise FractalSpecError(f"grid step must be positive in {part!r}")
        axes.append(np.arange(a, b + step / 2, step) if b >= a else np.empty(0))
    mesh = np.meshgrid(*axes, indexing="ij")
    if any(ax.size == 0 for ax in axes):
        return np.empty((0, d))
    return np.stack([m.ravel() for m in mesh], axis=1)


def _parse_window(spec: str) -> tuple[float, float]:
    fields = spec.split(":")
    if len(fields) != 2:
        raise FractalSpecError(f"bad window {spec!r}, want lo:hi")
    return _parse_number(fields[0], warn=False), _parse_number(fields[1], warn=False)


def _parse_coeffs(spec: str) -> dict:
    out: dict = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        if not value:
            raise FractalSpecError(f"bad coefficient {item!r}, want lambda=value")
        out[_parse_number(key, warn=False)] = complex(value)
    if not out:
        raise FractalSpecError("empty coefficient list")
    return out


def _emit(args, payload: dict, csv_header=None, csv_rows=None) -> None:
    """Write the artifact (JSON by default, CSV when requested)."""
    if args.format == "csv":
        if csv_header is None:
            raise FractalSpecError("this command has no CSV form")
        comments = [
            f"config: {render_json(payload.get('config', {}), compact=True)}",
            f"validation: {render_json(payload.get('validation'), compact=True)}",
            f"schema_version: {SCHEMA_VERSION}",
        ]
        text = render_csv(csv_header, csv_rows or [], comments)
    else:
        text = render_json(payload) + "\n"
    if args.out:
        write_text(args.out, text)
    else:
        _sys.stdout.write(text)


def _config_block(args, command: str, **extra) -> dict:
    cfg = {
        "command": command,
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
    }
    for key in ("system", "depth", "tol", "seed", "target", "out", "format"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    cfg.update(extra)
    return cfg


def _load_validated(args) -> tuple[AffineSystem, dict]:
    sys_ = load_system(args.system)
    report = validate_system(sys_)
    return sys_, report.as_dict()


def _classifier_system(R: int, a: float, L) -> AffineSystem:
    if L is None:
        L = [0.0, 1.0 / (2.0 * a)]
    return make_system(float(R), [0.0, a], L)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    sys_ = load_system(args.system)
    validation = validate_system(sys_, n_max=args.n_max, tol=args.tol).as_dict()
    payload = {
        "config": _config_block(args, "validate", n_max=args.n_max),
        "validation": validation,
        "system": {"d": sys_.d, "N": sys_.n_digits, "r": sys_.r},
    }
    _emit(args, payload)
    return 0 if validation["valid"] else 2


def _cmd_fourier(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    grid = _parse_grid(args.grid, sys_.d)
    values, tails = (
        fourier_mu_many(m, grid) if grid.size else (np.empty(0, complex), np.empty(0))
    )
    rows = [
        tuple(pt) + (v.real, v.imag, abs(v), tb)
        for pt, v, tb in zip(grid, values, tails)
    ]
    header = [f"t{i}" for i in range(sys_.d)] if sys_.d > 1 else ["t"]
    header += ["re", "im", "abs", "tail_bound"]
    payload = {
        "config": _config_block(args, "fourier", grid=args.grid),
        "validation": validation,
        "rows": [list(r) for r in rows],
        "columns": header,
    }
    _emit(args, payload, csv_header=header, csv_rows=rows)
    return 0


def _cmd_atoms(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    atoms = atomic_approximation(m, args.depth)
    rows = [(i,) + tuple(pt) + (atoms.weight,) for i, pt in enumerate(atoms.points)]
    header = (
        ["index"]
        + ([f"x{i}" for i in range(sys_.d)] if sys_.d > 1 else ["x"])
        + ["weight"]
    )
    payload = {
        "config": _config_block(args, "atoms"),
        "validation": validation,
        "depth": atoms.depth,
        "weight": atoms.weight,
        "points": atoms.points.tolist(),
    }
    _emit(args, payload, csv_header=header, csv_rows=rows)
    return 0


def _cmd_spectrum(args) -> int:
    sys_, validation = _load_validated(args)
    spec = enumerate_spectrum(sys_, args.depth)
    rows = [(i,) + tuple(el) for i, el in enumerate(spec.elements)]
    header = ["index"] + [f"lambda{i}" for i in range(sys_.d)]
    payload = {
        "config": _config_block(args, "spectrum"),
        "validation": validation,
        "size": spec.size,
        "separation": separation(spec) if spec.size >= 2 else None,
        "elements": spec.elements.tolist(),
    }
    _emit(args, payload, csv_header=header, csv_rows=rows)
    return 0


def _cmd_orthogonality(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    spec = enumerate_spectrum(sys_, args.depth)
    max_off, table = orthogonality_matrix(m, spec)
    rows = []
    for i in range(spec.size):
        for j in range(i + 1, spec.size):
            rows.append((i, j) + tuple(spec.elements[i]) + tuple(spec.elements[j]) + (table[i, j],))
    lam_i = [f"lambda_i{k}" for k in range(sys_.d)] if sys_.d > 1 else ["lambda_i"]
    lam_j = [f"lambda_j{k}" for k in range(sys_.d)] if sys_.d > 1 else ["lambda_j"]
    header = ["i", "j"] + lam_i + lam_j + ["abs_inner_product"]
    ok = max_off <= args.tol
    payload = {
        "config": _config_block(args, "orthogonality"),
        "validation": validation,
        "size": spec.size,
        "max_offdiag": max_off,
        "orthogonal": ok,
    }
    _emit(args, payload, csv_header=header, csv_rows=rows)
    return 0 if ok else 2


def _cmd_completeness(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    grid = _parse_grid(args.grid, sys_.d)
    if grid.size == 0:
        payload = {
            "config": _config_block(args, "completeness", grid=args.grid),
            "validation": validation,
            "status": "empty-grid",
            "rows": [],
        }
        header = (["t"] if sys_.d == 1 else [f"t{i}" for i in range(sys_.d)]) + ["Q"]
        _emit(args, payload, csv_header=header, csv_rows=[])
        return 0
    spec = enumerate_spectrum(sys_, args.depth)
    report = completeness_scan(m, spec, grid, target=args.target, increment_tol=args.increment_tol)
    final_depth = report.depths[-1]
    final_spec = spec if final_depth < 0 else enumerate_spectrum(sys_, final_depth)
    q_values = q_partial_many(m, final_spec, grid)
    rows = [tuple(pt) + (q,) for pt, q in zip(grid, q_values)]
    header = (["t"] if sys_.d == 1 else [f"t{i}" for i in range(sys_.d)]) + ["Q"]
    payload = {
        "config": _config_block(args, "completeness", grid=args.grid, increment_tol=args.increment_tol),
        "validation": validation,
        "report": report.as_dict(),
    }
    _emit(args, payload, csv_header=header, csv_rows=rows)
    return 0 if report.status == "complete-evidence" else 2


def _cmd_ruelle_bound(args) -> int:
    sys_, validation = _load_validated(args)
    box = attractor_hull(sys_) if args.box is None else as_box(
        [_parse_window(part) for part in args.box.split(",")], sys_.d
    )
    bound = estimate_gamma(sys_, box)
    probe = contraction_probe(sys_, box, trials=args.trials, seed=args.seed)
    payload = {
        "config": _config_block(args, "ruelle-bound", trials=args.trials, box=args.box),
        "validation": validation,
        "gamma_bound": bound.gamma_bound,
        "beta": bound.beta,
        "box": box.tolist(),
        "empirical_max_ratio": probe.max_ratio,
        "ratios": list(probe.ratios),
        "skipped": probe.skipped,
        "ratio_within_bound": probe.max_ratio <= bound.gamma_bound + 1e-6,
    }
    _emit(args, payload)
    return 0 if bound.gamma_bound < 1.0 else 2


def _cmd_certify(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    cert = basis_certificate(m, trials=args.trials, seed=args.seed)
    payload = {
        "config": _config_block(args, "certify", trials=args.trials),
        "validation": validation,
        "certificate": cert.as_dict(),
        "reason": "; ".join(cert.failures) if cert.failures else None,
    }
    _emit(args, payload)
    return 0 if cert.basis_certified else 2


def _cmd_classify(args) -> int:
    a = _parse_number(args.a)
    L = [_parse_number(x) for x in args.L.split(",")] if args.L else None
    verdict = dim_one_classify(
        int(args.R), a, L=L, clique_window=args.window, target=args.target
    )
    validation = validate_system(_classifier_system(args.R, a, L)).as_dict()
    payload = {
        "config": _config_block(args, "classify", R=args.R, a=args.a, window=args.window),
        "validation": validation,
        "verdict": verdict.as_dict(),
    }
    _emit(args, payload)
    return 0 if verdict.consistent else 2


def _cmd_clique(args) -> int:
    a = _parse_number(args.a)
    L = [_parse_number(x) for x in args.L.split(",")] if args.L else None
    sys_ = _classifier_system(args.R, a, L)
    validation = validate_system(sys_).as_dict()
    m = FractalMeasure(sys_)
    size, witness = max_orthogonal_clique(m, args.window, zero_tol=args.zero_tol)
    payload = {
        "config": _config_block(
            args, "clique", R=args.R, a=args.a, window=args.window, zero_tol=args.zero_tol
        ),
        "validation": validation,
        "size": size,
        "witness": list(witness),
    }
    _emit(args, payload)
    return 0


def _cmd_sweep(args) -> int:
    sys_, validation = _load_validated(args)
    report = scaling_sweep(sys_, args.r_max)
    rows = [(r, g, c) for r, g, c in report.rows]
    payload = {
        "config": _config_block(args, "sweep", r_max=args.r_max),
        "validation": validation,
        "sweep": report.as_dict(),
    }
    _emit(args, payload, csv_header=["r", "gamma_bound", "certified"], csv_rows=rows)
    return 0 if report.first_certified is not None else 2


def _cmd_tiling(args) -> int:
    sys_ = load_system(args.system) if args.system else cantor_four()
    validation = validate_system(sys_).as_dict()
    window = _parse_window(args.window)
    report = tiling_multiplicity(
        args.depth,
        window,
        samples=args.samples,
        sys=sys_,
        translate_factor=args.translate_factor,
    )
    rows = list(zip(report.sample_points, report.multiplicities))
    payload = {
        "config": _config_block(
            args,
            "tiling",
            window=args.window,
            samples=args.samples,
            translate_factor=args.translate_factor,
        ),
        "validation": validation,
        "tiling": report.as_dict(),
    }
    _emit(args, payload, csv_header=["x", "multiplicity"], csv_rows=rows)
    return 0 if report.uniform else 2


def _cmd_hardy(args) -> int:
    sys_, validation = _load_validated(args)
    m = FractalMeasure(sys_)
    spec = enumerate_spectrum(sys_, args.depth)
    coeffs = _parse_coeffs(args.coeffs)
    report = hardy_roundtrip(m, spec, coeffs, depth=args.quadrature_depth)
    payload = {
        "config": _config_block(
            args, "hardy", coeffs=args.coeffs, quadrature_depth=args.quadrature_depth
        ),
        "validation": validation,
        "roundtrip": report.as_dict(),
    }
    _emit(args, payload)
    ok = report.recon_error <= args.max_error and report.parseval_defect <= args.max_error
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalspec",
        description="Self-similar measures: orthogonality, completeness, contraction certificates.",
        epilog=(
            "Outputs are deterministic for identical configurations (seeds "
            "included); floats are serialized with 17 significant digits. "
            "Grid work is vectorized in-process; set OMP_NUM_THREADS to cap "
            "the linear-algebra thread pool."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", required=True, help="JSON system file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("validate", help="structural checks on a system file")
    common(p)
    p.add_argument("--n-max", type=int, default=12, dest="n_max")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("fourier", help="transform of the invariant measure on a grid")
    common(p)
    p.add_argument("--grid", required=True, help="a:b:step per axis, comma separated")
    p.set_defaults(fn=_cmd_fourier)

    p = sub.add_parser("atoms", help="point cloud of the depth-K atomic approximation")
    common(p)
    p.add_argument("--depth", type=int, default=6)
    p.set_defaults(fn=_cmd_atoms)

    p = sub.add_parser("spectrum", help="enumerate the candidate frequency set")
    common(p)
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("orthogonality", help="pairwise inner products over the spectrum")
    common(p)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-9, help="pass threshold on |inner product|")
    p.set_defaults(fn=_cmd_orthogonality)

    p = sub.add_parser("completeness", help="grid scan of the completeness function Q")
    common(p)
    p.add_argument("--depth", type=int, default=2, help="starting enumeration depth")
    p.add_argument("--grid", default="0:1:0.01")
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--increment-tol", type=float, default=1e-4, dest="increment_tol")
    p.set_defaults(fn=_cmd_completeness)

    p = sub.add_parser("ruelle-bound", help="contraction bound plus empirical probe ratios")
    common(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", default=None, help="lo:hi per axis (default: attractor hull)")
    p.set_defaults(fn=_cmd_ruelle_bound)

    p = sub.add_parser("certify", help="orthonormal-basis certificate")
    common(p)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("classify", help="1-D odd/even dichotomy verdict")
    common(p, system=False)
    p.add_argument("--R", required=True, type=int)
    p.add_argument("--a", required=True, help="second digit of B = {0, a}; rationals as p/q")
    p.add_argument("--L", default=None, help="override frequency digits, comma separated")
    p.add_argument("--window", type=int, default=60)
    p.add_argument("--target", type=float, default=0.99)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("clique", help="exact maximum orthogonal clique in a window")
    common(p, system=False)
    p.add_argument("--R", required=True, type=int)
    p.add_argument("--a", required=True)
    p.add_argument("--L", default=None)
    p.add_argument("--window", type=int, default=60)
    p.add_argument("--zero-tol", type=float, default=1e-9, dest="zero_tol")
    p.set_defaults(fn=_cmd_clique)

    p = sub.add_parser("sweep", help="certificate sweep over scales r = 1..r_max")
    common(p)
    p.add_argument("--r-max", type=int, default=16, dest="r_max")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("tiling", help="tile-covering multiplicity over a window")
    common(p, system=False)
    p.add_argument("--system", default=None, help="optional system file (default: built-in example)")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--window", required=True, help="lo:hi")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--translate-factor", type=float, default=-2.0, dest="translate_factor")
    p.set_defaults(fn=_cmd_tiling)

    p = sub.add_parser("hardy", help="coefficient round-trip through the atomic quadrature")
    common(p)
    p.add_argument("--depth", type=int, default=1, help="spectrum depth carrying the coefficients")
    p.add_argument("--coeffs", required=True, help="lambda=value pairs, comma separated")
    p.add_argument("--quadrature-depth", type=int, default=10, dest="quadrature_depth")
    p.add_argument("--max-error", type=float, default=1e-6, dest="max_error")
    p.set_defaults(fn=_cmd_hardy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FractalSpecError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
