"""Command-line front end: ``specdet <subcommand> [options]``.

Exit codes: 0 success, 2 input error, 3 numerical nonconvergence.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .config import DEFAULT_CONFIG, NumericConfig
from .determinants import (
    AsymptoticSeries,
    CharFn,
    char_fn_asymptotic,
    char_fn_full,
    fredholm_det_inverse,
    fredholm_ratio_check,
    reg_det_full,
)
from .errors import ConvergenceError, InputError, SpecDetError
from .expansion import ThetaExpansion
from .l2 import flat_model, l2_log_det
from .spectrum import (
    SpectralSequence,
    circle_spectrum,
    integer_spectrum,
    kernel_split,
    load_spectrum,
)
from .surface import geodesic_log_product, identity_term, load_length_spectrum
from .tower import (
    CSV_HEADER,
    TowerSpec,
    det_convergence,
    det_convergence_with_kernels,
    gaps_nonincreasing,
    heat_diff_decay,
    heat_trace_convergence,
)
from .zeta import ZetaEvaluator, residue_at, residue_contour

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


# -- formatting -------------------------------------------------------------------

def fmt_number(x) -> str:
    """17 significant digits; complex numbers as a+bj, real when the imaginary part is 0."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    z = complex(x)
    if z.imag == 0.0:
        return format(z.real + 0.0, ".17g")
    return f"{z.real + 0.0:.17g}{z.imag + 0.0:+.17g}j"


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        return x
    z = complex(x)
    if z.imag == 0.0:
        return _json_float(z.real)
    return {"re": _json_float(z.real), "im": _json_float(z.imag)}


class _Num(str):
    """Marker for a number already formatted at 17 significant digits."""


_NUM_TAG = "\u0001"


def _json_float(v: float):
    return _Num(_NUM_TAG + format(v + 0.0, ".17g") + _NUM_TAG) if math.isfinite(v) else str(v)


def emit(header, rows, fmt: str = "csv", path=None, summary: dict | None = None) -> str:
    """Write a table as CSV (header + rows) or as a JSON document; returns the text."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_number(v) for v in row])
        text = buf.getvalue()
    elif fmt == "json":
        doc = dict(summary or {})
        doc["columns"] = list(header)
        doc["rows"] = [[_json_value(v) for v in row] for row in rows]
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        # unquote the pre-formatted numbers so they stay JSON numbers
        text = re.sub(r'"\\u0001([^"\\]*)\\u0001"', r"\1", text)
    else:
        raise InputError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {path}: {exc}") from exc
    return text


# -- argument helpers ------------------------------------------------------------------

def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_grid(text: str) -> np.ndarray:
    """'a:b:n' -> n equally spaced points from a to b (a < b, n >= 2)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must look like a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}") from exc
    if not (a < b and n >= 2):
        raise InputError("grid needs start < end and n >= 2")
    return np.linspace(a, b, n)


def parse_levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad level list {text!r}") from exc


def _lambdas(args) -> list[complex]:
    if args.lambda_grid is not None:
        return [complex(x) for x in parse_grid(args.lambda_grid)]
    if args.lam is not None:
        return [parse_complex(args.lam)]
    raise InputError("give --lambda or --lambda-grid")


def _config(args) -> NumericConfig:
    return DEFAULT_CONFIG.with_overrides(tol_rel=args.tol_rel, tol_abs=args.tol_abs)


def _load_expansion(args) -> ThetaExpansion | None:
    if args.expansion is None:
        return None
    try:
        doc = json.loads(Path(args.expansion).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read expansion: {exc}") from exc
    return ThetaExpansion.from_json(doc)


def _spectrum(args, default_full: bool = False) -> SpectralSequence:
    exp = _load_expansion(args)
    if args.spectrum is not None:
        seq = load_spectrum(args.spectrum)
        return seq.with_expansion(exp) if exp is not None else seq
    model = args.model or "integers"
    if model == "integers":
        seq = integer_spectrum()
    elif model == "circle":
        seq = circle_spectrum(args.L, include_zero=default_full)
    elif model == "circle-reduced":
        seq = circle_spectrum(args.L, include_zero=False)
    elif model == "circle-full":
        seq = circle_spectrum(args.L, include_zero=True)
    elif model == "sphere":
        from .surface import sphere_operator_spectrum
        seq = sphere_operator_spectrum()
    else:
        raise InputError(f"unknown model {model!r}")
    return seq.with_expansion(exp) if exp is not None else seq


# -- subcommands -------------------------------------------------------------------------

def cmd_regdet(args):
    cfg = _config(args)
    seq = _spectrum(args, default_full=True)
    split = kernel_split(seq)
    d = reg_det_full(split.reduced, None, cfg)
    rows = [[seq.name, split.kernel_dimension, d.value, d.log, d.error]]
    return ["model", "kernel_dim", "det", "log_det", "error"], rows, {"experiment": "regdet"}


def cmd_charfn(args):
    cfg = _config(args)
    seq = _spectrum(args, default_full=True)
    cf = CharFn(seq, config=cfg)
    rows = []
    for lam in _lambdas(args):
        d = char_fn_full(cf, lam, allow_cut=args.allow_cut)
        rows.append([lam, d.value, d.log, d.error, d.zero_order])
    return ["lambda", "value", "log_value", "error", "zero_order"], rows, {"experiment": "charfn"}


def cmd_fredholm(args):
    cfg = _config(args)
    seq = _spectrum(args)
    if args.method == "ratio":
        r = fredholm_ratio_check(seq, None, cfg)
        return ["lhs", "rhs", "rel_gap"], [[r.lhs, r.rhs, r.rel_gap]], {"experiment": "fredholm_ratio"}
    v = fredholm_det_inverse(seq, args.method, None, cfg)
    return ["method", "det_fredholm"], [[args.method, v]], {"experiment": "fredholm"}


def cmd_residues(args):
    cfg = _config(args)
    seq = _spectrum(args)
    ev = ZetaEvaluator(seq, None, cfg)
    if args.s is not None:
        poles = [parse_complex(args.s).real]
    else:
        poles = [-a for a, _ in ev.expansion.terms if not (a >= 0 and float(a).is_integer())]
    rows = []
    for s0 in poles:
        closed = residue_at(ev, -s0)
        contour = residue_contour(ev, -s0)
        rows.append([s0, closed, contour, abs(closed - contour)])
    return ["pole", "residue", "residue_contour", "difference"], rows, {"experiment": "residues"}


def cmd_asymptotics(args):
    cfg = _config(args)
    seq = _spectrum(args, default_full=True)
    keep = math.inf if args.alpha_keep is None else args.alpha_keep
    series = AsymptoticSeries.from_expansion(seq.expansion, keep)
    cf = CharFn(seq, config=cfg)
    rows = []
    for lam in _lambdas(args):
        mu = lam if args.imag == 0 else 1j * args.imag * lam
        exact = -char_fn_full(cf, mu).log
        approx, nxt = char_fn_asymptotic(series, lam, sign=args.imag)
        rows.append([lam, exact, approx, abs(exact - approx), nxt])
    return (["lambda", "minus_log_charfn", "expansion", "error", "next_term"], rows,
            {"experiment": "asymptotics", "params": {"alpha_keep": str(keep), "imag": args.imag}})


def _flat(args):
    if args.model in (None, "line"):
        return flat_model([args.L])
    if args.model == "flat":
        return flat_model([float(x) for x in args.lengths.split(",")])
    raise InputError(f"unknown L2 model {args.model!r}")


def cmd_l2det(args):
    cfg = _config(args)
    model = _flat(args)
    rows = []
    for lam in _lambdas(args):
        r = l2_log_det(model, lam, cfg)
        rows.append([lam, cmath.exp(r.value), r.value, r.error])
    return ["lambda", "det2", "log_det2", "error"], rows, {"experiment": "l2det"}


def cmd_tower(args):
    cfg = _config(args)
    if args.model not in (None, "circle", "torus"):
        raise InputError(f"unknown tower model {args.model!r}")
    lengths = [args.L] if args.model in (None, "circle") else [float(x) for x in args.lengths.split(",")]
    levels = parse_levels(args.levels) if args.levels else (1, 2, 4, 8, 16)
    tower = TowerSpec(tuple(lengths), levels, cfg)
    params = {"lengths": lengths, "levels": list(levels)}
    exp = args.experiment or ("heat" if args.t is not None else "det")
    if exp == "det":
        lam = _lambdas(args)[0]
        rows = det_convergence(tower, lam)
        verdict = "gaps nonincreasing" if gaps_nonincreasing(rows) else "gaps not monotone"
        params["lambda"] = fmt_number(lam)
    elif exp == "heat":
        if args.t is None:
            raise InputError("heat experiment needs --t")
        rows = heat_trace_convergence(tower, args.t)
        verdict = "gaps nonincreasing" if gaps_nonincreasing(rows) else "gaps not monotone"
        params["t"] = args.t
    elif exp == "envelope":
        env = heat_diff_decay(tower)
        header = ["C", "R", "violations"]
        return header, [[env.C, env.R, len(env.violations)]], {
            "experiment": "envelope", "params": params,
            "verdict": "envelope dominates all gaps" if env.holds else "envelope violated"}
    elif exp == "kernels":
        out = det_convergence_with_kernels(tower)
        rows = [[r.j, r.index, r.kernel_ratio, r.det_prime_root, r.limit] for r in out["rows"]]
        return (["j", "index", "kernel_ratio", "det_prime_root", "limit"], rows,
                {"experiment": "kernels", "params": params,
                 "verdict": f"uniform bound C={fmt_number(out['hypothesis'].C)}"})
    else:
        raise InputError(f"unknown experiment {exp!r}")
    table = [[r.j, r.index, r.value, r.limit, r.gap, r.error] for r in rows]
    return CSV_HEADER + ["error"], table, {"experiment": exp, "params": params, "verdict": verdict}


def cmd_surface(args):
    cfg = _config(args)
    if args.spectrum is None:
        raise InputError("surface needs --spectrum (length-spectrum JSON)")
    spec = load_length_spectrum(args.spectrum)
    genus = args.genus if args.genus is not None else spec.genus
    rows = []
    for lam in _lambdas(args):
        ident = identity_term(genus, lam, config=cfg)
        if spec.primitives:
            geo = geodesic_log_product(spec, lam)
            gval, tail = np.exp(geo.log), geo.tail_bound
        else:
            gval, tail = 1.0, 0.0
        rows.append([lam, ident, gval, ident * gval, tail])
    return (["lambda", "identity_term", "geodesic_product", "det", "tail_bound"], rows,
            {"experiment": "surface", "params": {"genus": genus}})


COMMANDS = {
    "regdet": cmd_regdet, "charfn": cmd_charfn, "fredholm": cmd_fredholm, "residues": cmd_residues,
    "asymptotics": cmd_asymptotics, "l2det": cmd_l2det, "tower": cmd_tower, "surface": cmd_surface,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="bundled model (integers, circle, circle-full, circle-reduced, "
                                        "sphere; line/flat for l2det; circle/torus for tower)")
    common.add_argument("--spectrum", help="spectrum JSON file")
    common.add_argument("--expansion", help="theta-expansion JSON file")
    common.add_argument("--lambda", dest="lam", help="spectral parameter (complex allowed, e.g. 2+3i)")
    common.add_argument("--lambda-grid", help="a:b:n grid of real lambda values")
    common.add_argument("--s", help="zeta argument / pole location")
    common.add_argument("--levels", help="comma-separated tower levels")
    common.add_argument("--L", type=float, default=2 * math.pi, help="circumference / period (default 2 pi)")
    common.add_argument("--lengths", default="1,1", help="comma-separated periods for flat/torus models")
    common.add_argument("--genus", type=int)
    common.add_argument("--tol-rel", type=float)
    common.add_argument("--tol-abs", type=float)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    p = argparse.ArgumentParser(prog="specdet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("regdet", parents=[common], help="regularized (reduced) determinant")
    c = sub.add_parser("charfn", parents=[common], help="characteristic function det(A + lambda)")
    c.add_argument("--allow-cut", action="store_true", help="evaluate on (-inf, 0] via continuation")
    f = sub.add_parser("fredholm", parents=[common], help="Fredholm determinant of 1 + A^-1")
    f.add_argument("--method", choices=("product", "exp_series", "ratio"), default="product")
    sub.add_parser("residues", parents=[common], help="zeta residues, closed form and contour")
    a = sub.add_parser("asymptotics", parents=[common], help="large-lambda expansion of -log det(A + lambda)")
    a.add_argument("--alpha-keep", type=float, help="keep expansion terms with alpha <= this")
    a.add_argument("--imag", type=int, choices=(-1, 0, 1), default=0, help="evaluate at +/- i lambda")
    sub.add_parser("l2det", parents=[common], help="L2-determinant of a flat model")
    t = sub.add_parser("tower", parents=[common], help="covering-tower convergence tables")
    t.add_argument("--t", type=float, help="heat time")
    t.add_argument("--experiment", choices=("det", "heat", "envelope", "kernels"))
    sub.add_parser("surface", parents=[common], help="hyperbolic-surface Euler product")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    for name in ("tol_rel", "tol_abs"):
        v = getattr(args, name)
        if v is not None and not v > 0:
            print(f"specdet: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        header, rows, summary = COMMANDS[args.command](args)
        emit(header, rows, args.format, args.out, summary)
    except ConvergenceError as exc:
        print(f"specdet: numerical nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, SpecDetError, OSError, ValueError) as exc:
        print(f"specdet: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
