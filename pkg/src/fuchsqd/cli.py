"""Batch command-line front end.

Exit codes: 0 success, 1 bad input, 2 refused precondition (``D(r) >= 1``),
3 non-convergence, 4 a property check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import serialize
from .extend import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    IllConditionedError,
    RefusedError,
    extend_direct,
    extend_neumann,
)
from .fuchsian import R_STAR, FuchsianSeries, QDData, SeparationError, constant_table
from .groups import group_from_json
from .hypgeo import QuadratureError, sup_grid
from .perturb import DQElement, PerturbationSpec, perturbation_modulus, random_dq
from .quaddiff import extension_hyp_norm_profile
from .theta import EnumerationCapExceeded, enumerate_group, theta_profile

EXIT_OK, EXIT_BAD_INPUT, EXIT_REFUSED, EXIT_NO_CONVERGENCE, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4


class BadInput(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


def _positive(name):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"{name} must be positive and finite, got {text!r}")
        return v
    return parse


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_data(path: str | None) -> QDData:
    if path is None:
        raise BadInput("--input is required")
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise BadInput(f"{path} is not valid JSON: {exc}")
    try:
        return QDData.from_json(obj)
    except (KeyError, TypeError, IndexError) as exc:
        raise BadInput(f"{path} is not a QDData file: missing or malformed {exc}")


def _grid(R: float, step: float, n_theta: int):
    return sup_grid(R, step=step, n_theta=n_theta)


def _grid_csv(series: FuchsianSeries, R: float, step: float, n_theta: int) -> str:
    z, conf = _grid(R, step, n_theta)
    v = series(z)
    h = np.abs(v) * conf ** 2
    rows = zip(z.real, z.imag, v.real, v.imag, h)
    return serialize.csv_text(["z_re", "z_im", "sigma_re", "sigma_im", "hyp_norm"], rows)


# -- commands ---------------------------------------------------------------

def cmd_constants(args) -> int:
    rows = []
    for r in args.radii:
        t = constant_table(r)
        E = t.E if t.admissible else math.inf
        rows.append([r, t.A_half, t.B_half, t.C, t.D, E, "true" if t.admissible else "false",
                     R_STAR])
    _emit(serialize.csv_text(["r", "A_half", "B_half", "C", "D", "E", "admissible", "r_star"],
                             rows), args.output)
    return EXIT_OK


def cmd_profile(args) -> int:
    n = int(round(args.d_max / args.grid_step))
    d = np.arange(n + 1) * args.grid_step
    _emit(serialize.csv_text(["d", "sech4"], zip(d, extension_hyp_norm_profile(d))), args.output)
    return EXIT_OK


def cmd_interpolate(args) -> int:
    data = _load_data(args.input)
    R = args.R if args.R is not None else 2.0 * data.r
    _emit(_grid_csv(FuchsianSeries(data), R, args.grid_step, args.n_theta), args.output)
    return EXIT_OK


def cmd_extend(args) -> int:
    data = _load_data(args.input)
    try:
        result = extend_neumann(data, tol=args.tol, max_iter=args.max_iter)
    except RefusedError:
        if not args.override:
            raise
        result = extend_direct(data)
    out = result.to_json()
    if args.direct and result.method == "neumann":
        d = extend_direct(data)
        gap = float(np.max(np.abs(d.solved.hyp_values - result.solved.hyp_values), initial=0.0))
        out["direct_gap"] = gap
        out["direct_condition"] = d.condition
    _emit(serialize.dumps(out), args.output)
    if args.grid_output:
        R = args.R if args.R is not None else 2.0 * data.r
        _emit(_grid_csv(result.series, R, args.grid_step, args.n_theta), args.grid_output)
    if not result.converged:
        raise NotConverged(f"no convergence to tol {args.tol:g} in {result.iterations} "
                           f"iterations (last residual {result.residual_history[-1]:.3e})")
    return EXIT_OK


def _parse_poly(text: str) -> list[complex]:
    try:
        return [complex(s.strip().replace(" ", "")) for s in text.split(",")]
    except ValueError:
        raise BadInput(f"--poly must be comma-separated (complex) numbers, got {text!r}")


def cmd_theta(args) -> int:
    if args.group is not None:
        try:
            with open(args.group) as fh:
                gobj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise BadInput(f"cannot read group file {args.group}: {exc}")
    else:
        params = {"translation": args.translation} if args.group_kind == "schottky" else {}
        gobj = {"kind": args.group_kind, "params": params}
    try:
        g = group_from_json(gobj)
    except TypeError as exc:
        raise BadInput(f"bad group parameters: {exc}")
    f = _parse_poly(args.poly)
    if args.R >= 10:
        raise BadInput("--R must be below 10 for theta grids")
    en = enumerate_group(g, args.word_length)
    z, _ = _grid(args.R, args.grid_step, args.n_theta)
    rows = []
    for w in z:
        p = theta_profile(en, f, complex(w))
        v = p.value(args.word_length)
        rows.append((w.real, w.imag, v.real, v.imag, p.tail_estimate(args.word_length)))
    print("note: tail_estimate is a heuristic packing estimate, not a certified bound",
          file=sys.stderr)
    _emit(serialize.csv_text(["z_re", "z_im", "theta_re", "theta_im", "tail_estimate"], rows),
          args.output)
    return EXIT_OK


def cmd_perturb(args) -> int:
    if args.input is not None:
        data = _load_data(args.input)
        q = DQElement(data, args.C if args.C is not None else max(data.sup_norm, 1e-300))
    else:
        if args.r is None:
            raise BadInput("perturb needs --input or --r")
        q = random_dq(args.r, args.R + 2.0, C=args.C if args.C is not None else 1.0,
                      seed=args.seed)
    spec = PerturbationSpec(args.R, args.alpha)
    rep = perturbation_modulus(q, spec, trials=args.trials, seed=args.seed)
    out = {k: rep[k] for k in ("alpha", "R", "measured_max", "certified_bound", "trials", "seed")}
    out["components"] = rep["components"]
    out["violations"] = rep["violations"]
    out["measured"] = rep["measured"]
    _emit(serialize.dumps(out), args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_all
    lines = []
    ok = True
    for res in run_all(quick=args.quick):
        lines.append(res.line())
        print(res.line(), flush=True)
        ok &= res.passed
    if args.output:
        _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadInput(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fuchsqd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--output", "-o", help="output path (default: stdout)")
        if seed:
            sp.add_argument("--seed", type=_nonneg_int, default=0)

    sp = sub.add_parser("constants", help="A/B/C/D/E table for separations r")
    sp.add_argument("radii", nargs="+", type=_positive("r"))
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("profile", help="(d, sech^4 d) table")
    sp.add_argument("--d-max", type=_positive("--d-max"), default=5.0)
    sp.add_argument("--grid-step", type=_positive("--grid-step"), default=0.1)
    common(sp)
    sp.set_defaults(func=cmd_profile)

    def grid_opts(sp, step=0.25, n_theta=64):
        sp.add_argument("--R", type=_positive("--R"), default=None,
                        help="grid radius (hyperbolic; default 2r)")
        sp.add_argument("--grid-step", type=_positive("--grid-step"), default=step)
        sp.add_argument("--n-theta", type=_nonneg_int, default=n_theta)

    sp = sub.add_parser("interpolate", help="evaluate sigma(q) on a polar grid")
    sp.add_argument("--input", "-i")
    grid_opts(sp)
    common(sp)
    sp.set_defaults(func=cmd_interpolate)

    sp = sub.add_parser("extend", help="bounded extension by the Neumann iteration")
    sp.add_argument("--input", "-i")
    sp.add_argument("--tol", type=_positive("--tol"), default=DEFAULT_TOL)
    sp.add_argument("--max-iter", type=_nonneg_int, default=DEFAULT_MAX_ITER)
    sp.add_argument("--direct", action="store_true", help="cross-check with a dense solve")
    sp.add_argument("--override", action="store_true",
                    help="when D(r) >= 1, solve directly instead of refusing")
    sp.add_argument("--grid-output", help="also write the extension on a grid (CSV)")
    grid_opts(sp)
    common(sp)
    sp.set_defaults(func=cmd_extend)

    sp = sub.add_parser("theta", help="truncated Poincare theta series on a grid")
    sp.add_argument("--group", help="group JSON file")
    sp.add_argument("--group-kind", default="octagon-genus2",
                    choices=["octagon-genus2", "schottky", "triangle-237"])
    sp.add_argument("--translation", type=_positive("--translation"), default=2.0)
    sp.add_argument("--poly", default="1", help="coefficients of f, lowest degree first")
    sp.add_argument("--word-length", "-L", type=_nonneg_int, default=6)
    sp.add_argument("--R", type=_positive("--R"), default=1.0)
    sp.add_argument("--grid-step", type=_positive("--grid-step"), default=0.25)
    sp.add_argument("--n-theta", type=_nonneg_int, default=16)
    common(sp)
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("perturb", help="measure the continuity modulus")
    sp.add_argument("--input", "-i", help="QDData file (default: random data)")
    sp.add_argument("--r", type=_positive("--r"), default=None)
    sp.add_argument("--R", type=_positive("--R"), default=10.0)
    sp.add_argument("--alpha", type=float, default=1e-6)
    sp.add_argument("--C", type=_positive("--C"), default=None)
    sp.add_argument("--trials", type=_nonneg_int, default=100)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_perturb)

    sp = sub.add_parser("check", help="run the property suite")
    sp.add_argument("--quick", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except BadInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    try:
        return args.func(args)
    except RefusedError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (NotConverged, IllConditionedError, QuadratureError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (BadInput, SeparationError, EnumerationCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
