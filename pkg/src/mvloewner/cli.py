"""Command-line interface.

Subcommands mirror the library drivers: ``order-detect``, ``fit``,
``fit-adaptive``, ``eval``, ``realize``, ``verify``, ``flops`` and
``plot-data``.  All structured output is JSON (complex numbers as
``[re, im]`` pairs), printed complex scalars use ``re+imi`` with 12
significant digits, and files are written atomically.  Exit codes:
0 success, 2 input error, 3 non-convergence, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .cascade import flop_cascade, flop_full, memory_estimate
from .driver import FitOptions, fit_adaptive, fit_direct
from .errors import (
    DegenerateNullspaceError,
    MvLoewnerError,
    NotConvergedError,
    PoleError,
)
from .grids import Selection, load_source
from .loewner import build_loewner_nd, build_sylvester_operands, detect_orders, sylvester_residual
from .model import eval_model, load_model, max_error, model_to_dict
from .realize import (
    build_realization,
    eval_realization,
    load_realization,
    make_split,
    optimal_split,
    save_realization,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_DEGENERATE = 4


def format_complex(value):
    """``re+imi`` with 12 significant digits, sign always shown on the imaginary part."""
    value = complex(value)
    real = value.real + 0.0  # drop negative zero
    imag = value.imag + 0.0
    return f"{real:.12g}{imag:+.12g}i"


def write_json_atomic(document, path):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=1)
            fh.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def write_text_atomic(text, path):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _load_input_source(args):
    if getattr(args, "data", None):
        return load_source(args.data)
    if getattr(args, "oracle", None):
        return load_source(args.oracle)
    raise MvLoewnerError("one of --data or --oracle is required")


def _parse_degrees(text):
    return tuple(int(part) for part in text.split(","))

def _parse_order(text, names):
    parts = [p.strip() for p in text.split(",")]
    if all(p in names for p in parts):
        return tuple(names.index(p) for p in parts)
    return tuple(int(p) - 1 for p in parts)


def _parse_point(text):
    return tuple(
        complex(part.strip().replace("i", "j").replace("I", "j"))
        for part in text.split(",")
    )


def _fit_options(args, names=None):
    method = getattr(args, "method", "cascade")
    order = getattr(args, "order", None)
    degrees = getattr(args, "degrees", None)
    return FitOptions(
        nullspace_method="cascaded" if method in ("cascade", "cascaded") else "full",
        variable_order="auto" if order is None else _parse_order(order, names or []),
        degrees=_parse_degrees(degrees) if degrees else None,
        order_sample_budget=getattr(args, "budget", 10),
        rel_tol=getattr(args, "tol_rank", None) or 1e-8,
        seed=getattr(args, "seed", 0),
    )


# --- subcommands --------------------------------------------------------


def cmd_order_detect(args):
    source = load_source(args.data)
    estimate = detect_orders(source, args.budget, args.tol, args.seed)
    document = {"degrees": list(estimate.degrees)}
    if any(estimate.saturated):
        document["saturated"] = [source.names[i] for i, s in enumerate(estimate.saturated) if s]
    print(json.dumps(document))
    return EXIT_OK


def cmd_fit(args):
    source = _load_input_source(args)
    opts = _fit_options(args, source.names)
    result = fit_direct(source, opts)
    write_json_atomic(model_to_dict(result.model), args.out)
    report = result.report.to_dict()
    report["degrees"] = list(result.degrees)
    report["flops"] = (
        report["cascaded_flops"] if opts.nullspace_method == "cascaded" else report["full_flops"]
    )
    print(json.dumps(report))
    return EXIT_OK


def cmd_fit_adaptive(args):
    source = _load_input_source(args)
    opts = _fit_options(args, source.names)
    try:
        model, log = fit_adaptive(source, args.tol, opts)
    except NotConvergedError as exc:
        if exc.best_model is not None:
            write_json_atomic(model_to_dict(exc.best_model), args.out)
        if args.log and exc.log is not None:
            write_json_atomic(exc.log.to_dict(), args.log)
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    write_json_atomic(model_to_dict(model), args.out)
    if args.log:
        write_json_atomic(log.to_dict(), args.log)
    final = log.iterations[-1]
    print(
        json.dumps(
            {
                "converged": log.converged,
                "k": list(final.counts),
                "iterations": len(log.iterations),
                "max_error": final.max_error,
                "flops": [it.flops for it in log.iterations],
            }
        )
    )
    return EXIT_OK


def cmd_eval(args):
    model = load_model(args.model)
    point = _parse_point(args.point)
    value = eval_model(model, point)
    print(format_complex(value))
    return EXIT_OK


def _split_from_arg(text, model):
    names = list(model.variable_names)
    counts = model.counts
    if text == "auto":
        if len(counts) == 1:
            return make_split((0,), counts)
        return optimal_split([k - 1 for k in counts])
    if "|" in text:
        right_text, _, left_text = text.partition("|")
        right = _parse_order(right_text, names)
        left = _parse_order(left_text, names)
        return make_split(right, counts, left)
    return make_split(_parse_order(text, names), counts)


def cmd_realize(args):
    model = load_model(args.model)
    split = _split_from_arg(args.split, model)
    realization = build_realization(model, split)
    save_realization(realization, args.out)
    print(
        json.dumps(
            {"m": realization.order, "kappa": split.kappa, "ell": split.ell}
        )
    )
    return EXIT_OK


def cmd_verify(args):
    source = _load_input_source(args)
    model = load_model(args.model)
    checks = {}

    support_values = source.values_on_product(model.support_points).reshape(-1)
    mismatches = []
    for flat, value in enumerate(support_values):
        idx = np.unravel_index(flat, model.counts)
        point = tuple(model.support_points[l][i] for l, i in enumerate(idx))
        if abs(model.weights_c[flat]) < 1e-12 * np.max(np.abs(model.weights_c)):
            continue
        try:
            produced = eval_model(model, point)
        except PoleError:
            mismatches.append(float("inf"))
            continue
        scale = max(1.0, abs(value))
        mismatches.append(abs(produced - value) / scale)
    interp_err = float(max(mismatches)) if mismatches else 0.0
    checks["interpolation"] = {"max_relative_error": interp_err, "ok": bool(interp_err <= 1e-9)}

    try:
        rows = []
        for grid, support in zip(source.grids, model.support_points):
            pool = grid.union_points
            keep = np.asarray([p for p in pool if not np.any(p == support)], dtype=complex)
            rows.append(keep)
        selection = Selection(list(model.support_points), rows)
        lm = build_loewner_nd(source, selection)
        ops = build_sylvester_operands(source, selection)
        residual = float(sylvester_residual(lm, ops))
        checks["sylvester"] = {"relative_residual": residual, "ok": bool(residual <= 1e-12)}
    except MvLoewnerError as exc:
        checks["sylvester"] = {"skipped": str(exc), "ok": True}

    total_tuples = int(np.prod([g.union_points.size for g in source.grids]))
    if total_tuples <= 100_000:
        error, location = max_error(model, source)
    else:
        # huge oracle grids: sweep a seeded sample of tuples instead
        rng = np.random.default_rng(args.seed)
        error, location = -1.0, None
        for _ in range(5000):
            point = tuple(
                g.union_points[rng.integers(g.union_points.size)] for g in source.grids
            )
            try:
                mismatch = abs(eval_model(model, point) - source.value_at(point))
            except PoleError:
                mismatch = float("inf")
            if mismatch > error:
                error, location = mismatch, point
    scale = 1.0 + float(
        np.max(np.abs(source.tableau.values))
        if hasattr(source, "tableau")
        else np.abs(source.value_at(location))
    )
    checks["sweep"] = {
        "max_error": float(error),
        "argmax": [[float(v.real), float(v.imag)] for v in location],
        "sampled": bool(total_tuples > 100_000),
        "ok": bool(np.isfinite(error) and error <= args.tol * scale),
    }

    if args.realization:
        realization = load_realization(args.realization)
        worst = 0.0
        rng = np.random.default_rng(args.seed)
        for _ in range(25):
            point = tuple(
                complex(rng.uniform(-1, 1), 0) * 0.3 + support[rng.integers(support.size)] * 0.7
                for support in model.support_points
            )
            try:
                a = eval_model(model, point)
                b = eval_realization(realization, point)
            except PoleError:
                continue
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
        checks["realization"] = {"max_relative_mismatch": float(worst), "ok": bool(worst <= 1e-8)}

    ok = all(entry["ok"] for entry in checks.values())
    print(json.dumps({"ok": ok, "checks": checks}))
    return EXIT_OK if ok else EXIT_DEGENERATE


def cmd_flops(args):
    degrees = _parse_degrees(args.degrees)
    counts = [d + 1 for d in degrees]
    if args.order:
        order = _parse_order(args.order, [])
        ordered = [counts[i] for i in order]
    else:
        ordered = counts
    document = {
        "cascaded_flops": flop_cascade(ordered),
        "full_flops": flop_full(counts),
        "cascaded_bytes_max": memory_estimate(counts, "cascaded"),
        "full_bytes": memory_estimate(counts, "full"),
    }
    print(json.dumps(document))
    return EXIT_OK


def _parse_sweep(text):
    name, _, spec = text.partition("=")
    lo, hi, count = spec.split(":")
    return name.strip(), float(lo), float(hi), int(count)


def cmd_plot_data(args):
    model = load_model(args.model)
    names = list(model.variable_names)
    name, lo, hi, count = _parse_sweep(args.sweep)
    if count < 2:
        raise MvLoewnerError("sweep needs at least two samples")
    if name not in names:
        raise MvLoewnerError(f"unknown sweep variable {name!r}")
    frozen = {}
    if args.frozen:
        for item in args.frozen.split(","):
            key, _, value = item.partition("=")
            frozen[key.strip()] = complex(value.replace("i", "j"))
    sweep_index = names.index(name)
    lines = ["point,re,im,abs"]
    for value in np.linspace(lo, hi, count):
        point = []
        for l, var in enumerate(names):
            if l == sweep_index:
                point.append(complex(value))
            elif var in frozen:
                point.append(frozen[var])
            else:
                raise MvLoewnerError(f"variable {var!r} is neither swept nor frozen")
        try:
            sample = eval_model(model, point)
            lines.append(f"{value:.12g},{sample.real:.12g},{sample.imag:.12g},{abs(sample):.12g}")
        except PoleError:
            lines.append(f"{value:.12g},inf,inf,inf")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(text, args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- argument parsing ---------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mvloewner",
        description="Multivariate rational fitting in the Loewner framework.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("order-detect", help="estimate per-variable rational degrees")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_order_detect)

    p = sub.add_parser("fit", help="direct fit: detect orders, compute weights, save model")
    p.add_argument("--data")
    p.add_argument("--oracle")
    p.add_argument("--degrees")
    p.add_argument("--method", choices=["full", "cascade"], default="cascade")
    p.add_argument("--order", help="recursion order, variable names or 1-based indices")
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fit-adaptive", help="greedy adaptive fit to a tolerance")
    p.add_argument("--data")
    p.add_argument("--oracle")
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--method", choices=["full", "cascade"], default="cascade")
    p.add_argument("--order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_fit_adaptive)

    p = sub.add_parser("eval", help="evaluate a saved model at one point")
    p.add_argument("--model", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("realize", help="export the generalized realization of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--split", default="auto", help="'auto', right names, or 'right|left'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("verify", help="consistency checks of model against data")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.add_argument("--oracle")
    p.add_argument("--realization")
    p.add_argument("--tol", type=float, default=1e-8, help="sweep-error budget, relative to the data scale")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("flops", help="flop and memory accounting for given degrees")
    p.add_argument("--degrees", required=True)
    p.add_argument("--order")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("plot-data", help="CSV response sweep of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--sweep", required=True, help="var=lo:hi:count")
    p.add_argument("--frozen", help="comma-separated var=value pairs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot_data)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateNullspaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NotConvergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (MvLoewnerError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
