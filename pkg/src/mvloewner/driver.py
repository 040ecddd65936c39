"""End-to-end fitting drivers: direct order detection and greedy adaptation.

The direct driver estimates per-variable degrees from single-variable
matrix ranks, selects support points, computes the weight vector (full
SVD or cascade) and assembles the model and its realization.  The
adaptive driver starts from a single support tuple (the componentwise
median of the union grids), then repeatedly promotes the coordinates of
the worst-error grid tuple into the support sets until the sweep error
drops below tolerance or no coordinate is promotable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cascade import (
    cascaded_nullspace,
    flop_cascade,
    flop_full,
    make_flop_report,
    optimal_variable_order,
)
from .errors import DegenerateNullspaceError, GridError, NotConvergedError
from .grids import Selection, check_disjoint
from .loewner import (
    DEFAULT_MEMORY_GUARD,
    DEFAULT_RANK_TOL,
    build_loewner_nd,
    detect_orders,
    nullspace_vector,
)
from .model import make_model, max_error
from .realize import build_realization, make_split, optimal_split


@dataclass(frozen=True)
class FitOptions:
    """Knobs shared by both drivers."""

    nullspace_method: str = "cascaded"  # "cascaded" | "full"
    variable_order: object = "auto"  # "auto" or explicit index sequence
    rel_tol: float = DEFAULT_RANK_TOL
    degrees: tuple | None = None
    order_sample_budget: int = 10
    seed: int = 0
    split: object = "first"  # "first" | "auto" | explicit right-index sequence
    memory_guard: int = DEFAULT_MEMORY_GUARD

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.nullspace_method not in ("cascaded", "full"):
            raise ValueError(f"unknown null-space method {self.nullspace_method!r}")


@dataclass
class FitResult:
    model: object
    realization: object
    report: object
    degrees: tuple
    weights: np.ndarray


@dataclass
class AdaptiveIteration:
    added: dict  # variable name -> promoted point (or absent)
    counts: tuple
    flops: int
    max_error: float
    argmax: tuple


@dataclass
class AdaptiveLog:
    method: str
    tolerance: float
    converged: bool = False
    iterations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "method": self.method,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "iterations": [
                {
                    "added": {k: [v.real, v.imag] for k, v in it.added.items()},
                    "k": list(it.counts),
                    "flops": it.flops,
                    "max_error": it.max_error,
                    "argmax": [[v.real, v.imag] for v in it.argmax],
                }
                for it in self.iterations
            ],
        }


def _require_disjoint(source):
    violations = check_disjoint(source)
    if violations:
        listing = ", ".join(f"{name}={value}" for name, value in violations[:5])
        raise GridError(f"interpolation points are not disjoint: {listing}")


def _resolve_order(opts, counts):
    if opts.variable_order == "auto" or opts.variable_order is None:
        return optimal_variable_order(counts)
    return tuple(int(i) for i in opts.variable_order)


def _resolve_split(opts, degrees):
    n = len(degrees)
    counts = tuple(d + 1 for d in degrees)
    if n == 1 or opts.split == "first":
        return make_split((0,), counts)
    if opts.split == "auto":
        return optimal_split(degrees)
    return make_split(tuple(int(i) for i in opts.split), counts)


def _weights_for_selection(source, selection, opts, order):
    """Weight vector for a selection, by the configured method.

    Returns ``(weights, report)`` with the weights normalized at the
    all-anchors entry (cascade) or the last entry (full SVD).
    """
    counts = selection.counts
    if opts.nullspace_method == "cascaded":
        result = cascaded_nullspace(
            source, selection=selection, order=order, rel_tol=opts.rel_tol
        )
        return result.weights, result.report
    lm = build_loewner_nd(source, selection, memory_guard=opts.memory_guard)
    result = nullspace_vector(lm, opts.rel_tol)
    if result.rank < math.prod(counts) - 1:
        raise DegenerateNullspaceError(
            f"null space of the full matrix has dimension "
            f"{math.prod(counts) - result.rank}; the chosen degrees are too "
            "high, reduce them",
        )
    return result.vector, make_flop_report(counts, order)


def fit_direct(source, opts=None):
    """Order detection, weight computation, model and realization in one pass."""
    opts = opts or FitOptions()
    _require_disjoint(source)
    if opts.degrees is not None:
        degrees = tuple(int(d) for d in opts.degrees)
    else:
        estimate = detect_orders(
            source, opts.order_sample_budget, opts.rel_tol, opts.seed
        )
        degrees = estimate.degrees
    counts = []
    for grid, d in zip(source.grids, degrees):
        available = grid.union_points.size
        k = d + 1
        # rows must supply rank k-1, and supports come from the column list
        limit = min(max(1, math.ceil(available / 2)), grid.column_points.size)
        if k > limit:
            warnings.warn(
                f"variable {grid.name!r}: degree {d} needs {k} support points but "
                f"only {grid.column_points.size} columns of {available} grid points "
                f"exist; clamping to {limit}",
                stacklevel=2,
            )
            k = limit
        counts.append(k)
    selection = Selection.spread_columns(source, counts)
    order = _resolve_order(opts, selection.counts)
    weights, report = _weights_for_selection(source, selection, opts, order)
    values = source.values_on_product(selection.col_points).reshape(-1)
    model = make_model(selection.col_points, weights, values, names=source.names)
    degrees_final = tuple(k - 1 for k in selection.counts)
    split = _resolve_split(opts, degrees_final)
    realization = build_realization(model, split)
    return FitResult(model, realization, report, degrees_final, weights)


def _selection_from_pools(grids, chosen):
    cols, rows = [], []
    for grid, picked in zip(grids, chosen):
        pool = grid.union_points
        mask = np.ones(pool.size, dtype=bool)
        col_list = []
        for value in picked:
            idx = int(np.nonzero(pool == value)[0][0])
            mask[idx] = False
            col_list.append(pool[idx])
        cols.append(np.asarray(col_list, dtype=complex))
        rows.append(pool[mask])
    return Selection(cols, rows)


def _square_nearest(selection):
    """Per variable, keep only the k rows nearest to the support set.

    Mid-adaptation weight systems are least-squares problems; local rows
    condition them far better than an arbitrary prefix, and the square
    shape matches the N**3 accounting convention.
    """
    rows = []
    for cols, pool in zip(selection.col_points, selection.row_points):
        if pool.size > cols.size:
            distances = np.min(np.abs(pool[:, None] - cols[None, :]), axis=1)
            rows.append(pool[np.argsort(distances, kind="stable")[: cols.size]])
        else:
            rows.append(pool)
    return Selection(selection.col_points, rows)


def fit_adaptive(source, tol, opts=None):
    """Greedy support enrichment until the grid sweep error meets ``tol``.

    Returns ``(model, log)``; raises :class:`NotConvergedError` (carrying
    the best model and the log) when every coordinate of the worst tuple
    is already a support point, or when promoting would leave a variable
    with fewer row points than supports.
    """
    opts = opts or FitOptions()
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    _require_disjoint(source)
    grids = source.grids
    chosen = [[complex(g.column_points[0])] for g in grids]
    log = AdaptiveLog(method=opts.nullspace_method, tolerance=float(tol))
    added = {g.name: chosen[l][0] for l, g in enumerate(grids)}
    best = None

    while True:
        selection = _square_nearest(_selection_from_pools(grids, chosen))
        counts = selection.counts
        order = _resolve_order(opts, counts)
        try:
            weights, _ = _weights_for_selection(source, selection, opts, order)
        except DegenerateNullspaceError as exc:
            raise NotConvergedError(
                f"weight computation became degenerate at supports {counts}: {exc}",
                best_model=None if best is None else best[1],
                log=log,
            ) from exc
        values = source.values_on_product(selection.col_points).reshape(-1)
        model = make_model(selection.col_points, weights, values, names=source.names)
        error, argmax = max_error(model, source)
        if opts.nullspace_method == "cascaded":
            flops = flop_cascade([counts[i] for i in order])
        else:
            flops = flop_full(counts)
        log.iterations.append(
            AdaptiveIteration(dict(added), counts, flops, error, argmax)
        )
        if best is None or error < best[0]:
            best = (error, model)
        if error <= tol:
            log.converged = True
            return model, log

        added = {}
        for l, grid in enumerate(grids):
            coordinate = argmax[l]
            if any(coordinate == value for value in chosen[l]):
                continue
            # a variable needs at least k-1 leftover points as rows
            pool_size = grid.union_points.size
            if pool_size - (len(chosen[l]) + 1) < len(chosen[l]):
                continue
            chosen[l].append(complex(coordinate))
            added[grid.name] = complex(coordinate)
        if not added:
            raise NotConvergedError(
                f"no coordinate of the worst tuple is promotable; best error "
                f"{best[0]:.3e} exceeds tolerance {tol:.3e}",
                best_model=best[1],
                log=log,
            )
