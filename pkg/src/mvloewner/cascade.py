"""Recursive per-variable null-space cascade and flop/memory accounting.

Instead of one SVD on the full Q-by-K Loewner matrix, the weight vector is
assembled from a tree of single-variable null spaces: the first variable
in the recursion order is solved once with every other variable frozen at
its anchor support point, then each of its support points roots a
sub-cascade over the remaining variables.  Every node vector is
normalized to one at the anchor entry of its variable and scaled by the
parent coefficient, which makes the whole weight vector factor into
per-variable arrays (``DecoupledWeights``) recombined by a Hadamard
product of Kronecker-expanded factors.

Flop accounting follows the convention of charging ``k**3`` per k-column
null space, so a cascade over support counts ``(k_1, ..., k_n)`` costs

    sum_j k_j**3 * (k_1 * ... * k_{j-1}),

versus ``(k_1 * ... * k_n)**3`` for the full matrix.  Memory accounting
charges 16 bytes per complex entry; the cascade never stores more than
one ``k_max x k_max`` matrix at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNullspaceError, GridError
from .grids import Selection
from .loewner import BYTES_PER_ENTRY, DEFAULT_RANK_TOL, build_loewner_1d, nullspace_vector

_MAX_REANCHOR_PASSES = 8


# --- accounting ---------------------------------------------------------


def flop_cascade(counts):
    """Flop count of the cascade for support counts in recursion order."""
    counts = [int(k) for k in counts]
    if any(k < 1 for k in counts):
        raise ValueError("support counts must be >= 1")
    total = 0
    prefix = 1
    for k in counts:
        total += prefix * k**3
        prefix *= k
    return total


def flop_full(counts):
    """Flop count of one SVD on the full matrix: (prod k)**3."""
    counts = [int(k) for k in counts]
    if any(k < 1 for k in counts):
        raise ValueError("support counts must be >= 1")
    return math.prod(counts) ** 3


def flop_worst_case(k, n):
    """Cascade flops when all n variables share the same count k.

    Equals ``k**3 + k**4 + ... + k**(n+2)``; for ``k == 1`` the geometric
    sum degenerates to ``n``.
    """
    k = int(k)
    n = int(n)
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    if k == 1:
        return n
    return k**3 * (k**n - 1) // (k - 1)


def memory_estimate(counts, method):
    """Peak bytes of the weight computation, at 16 bytes per complex entry.

    ``full`` stores the square N-by-N matrix with ``N = prod(counts)``;
    ``cascaded`` never holds more than one ``k_max`` by ``k_max`` block.
    """
    counts = [int(k) for k in counts]
    if not counts:
        raise ValueError("counts must be nonempty")
    if method == "full":
        n_total = math.prod(counts)
        return BYTES_PER_ENTRY * n_total * n_total
    if method == "cascaded":
        k_max = max(counts)
        return BYTES_PER_ENTRY * k_max * k_max
    raise ValueError(f"unknown method {method!r}")


def optimal_variable_order(counts):
    """Variable permutation minimizing the cascade flops.

    Stable sort by descending support count: larger counts must be solved
    early, while their prefix multiplier is still small.
    """
    counts = [int(k) for k in counts]
    return tuple(sorted(range(len(counts)), key=lambda i: -counts[i]))


@dataclass(frozen=True)
class FlopReport:
    """Flop and byte accounting for cascaded versus full computation."""

    cascaded_flops: int
    full_flops: int
    cascaded_bytes_max: int
    full_bytes: int
    variable_order: tuple

    def to_dict(self):
        return {
            "cascaded_flops": self.cascaded_flops,
            "full_flops": self.full_flops,
            "cascaded_bytes_max": self.cascaded_bytes_max,
            "full_bytes": self.full_bytes,
            "variable_order": list(self.variable_order),
        }


def make_flop_report(counts, order):
    """Accounting for support counts given in original variable order."""
    order = tuple(int(i) for i in order)
    ordered = [counts[i] for i in order]
    return FlopReport(
        cascaded_flops=flop_cascade(ordered),
        full_flops=flop_full(counts),
        cascaded_bytes_max=memory_estimate(counts, "cascaded"),
        full_bytes=memory_estimate(counts, "full"),
        variable_order=order,
    )


# --- decoupled weights --------------------------------------------------


@dataclass(frozen=True)
class DecoupledWeights:
    """Per-variable weight factors produced by the cascade.

    ``order`` is the recursion order (a permutation of variable indices)
    and ``factors[l]`` the concatenated level-``l`` node vectors: length
    ``k_{o_1} * ... * k_{o_l}``, grouped as blocks of ``k_{o_l}`` in
    lexicographic order of the parent support indices.
    """

    order: tuple
    counts_in_order: tuple
    factors: tuple

    def __post_init__(self):
        expected = 1
        for level, k in enumerate(self.counts_in_order):
            expected *= k
            if self.factors[level].size != expected:
                raise GridError(
                    f"factor {level} has length {self.factors[level].size}, expected {expected}"
                )


def recombine(decoupled):
    """Reassemble the full weight vector from per-variable factors.

    Each factor is Kronecker-expanded with an all-ones vector to the full
    length and the expansions are multiplied entrywise; the result is
    returned flattened in original variable order (variable 0 slowest).
    """
    ks = decoupled.counts_in_order
    total = math.prod(ks)
    acc = np.ones(total, dtype=complex)
    for level, factor in enumerate(decoupled.factors):
        rest = math.prod(ks[level + 1 :])
        acc = acc * np.repeat(factor, rest)
    tensor = acc.reshape(ks)
    axes = [decoupled.order.index(v) for v in range(len(ks))]
    return np.transpose(tensor, axes).reshape(-1)


# --- the cascade --------------------------------------------------------


@dataclass(frozen=True)
class CascadeResult:
    weights: np.ndarray
    decoupled: DecoupledWeights
    report: FlopReport
    anchors: tuple  # anchor support index per variable, original order


class _ReanchorRequest(Exception):
    def __init__(self, variable, index):
        self.variable = variable
        self.index = index


def _node_rows(selection, variable):
    """Row points for a 1-D sub-problem: square if possible, else k-1 rows.

    When more rows are available than needed, the ones nearest to the
    variable's support set are kept; locality conditions the divided
    differences far better than an arbitrary prefix when the data is not
    yet resolved at the current support counts.
    """
    k = selection.counts[variable]
    rows = selection.row_points[variable]
    if rows.size > k:
        cols = selection.col_points[variable]
        distances = np.min(np.abs(rows[:, None] - cols[None, :]), axis=1)
        return rows[np.argsort(distances, kind="stable")[:k]]
    if rows.size >= k - 1:
        return rows
    raise GridError(
        f"variable {variable} has {rows.size} row points, "
        f"need at least {k - 1} for {k} support points"
    )


def cascaded_nullspace(
    source,
    degrees=None,
    selection=None,
    order=None,
    rel_tol=DEFAULT_RANK_TOL,
    anchors=None,
):
    """Weight vector of the n-D Loewner matrix via the 1-D cascade.

    Parameters
    ----------
    source : DataSource
    degrees : sequence of int, optional
        Degrees per variable; support counts become ``degrees + 1`` over
        evenly spread column points.  Ignored when ``selection`` is given.
    selection : Selection, optional
        Explicit per-variable column/row points.
    order : sequence of int, optional
        Recursion order over variable indices; defaults to descending
        support count (the flop-optimal order).
    rel_tol : float
        Rank tolerance for the 1-D null spaces.
    anchors : sequence of int, optional
        Initial anchor support index per variable; defaults to the last
        column point.  A variable whose anchor weight vanishes is
        re-anchored at the largest entry and the cascade restarts.

    Returns
    -------
    CascadeResult
        Assembled weights (flattened variable 0 slowest, anchor entries
        normalized so the all-anchor entry is one), the per-variable
        factors, the flop/byte report, and the anchors finally used.

    Raises
    ------
    DegenerateNullspaceError
        When a sub-problem has an ambiguous null space (dimension > 1),
        naming the frozen combination, or when re-anchoring cycles.
    """
    if selection is None:
        if degrees is None:
            raise ValueError("need either degrees or an explicit selection")
        selection = Selection.spread_columns(source, [d + 1 for d in degrees])
    counts = selection.counts
    n = len(counts)
    if order is None:
        order = optimal_variable_order(counts)
    else:
        order = tuple(int(i) for i in order)
        if sorted(order) != list(range(n)):
            raise ValueError(f"order {order!r} is not a permutation of 0..{n - 1}")
    row_sets = [_node_rows(selection, l) for l in range(n)]

    if anchors is None:
        anchors = [counts[l] - 1 for l in range(n)]
    else:
        anchors = [int(a) % counts[l] for l, a in enumerate(anchors)]

    def node_vector(level, frozen_support):
        variable = order[level]
        frozen = {}
        for lev in range(n):
            var = order[lev]
            if lev < level:
                frozen[var] = selection.col_points[var][frozen_support[lev]]
            elif lev > level:
                frozen[var] = selection.col_points[var][anchors[var]]
        cols = selection.col_points[variable]
        rows = row_sets[variable]

        def values_at(points):
            per_var = [
                points if l == variable else np.asarray([frozen[l]])
                for l in range(n)
            ]
            return source.values_on_product(per_var).reshape(-1)

        lm = build_loewner_1d(cols, rows, values_at(cols), values_at(rows))
        result = nullspace_vector(lm, rel_tol, anchor=anchors[variable])
        if result.rank < cols.size - 1:
            frozen_desc = {source.grids[l].name: frozen[l] for l in sorted(frozen)}
            raise DegenerateNullspaceError(
                f"ambiguous 1-D null space along variable "
                f"{source.grids[variable].name!r} ({result.note})",
                context=frozen_desc,
            )
        if result.anchor != anchors[variable]:
            raise _ReanchorRequest(variable, result.anchor)
        return result.vector

    factors = None
    for _ in range(max(_MAX_REANCHOR_PASSES, 2 * sum(counts))):
        factors = [[] for _ in range(n)]

        def descend(level, frozen_support):
            vector = node_vector(level, frozen_support)
            factors[level].append(vector)
            if level + 1 < n:
                for j in range(counts[order[level]]):
                    descend(level + 1, frozen_support + (j,))

        try:
            descend(0, ())
        except _ReanchorRequest as request:
            anchors[request.variable] = request.index
            continue
        break
    else:
        raise DegenerateNullspaceError(
            "re-anchoring did not stabilize; the weight vector appears to "
            "vanish on every probed anchor fiber"
        )

    decoupled = DecoupledWeights(
        order=order,
        counts_in_order=tuple(counts[i] for i in order),
        factors=tuple(np.concatenate(level) for level in factors),
    )
    weights = recombine(decoupled)
    report = make_flop_report(counts, order)
    return CascadeResult(weights, decoupled, report, tuple(anchors))
