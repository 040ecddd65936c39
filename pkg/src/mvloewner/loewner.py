"""Loewner matrices, their Sylvester characterization, and SVD null spaces.

The n-D Loewner matrix over a selection of column points ``lambda`` and
row points ``mu`` has entries

    L[i, j] = (v_i - w_j) / prod_l (mu_l[i_l] - lambda_l[j_l]),

where ``w``/``v`` are the samples at the column/row tuples and multi-
indices are flattened row-major with variable 0 slowest.  The same
flattening orders the diagonal Kronecker factors ``Lambda_l``/``M_l``,
the data row ``W`` and data column ``V`` of the coupled Sylvester
equations that the matrix satisfies, which :func:`sylvester_residual`
verifies numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, MemoryGuardError
from .grids import Selection

DEFAULT_RANK_TOL = 1e-8
BYTES_PER_ENTRY = 16  # one complex double
DEFAULT_MEMORY_GUARD = 256 * 2**20


@dataclass(frozen=True)
class LoewnerMatrix:
    """Dense Loewner matrix plus the point selection it was built from."""

    entries: np.ndarray
    col_points: tuple
    row_points: tuple

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class SylvesterOperands:
    """Diagonal Kronecker factors and data vectors of the Sylvester system.

    ``lambda_diags[l]`` / ``mu_diags[l]`` hold the diagonals of the K-by-K
    and Q-by-Q factors for variable ``l``; ``w`` (length K) and ``v``
    (length Q) are the flattened column/row samples.
    """

    lambda_diags: tuple
    mu_diags: tuple
    w: np.ndarray
    v: np.ndarray

    def lambda_matrix(self, l):
        return np.diag(self.lambda_diags[l])

    def mu_matrix(self, l):
        return np.diag(self.mu_diags[l])


def _check_disjoint_1d(col_pts, row_pts):
    cross = np.subtract.outer(np.asarray(row_pts, complex), np.asarray(col_pts, complex))
    if np.any(cross == 0):
        raise GridError("coincident column and row points")
    return cross


def build_loewner_1d(col_pts, row_pts, col_vals, row_vals):
    """Single-variable Loewner matrix with entries (v_i - w_j)/(mu_i - lambda_j)."""
    col_pts = np.asarray(col_pts, dtype=complex)
    row_pts = np.asarray(row_pts, dtype=complex)
    w = np.asarray(col_vals, dtype=complex)
    v = np.asarray(row_vals, dtype=complex)
    if col_pts.size != w.size or row_pts.size != v.size:
        raise GridError("point and value lists must have matching lengths")
    diffs = _check_disjoint_1d(col_pts, row_pts)
    entries = (v[:, None] - w[None, :]) / diffs
    return LoewnerMatrix(entries, (col_pts,), (row_pts,))


def _kron_of(vectors_or_matrices):
    out = vectors_or_matrices[0]
    for item in vectors_or_matrices[1:]:
        out = np.kron(out, item)
    return out


def estimate_dense_bytes(selection):
    """Bytes needed by the dense Loewner matrix of a selection."""
    k_total = int(np.prod(selection.counts))
    q_total = int(np.prod(selection.row_counts))
    return BYTES_PER_ENTRY * k_total * q_total


def build_loewner_nd(source, selection=None, memory_guard=DEFAULT_MEMORY_GUARD):
    """Dense n-D Loewner matrix of ``source`` over a point selection.

    Parameters
    ----------
    source : DataSource
    selection : Selection, optional
        Defaults to all stored columns versus all stored rows.
    memory_guard : int
        Maximum dense size in bytes; a larger build raises
        :class:`MemoryGuardError` carrying the estimate.
    """
    if selection is None:
        selection = Selection.full(source)
    estimate = estimate_dense_bytes(selection)
    if memory_guard is not None and estimate > memory_guard:
        raise MemoryGuardError(estimate, memory_guard)
    diff_mats = [
        _check_disjoint_1d(cols, rows)
        for cols, rows in zip(selection.col_points, selection.row_points)
    ]
    w = source.values_on_product(selection.col_points).reshape(-1)
    v = source.values_on_product(selection.row_points).reshape(-1)
    entries = (v[:, None] - w[None, :]) / _kron_of(diff_mats)
    return LoewnerMatrix(entries, selection.col_points, selection.row_points)


def build_sylvester_operands(source, selection=None):
    """Kronecker-diagonal factors and data vectors matching build_loewner_nd."""
    if selection is None:
        selection = Selection.full(source)
    counts = selection.counts
    row_counts = selection.row_counts
    n = len(counts)
    lambda_diags = []
    mu_diags = []
    for l in range(n):
        lam_parts = [
            selection.col_points[i] if i == l else np.ones(counts[i], dtype=complex)
            for i in range(n)
        ]
        mu_parts = [
            selection.row_points[i] if i == l else np.ones(row_counts[i], dtype=complex)
            for i in range(n)
        ]
        lambda_diags.append(_kron_of(lam_parts))
        mu_diags.append(_kron_of(mu_parts))
    w = source.values_on_product(selection.col_points).reshape(-1)
    v = source.values_on_product(selection.row_points).reshape(-1)
    return SylvesterOperands(tuple(lambda_diags), tuple(mu_diags), w, v)


def sylvester_residual(lm, ops):
    """Relative residual of the coupled Sylvester chain.

    Starting from ``X = M_0 L - L Lambda_0`` the chain applies
    ``X <- M_l X - X Lambda_l`` for l = 1, ..., n-1; the result must equal
    ``V R - L W`` (outer difference of the data vectors).  Returns the
    Frobenius-norm residual relative to ``||V R - L W||``.
    """
    x = ops.mu_diags[0][:, None] * lm.entries - lm.entries * ops.lambda_diags[0][None, :]
    for l in range(1, len(ops.lambda_diags)):
        x = ops.mu_diags[l][:, None] * x - x * ops.lambda_diags[l][None, :]
    target = ops.v[:, None] - ops.w[None, :]
    denom = np.linalg.norm(target)
    num = np.linalg.norm(x - target)
    if denom == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return float(num / denom)


@dataclass(frozen=True)
class NullspaceResult:
    """Smallest right singular vector with rank and gap diagnostics.

    ``vector`` is normalized so its anchor entry equals one; if the
    requested anchor entry was negligible the vector is re-anchored at its
    largest entry and ``anchor`` reports the index actually used.
    ``degenerate`` is set whenever the null-space dimension is not exactly
    one at the given tolerance (no null vector, or more than one).
    """

    vector: np.ndarray
    rank: int
    sigma_min: float
    sigma_next: float
    anchor: int
    degenerate: bool
    note: str = ""


def nullspace_vector(matrix, rel_tol=DEFAULT_RANK_TOL, anchor=-1):
    """Null-space direction of a dense matrix via full SVD.

    Parameters
    ----------
    matrix : (q, k) ndarray or LoewnerMatrix
    rel_tol : float
        Numerical-rank threshold relative to the largest singular value.
    anchor : int
        Entry to normalize to one (negative indices allowed).  An anchor
        entry below ``1e-10`` times the largest entry triggers
        re-anchoring at the max-magnitude entry.
    """
    if isinstance(matrix, LoewnerMatrix):
        matrix = matrix.entries
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    q, k = matrix.shape
    if k == 0 or q == 0:
        raise GridError("empty matrix has no null-space direction")
    _, sigma, vh = np.linalg.svd(matrix)
    smax = sigma[0] if sigma.size else 0.0
    rank = int(np.count_nonzero(sigma > rel_tol * smax)) if smax > 0 else 0
    vector = np.conj(vh[-1])
    sigma_min = float(sigma[-1]) if sigma.size else 0.0
    sigma_next = float(sigma[-2]) if sigma.size > 1 else math.inf
    nullity = k - rank
    degenerate = nullity != 1
    note = ""
    if smax == 0.0:
        degenerate = True
        note = "all-zero matrix; vector is arbitrary"
        if k == 1:
            # a single support point has the unique trivial weight
            degenerate = False
            note = ""
    elif nullity == 0:
        note = "no null vector at this tolerance; smallest singular direction returned"
    elif nullity > 1:
        note = f"null space has dimension {nullity}"

    anchor_idx = anchor % k
    peak = float(np.max(np.abs(vector)))
    if abs(vector[anchor_idx]) < 1e-10 * peak:
        anchor_idx = int(np.argmax(np.abs(vector)))
    vector = vector / vector[anchor_idx]
    return NullspaceResult(vector, rank, sigma_min, sigma_next, anchor_idx, degenerate, note)


@dataclass(frozen=True)
class OrderEstimate:
    """Detected per-variable degrees plus saturation flags.

    ``saturated[l]`` means the rank hit the size of the probing matrices,
    so the true degree along variable ``l`` may be higher than reported.
    """

    degrees: tuple
    saturated: tuple


def detect_orders(source, sample_budget=10, rel_tol=DEFAULT_RANK_TOL, seed=0):
    """Estimate the rational degree along each variable.

    For each variable the single-variable Loewner matrix is built for the
    all-first-column frozen combination plus up to ``sample_budget``
    random frozen combinations of the other variables (drawn from their
    union grids, seeded); the degree is the maximum numerical rank seen.
    """
    rng = np.random.default_rng(seed)
    n = source.n_vars
    degrees = []
    saturated = []
    for l in range(n):
        grid = source.grids[l]
        cols = grid.column_points
        rows = grid.row_points
        if cols.size + rows.size < 2:
            raise GridError(f"variable {grid.name!r} needs at least two points to reveal a rank")
        if rows.size == 0:
            degrees.append(0)
            saturated.append(True)
            continue
        combos = [{i: source.grids[i].column_points[0] for i in range(n) if i != l}]
        for _ in range(sample_budget):
            combo = {}
            for i in range(n):
                if i == l:
                    continue
                pool = source.grids[i].union_points
                combo[i] = complex(pool[rng.integers(pool.size)])
            if combo not in combos:
                combos.append(combo)
        best = 0
        for combo in combos:
            values = source.fiber(l, combo)
            lm = build_loewner_1d(cols, rows, values[: cols.size], values[cols.size :])
            result = nullspace_vector(lm, rel_tol)
            best = max(best, result.rank)
        degrees.append(best)
        saturated.append(best >= min(cols.size, rows.size))
    return OrderEstimate(tuple(degrees), tuple(saturated))
