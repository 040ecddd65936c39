"""Seeded generators of random rational data with known ground truth.

A random barycentric model is itself a rational function whose weight
vector is known exactly, which makes it the cleanest oracle for checking
that the Loewner pipeline recovers weights up to scale.
"""

import numpy as np

from mvloewner import DenseSource, PoleError, Tableau, VariableGrid, eval_model, make_model


def random_support_and_rows(rng, k, q, lo=-1.0, hi=1.0):
    """Distinct, interleaved support and row points inside [lo, hi]."""
    base = np.linspace(lo, hi, 2 * (k + q) + 1)[1:]
    picks = rng.choice(base.size, size=k + q, replace=False)
    jitter = (hi - lo) * 0.05 * rng.uniform(-1, 1, size=k + q) / (2 * (k + q))
    points = base[picks] + jitter
    return points[:k], points[k:]


def random_model(rng, degrees, complex_weights=True):
    """Barycentric model with weights bounded away from zero."""
    supports = []
    rows = []
    for d in degrees:
        k = d + 1
        cols, extra = random_support_and_rows(rng, k, k)
        supports.append(cols)
        rows.append(extra)
    total = int(np.prod([d + 1 for d in degrees]))
    magnitude = rng.uniform(0.5, 1.5, total)
    if complex_weights:
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi, total))
    else:
        phase = rng.choice([-1.0, 1.0], total)
    c = magnitude * phase
    w = (rng.uniform(0.5, 2.0, total) * rng.choice([-1.0, 1.0], total)).astype(complex)
    names = [f"x{i + 1}" for i in range(len(degrees))]
    return make_model(supports, c, w, names=names), rows


def densify_model(model, row_points):
    """DenseSource sampling the model on support+row union grids.

    Returns None when the random model has a pole on the sweep grid, so
    callers can skip that draw.
    """
    grids = [
        VariableGrid(name, cols, rows)
        for name, cols, rows in zip(model.variable_names, model.support_points, row_points)
    ]
    extents = tuple(g.union_points.size for g in grids)
    values = np.empty(extents, dtype=complex)
    it = np.nditer(values, flags=["multi_index"], op_flags=["writeonly"])
    while not it.finished:
        point = tuple(
            grids[l].union_points[i] for l, i in enumerate(it.multi_index)
        )
        try:
            it[0] = eval_model(model, point)
        except PoleError:
            return None
        it.iternext()
    return DenseSource(Tableau(grids, values))
