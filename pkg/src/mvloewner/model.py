"""The multivariate barycentric rational model and its error sweeps.

A model is determined by per-variable support points, denominator weights
``c`` and sampled values ``w`` on the support product grid (both
flattened variable 0 slowest); the numerator weights are ``beta = c * w``.
Evaluation uses the barycentric quotient

    H(x) = sum_J beta_J / prod_l (x_l - lambda_J)
         / sum_J c_J   / prod_l (x_l - lambda_J),

with the standard limit at support coordinates: whenever ``x_l`` equals a
support point of variable ``l`` exactly, both sums restrict to the
multi-indices matching that coordinate and the corresponding factor is
dropped, independently per variable.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, PoleError
from .grids import _complex_to_pairs, _pairs_to_complex

POLE_THRESHOLD = 1e-300


@dataclass(frozen=True)
class BarycentricModel:
    variable_names: tuple
    support_points: tuple
    weights_c: np.ndarray
    values_w: np.ndarray
    weights_beta: np.ndarray

    @property
    def n_vars(self):
        return len(self.support_points)

    @property
    def counts(self):
        return tuple(p.size for p in self.support_points)


def make_model(support, c, w, names=None):
    """Assemble a barycentric model from support points, weights and values.

    Parameters
    ----------
    support : sequence of per-variable point arrays
    c : array of denominator weights, length ``prod(k_l)``
    w : array of sample values at the support tuples, same length
    names : sequence of str, optional
        Variable names; defaults to x1, x2, ...
    """
    support = tuple(np.asarray(p, dtype=complex) for p in support)
    for l, points in enumerate(support):
        if np.unique(points).size != points.size:
            raise GridError(f"support points of variable {l} are not distinct")
    c = np.asarray(c, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    total = math.prod(p.size for p in support)
    if c.size != total or w.size != total:
        raise GridError(
            f"weights and values must have length {total}, got {c.size} and {w.size}"
        )
    if names is None:
        names = tuple(f"x{l + 1}" for l in range(len(support)))
    else:
        names = tuple(str(n) for n in names)
        if len(names) != len(support):
            raise GridError("one name per variable required")
    return BarycentricModel(names, support, c, w, c * w)


def _contract(weights_flat, factors, counts):
    tensor = weights_flat.reshape(counts)
    for factor in reversed(factors):
        tensor = tensor @ factor
    return complex(tensor)


def eval_model(model, point):
    """Evaluate the model at a point (any complex coordinates).

    Raises
    ------
    PoleError
        If the barycentric denominator vanishes at an off-support point.
    """
    if len(point) != model.n_vars:
        raise GridError(f"expected {model.n_vars} coordinates, got {len(point)}")
    factors = []
    for l, support in enumerate(model.support_points):
        diffs = complex(point[l]) - support
        hits = np.nonzero(diffs == 0)[0]
        if hits.size:
            # on-support coordinate: restrict sums to the matching index
            indicator = np.zeros(support.size, dtype=complex)
            indicator[hits[0]] = 1.0
            factors.append(indicator)
        else:
            factors.append(1.0 / diffs)
    counts = model.counts
    denominator = _contract(model.weights_c, factors, counts)
    if abs(denominator) < POLE_THRESHOLD:
        raise PoleError(f"barycentric denominator vanishes at {tuple(point)}")
    numerator = _contract(model.weights_beta, factors, counts)
    return numerator / denominator


def max_error(model, source):
    """Largest mismatch against a data source over its full union grids.

    Returns ``(error, point)`` where ``point`` is the first maximizing
    union-grid tuple in row-major order.  A pole on the sweep reports an
    infinite error at its location.
    """
    pools = [g.union_points for g in source.grids]
    best = -1.0
    best_point = None
    for combo in itertools.product(*pools):
        reference = source.value_at(combo)
        try:
            mismatch = abs(eval_model(model, combo) - reference)
        except PoleError:
            mismatch = math.inf
        if mismatch > best:
            best = mismatch
            best_point = combo
    return float(best), best_point


# --- JSON interchange ---------------------------------------------------


def model_to_dict(model):
    return {
        "variables": list(model.variable_names),
        "support": [_complex_to_pairs(p) for p in model.support_points],
        "c": _complex_to_pairs(model.weights_c),
        "w": _complex_to_pairs(model.values_w),
    }


def model_from_dict(data):
    support = [_pairs_to_complex(p) for p in data["support"]]
    return make_model(
        support,
        _pairs_to_complex(data["c"]),
        _pairs_to_complex(data["w"]),
        names=data["variables"],
    )


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
