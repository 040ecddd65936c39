"""Per-variable interpolation grids and the n-dimensional measurement tableau.

Every variable carries two ordered point lists: ``column_points`` (the
candidate support points) and ``row_points`` (the complementary samples
that drive divided differences).  The union grid of a variable is the
concatenation columns-first, and dense value tensors are stored row-major
with variable 0 varying slowest.  Point comparisons are exact on the
stored binary values; coincident points are the only fatal configuration
because every divided difference divides by a point difference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import expressions
from .errors import EvaluationError, GridError, OffGridError


def _as_complex_vector(values, what):
    arr = np.atleast_1d(np.asarray(values, dtype=complex))
    if arr.ndim != 1:
        raise GridError(f"{what} must be one-dimensional")
    if arr.size and not np.all(np.isfinite(arr)):
        raise GridError(f"{what} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class VariableGrid:
    """One variable's support (column) and complementary (row) points."""

    name: str
    column_points: np.ndarray
    row_points: np.ndarray

    def __init__(self, name, column_points, row_points=()):
        object.__setattr__(self, "name", str(name))
        cols = _as_complex_vector(column_points, f"column points of {name!r}")
        rows = _as_complex_vector(row_points, f"row points of {name!r}") if len(row_points) else np.zeros(0, complex)
        if cols.size < 1:
            raise GridError(f"variable {name!r} needs at least one column point")
        object.__setattr__(self, "column_points", cols)
        object.__setattr__(self, "row_points", rows)

    @property
    def union_points(self):
        """All grid points, columns first."""
        return np.concatenate([self.column_points, self.row_points])

    def duplicates(self):
        """Values occurring more than once in the union grid (exact equality)."""
        seen = {}
        dups = []
        for value in self.union_points:
            key = complex(value)
            seen[key] = seen.get(key, 0) + 1
            if seen[key] == 2:
                dups.append(key)
        return dups

    def index_of(self, value):
        """Union-grid index of ``value``; exact match required."""
        matches = np.nonzero(self.union_points == value)[0]
        if matches.size == 0:
            raise OffGridError(f"{value} is not a grid point of variable {self.name!r}")
        return int(matches[0])


@dataclass(frozen=True)
class Tableau:
    """Dense sample tensor over the union grids of all variables."""

    grids: tuple
    values: np.ndarray

    def __init__(self, grids, values):
        grids = tuple(grids)
        values = np.asarray(values, dtype=complex)
        extents = tuple(g.union_points.size for g in grids)
        if values.shape != extents:
            raise GridError(f"value tensor shape {values.shape} does not match grid extents {extents}")
        if not np.all(np.isfinite(values)):
            raise GridError("value tensor contains non-finite entries")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)


class DataSource:
    """Common interface of dense and oracle-backed sample sources."""

    grids: tuple

    @property
    def n_vars(self):
        return len(self.grids)

    @property
    def names(self):
        return [g.name for g in self.grids]

    def value_at(self, point):
        """Sample value at a tuple of grid points (one per variable)."""
        raise NotImplementedError

    def values_on_product(self, per_var_points):
        """Sample tensor over the cartesian product of the given point lists.

        ``per_var_points[l]`` is a 1-D array of grid points of variable
        ``l``; the result has shape ``tuple(len(p) for p in per_var_points)``
        with variable 0 slowest.
        """
        raise NotImplementedError

    def fiber(self, free_variable, frozen):
        """Values along the union grid of one variable, all others frozen.

        Parameters
        ----------
        free_variable : int
            Index of the variable that sweeps its union grid
            (columns first, then rows).
        frozen : mapping from variable index to grid point
            Must cover every variable except ``free_variable``.

        Returns
        -------
        ndarray
            One value per union point of the free variable.
        """
        per_var = []
        for l, grid in enumerate(self.grids):
            if l == free_variable:
                per_var.append(grid.union_points)
            else:
                if l not in frozen:
                    raise GridError(f"fiber: variable {grid.name!r} is neither free nor frozen")
                grid.index_of(frozen[l])  # validates the frozen point is on the grid
                per_var.append(np.asarray([frozen[l]], dtype=complex))
        tensor = self.values_on_product(per_var)
        return tensor.reshape(-1)


class DenseSource(DataSource):
    """Data source backed by a fully materialized tableau."""

    def __init__(self, tableau):
        self.tableau = tableau
        self.grids = tableau.grids

    def value_at(self, point):
        if len(point) != self.n_vars:
            raise GridError(f"expected {self.n_vars} coordinates, got {len(point)}")
        idx = tuple(g.index_of(v) for g, v in zip(self.grids, point))
        return complex(self.tableau.values[idx])

    def values_on_product(self, per_var_points):
        index_lists = []
        for grid, points in zip(self.grids, per_var_points):
            index_lists.append([grid.index_of(v) for v in np.atleast_1d(points)])
        mesh = np.ix_(*index_lists)
        return self.tableau.values[mesh]


class OracleSource(DataSource):
    """Data source that evaluates a rational expression on demand."""

    def __init__(self, expression, grids):
        self.expression = expression
        self.grids = tuple(grids)
        names = set(self.names)
        referenced = expressions.variables_of(expression)
        unknown = referenced - names
        if unknown:
            raise GridError(f"expression references undeclared variables {sorted(unknown)}")

    def value_at(self, point):
        if len(point) != self.n_vars:
            raise GridError(f"expected {self.n_vars} coordinates, got {len(point)}")
        for grid, value in zip(self.grids, point):
            grid.index_of(value)
        assignment = {g.name: complex(v) for g, v in zip(self.grids, point)}
        value = expressions.evaluate(self.expression, assignment)
        if not np.isfinite(value):
            raise EvaluationError(f"oracle produced a non-finite value at {tuple(point)}")
        return complex(value)

    def values_on_product(self, per_var_points):
        axes = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in per_var_points]
        mesh = np.meshgrid(*axes, indexing="ij") if len(axes) > 1 else [axes[0]]
        assignment = {g.name: m for g, m in zip(self.grids, mesh)}
        values = expressions.evaluate(self.expression, assignment)
        values = np.asarray(values, dtype=complex)
        values = np.broadcast_to(values, tuple(a.size for a in axes))
        if not np.all(np.isfinite(values)):
            raise EvaluationError("oracle produced non-finite values on the requested product grid")
        return np.array(values)

    def densify(self):
        """Materialize the oracle on its full union grids as a DenseSource."""
        values = self.values_on_product([g.union_points for g in self.grids])
        return DenseSource(Tableau(self.grids, values))


def check_disjoint(source):
    """Report duplicated interpolation points, per variable.

    Returns a list of ``(variable_name, value)`` pairs; an empty list
    means every variable's column and row points are pairwise distinct.
    """
    violations = []
    for grid in source.grids:
        for value in grid.duplicates():
            violations.append((grid.name, value))
    return violations


@dataclass(frozen=True)
class Selection:
    """Per-variable choice of column (support) and row points."""

    col_points: tuple
    row_points: tuple

    def __init__(self, col_points, row_points):
        object.__setattr__(
            self, "col_points", tuple(np.asarray(p, dtype=complex) for p in col_points)
        )
        object.__setattr__(
            self, "row_points", tuple(np.asarray(p, dtype=complex) for p in row_points)
        )
        if len(self.col_points) != len(self.row_points):
            raise GridError("selection needs one column list and one row list per variable")
        for l, (cols, rows) in enumerate(zip(self.col_points, self.row_points)):
            if cols.size < 1:
                raise GridError(f"selection for variable {l} has no column points")
            common = np.intersect1d(cols, rows)
            if common.size:
                raise GridError(
                    f"selection for variable {l} has coincident column/row points {common[:3]}"
                )

    @property
    def counts(self):
        return tuple(p.size for p in self.col_points)

    @property
    def row_counts(self):
        return tuple(p.size for p in self.row_points)

    @classmethod
    def full(cls, source):
        """All stored columns as columns, all stored rows as rows."""
        return cls(
            [g.column_points for g in source.grids],
            [g.row_points for g in source.grids],
        )

    @classmethod
    def leading_columns(cls, source, counts):
        """First ``counts[l]`` column points as support; the rest are rows.

        Leftover column points are prepended to the stored row points, in
        union order.
        """
        cols, rows = [], []
        for grid, k in zip(source.grids, counts):
            k = int(k)
            if k < 1 or k > grid.column_points.size:
                raise GridError(
                    f"variable {grid.name!r} has {grid.column_points.size} column points, "
                    f"cannot select {k}"
                )
            cols.append(grid.column_points[:k])
            rows.append(np.concatenate([grid.column_points[k:], grid.row_points]))
        return cls(cols, rows)

    @classmethod
    def spread_columns(cls, source, counts):
        """``counts[l]`` column points at evenly strided indices of each list.

        Support points clustered at one end of the domain condition the
        weight systems badly; striding keeps the endpoints and spreads the
        interior.  Leftover column points join the rows.
        """
        cols, rows = [], []
        for grid, k in zip(source.grids, counts):
            k = int(k)
            lam = grid.column_points
            if k < 1 or k > lam.size:
                raise GridError(
                    f"variable {grid.name!r} has {lam.size} column points, cannot select {k}"
                )
            idx = np.unique(np.round(np.linspace(0, lam.size - 1, k)).astype(int))
            for spare in range(lam.size):  # top up after rounding collisions
                if idx.size == k:
                    break
                if spare not in idx:
                    idx = np.sort(np.append(idx, spare))
            mask = np.ones(lam.size, dtype=bool)
            mask[idx] = False
            cols.append(lam[idx])
            rows.append(np.concatenate([lam[mask], grid.row_points]))
        return cls(cols, rows)


# --- JSON interchange ---------------------------------------------------


def _pairs_to_complex(pairs):
    return np.asarray([complex(re, im) for re, im in pairs], dtype=complex)


def _complex_to_pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=complex).reshape(-1)]


def _grids_from_json(entries):
    grids = []
    for entry in entries:
        grids.append(
            VariableGrid(
                entry["name"],
                _pairs_to_complex(entry["lambda"]),
                _pairs_to_complex(entry.get("mu", [])),
            )
        )
    return grids


def _grids_to_json(grids):
    return [
        {
            "name": g.name,
            "lambda": _complex_to_pairs(g.column_points),
            "mu": _complex_to_pairs(g.row_points),
        }
        for g in grids
    ]


def source_from_dict(data):
    """Build a DataSource from a parsed JSON document.

    A document with an ``expression`` key becomes an :class:`OracleSource`;
    one with a ``values`` key becomes a :class:`DenseSource` whose flat
    value list is interpreted row-major, variable 0 slowest.
    """
    grids = _grids_from_json(data["variables"])
    if "expression" in data:
        expr = expressions.parse(data["expression"], [g.name for g in grids])
        return OracleSource(expr, grids)
    if "values" not in data:
        raise GridError("data file needs either an 'expression' or a 'values' entry")
    flat = _pairs_to_complex(data["values"])
    extents = tuple(g.union_points.size for g in grids)
    expected = int(np.prod(extents))
    if flat.size != expected:
        raise GridError(f"value list has {flat.size} entries, expected {expected}")
    return DenseSource(Tableau(grids, flat.reshape(extents)))


def source_to_dict(source):
    """Serialize a DataSource to a JSON-ready dict (inverse of source_from_dict)."""
    doc = {"variables": _grids_to_json(source.grids)}
    if isinstance(source, OracleSource):
        doc["expression"] = expressions.to_string(source.expression)
    else:
        doc["values"] = _complex_to_pairs(source.tableau.values.reshape(-1))
    return doc


def load_source(path):
    with open(path, "r", encoding="utf-8") as fh:
        return source_from_dict(json.load(fh))
