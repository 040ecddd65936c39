"""Shared fixtures: the worked example configurations used across tests."""

import numpy as np
import pytest

from mvloewner import OracleSource, VariableGrid, parse


@pytest.fixture(scope="session")
def source_1d():
    """(s^2+4)/(s+1) sampled at columns [1,3,5], rows [2,4,6,8]."""
    expr = parse("(s^2+4)/(s+1)", ["s"])
    return OracleSource(expr, [VariableGrid("s", [1, 3, 5], [2, 4, 6, 8])])


@pytest.fixture(scope="session")
def source_2d():
    """s^2 t/(s-t+1) on columns [1,3,5]x[-1,-3], rows [0,2,4]x[-2,-4]."""
    expr = parse("(s^2*t)/(s-t+1)", ["s", "t"])
    grids = [
        VariableGrid("s", [1, 3, 5], [0, 2, 4]),
        VariableGrid("t", [-1, -3], [-2, -4]),
    ]
    return OracleSource(expr, grids)


@pytest.fixture(scope="session")
def source_3d():
    """(s+p t)/(p^2+s+t) on 2x2x3 columns, rows mirrored at the origin."""
    expr = parse("(s+p*t)/(p^2+s+t)", ["s", "t", "p"])
    grids = [
        VariableGrid("s", [2, 4], [-2, -4]),
        VariableGrid("t", [1, 3], [-1, -3]),
        VariableGrid("p", [5, 6, 7], [-5, -6, -7]),
    ]
    return OracleSource(expr, grids)


@pytest.fixture(scope="session")
def source_kst():
    """(s^2+x s+1)/(t+x+s t+2), the three-variable decoupling example."""
    expr = parse("(s^2+x*s+1)/(t+x+s*t+2)", ["s", "t", "x"])
    grids = [
        VariableGrid("s", [1, 2, 3], [1.5, 2.5, 3.5]),
        VariableGrid("t", [4, 5], [9 / 5, 11 / 5]),
        VariableGrid("x", [6, 7], [13 / 3, 5]),
    ]
    return OracleSource(expr, grids)


SYNTH_2D_TEXT = "1/(1+25*(s+p)^2)+0.5/(1+25*(s-0.5)^2)+0.1/(p+25)"


@pytest.fixture(scope="session")
def source_synth2d():
    """Two-bump parametric test model on 21x21 alternating grids, densified."""
    expr = parse(SYNTH_2D_TEXT, ["s", "p"])
    grids = [
        VariableGrid(
            "s",
            np.round(np.linspace(-1, 1, 11), 10),
            np.round(np.linspace(-0.9, 0.9, 10), 10),
        ),
        VariableGrid(
            "p",
            np.round(np.linspace(0, 1, 11), 10),
            np.round(np.linspace(0.05, 0.95, 10), 10),
        ),
    ]
    return OracleSource(expr, grids).densify()


# golden weight vectors of the worked examples (last entry normalized to 1)

C1_EXPECTED = np.array([1 / 3, -4 / 3, 1.0])

C2_EXPECTED = np.array([-1 / 3, 5 / 9, 10 / 9, -14 / 9, -7 / 9, 1.0])

C3_EXPECTED = np.array(
    [
        1 / 2, -39 / 28, 13 / 14,
        -15 / 28, 41 / 28, -27 / 28,
        -15 / 28, 41 / 28, -27 / 28,
        4 / 7, -43 / 28, 1.0,
    ]
)

W3_EXPECTED = np.array(
    [
        1 / 4, 8 / 39, 9 / 52,
        17 / 30, 20 / 41, 23 / 54,
        3 / 10, 10 / 41, 11 / 54,
        19 / 32, 22 / 43, 25 / 56,
    ]
)

KST_BARY = np.array(
    [
        16 / 29, -17 / 29, -18 / 29, 19 / 29,
        -40 / 29, 42 / 29, 46 / 29, -48 / 29,
        24 / 29, -25 / 29, -28 / 29, 1.0,
    ]
)
