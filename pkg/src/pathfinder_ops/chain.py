"""Four-state gate/pathfinding Markov chain and its stationary behavior.

States are indexed 0..3: Gate Closed, Pathfinder Selection, Pathfinding,
Gate Opened. Transitions are driven by three probabilities: favorable
weather observation (p_good), offer acceptance (p_accept), and pathfinding
success (p_success). The stationary distribution is obtained by solving the
balance equations with the normalization constraint; a rank test on the
balance system detects parameterizations whose stationary distribution is
not unique and refuses to pick one.

All functions here are pure; returned arrays are freshly allocated and safe
to share across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import EmptyGrid, NonUniqueStationary
from .fileio import fmt12

N_STATES = 4
STATE_NAMES = ("Gate Closed", "Pathfinder Selection", "Pathfinding", "Gate Opened")

# Entries of the 4x4 transition matrix that are structurally zero.
STRUCTURAL_ZEROS = ((0, 2), (0, 3), (1, 0), (1, 3), (2, 1), (2, 2), (3, 1), (3, 2))

# Singular values of the balance system below this are treated as rank
# deficiency, i.e. a second recurrent class.
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ChainParams:
    """The probability triple driving the chain."""

    p_good: float
    p_accept: float
    p_success: float

    def __post_init__(self):
        for name in ("p_good", "p_accept", "p_success"):
            value = float(getattr(self, name))
            if math.isnan(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class SweepRow:
    """One cell of a parameter sweep: status is 'ok' or 'non_unique'."""

    params: ChainParams
    pi: np.ndarray | None
    status: str


def build_transition_matrix(params: ChainParams) -> np.ndarray:
    """Return the 4x4 row-stochastic transition matrix for `params`."""
    g, a, s = params.p_good, params.p_accept, params.p_success
    return np.array(
        [
            [1.0 - g, g, 0.0, 0.0],
            [0.0, 1.0 - a, a, 0.0],
            [1.0 - s, 0.0, 0.0, s],
            [1.0 - g, 0.0, 0.0, g],
        ]
    )


def _check_row_stochastic(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (N_STATES, N_STATES):
        raise ValueError(f"expected a {N_STATES}x{N_STATES} matrix, got shape {matrix.shape}")
    if np.any(matrix < -1e-15) or np.any(matrix > 1.0 + 1e-15):
        raise ValueError("transition matrix entries must lie in [0, 1]")
    row_sums = matrix.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-12):
        raise ValueError(f"matrix rows must sum to 1 within 1e-12, got sums {row_sums}")
    return matrix


def steady_state(matrix: np.ndarray) -> np.ndarray:
    """Solve pi @ P = pi with sum(pi) = 1 for a row-stochastic P.

    Solves the balance system with one equation replaced by the
    normalization constraint (dense LU). Raises NonUniqueStationary when
    the balance system is rank deficient beyond normalization, i.e. the
    chain has several recurrent classes. Components in [-1e-12, 0) are
    clamped to zero and the vector renormalized.
    """
    matrix = _check_row_stochastic(matrix)
    balance = matrix.T - np.eye(N_STATES)
    singular_values = np.linalg.svd(balance, compute_uv=False)
    if singular_values[N_STATES - 2] <= _RANK_TOL:
        raise NonUniqueStationary(
            "chain is reducible with more than one recurrent class; "
            "stationary distribution is not unique"
        )
    # Rows of the balance system sum to zero, so dropping one loses nothing,
    # and the normalization row is independent of the rest.
    system = balance.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(N_STATES)
    rhs[-1] = 1.0
    pi = np.linalg.solve(system, rhs)

    if pi.min() < -1e-12:
        raise ArithmeticError(f"stationary solve produced negative component: {pi}")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.max(np.abs(pi @ matrix - pi))
    if residual > 1e-10:
        raise ArithmeticError(f"stationarity residual {residual:.3e} exceeds 1e-10")
    return pi


def _validate_grid(values, name: str, low_open: bool) -> list[float]:
    values = [float(v) for v in values]
    if not values:
        raise EmptyGrid(f"{name} grid must be non-empty")
    for v in values:
        if math.isnan(v) or v > 1.0 or v < 0.0 or (low_open and v == 0.0):
            bounds = "(0, 1]" if low_open else "[0, 1]"
            raise ValueError(f"{name} grid values must lie in {bounds}, got {v!r}")
    return sorted(values)


def _solve_cell(params: ChainParams) -> SweepRow:
    try:
        pi = steady_state(build_transition_matrix(params))
    except NonUniqueStationary:
        return SweepRow(params, None, "non_unique")
    return SweepRow(params, pi, "ok")


def sweep_steady_state(g_grid, a_grid, s_grid, max_workers: int | None = None) -> list[SweepRow]:
    """Stationary distribution over the Cartesian product of the grids.

    Rows come back in lexicographic (p_good, p_accept, p_success) order.
    Cells whose stationary distribution is not unique are kept as
    'non_unique' rows rather than dropped. `max_workers` > 1 evaluates
    cells in a thread pool; ordering is unaffected.
    """
    g_grid = _validate_grid(g_grid, "p_good", low_open=True)
    a_grid = _validate_grid(a_grid, "p_accept", low_open=True)
    s_grid = _validate_grid(s_grid, "p_success", low_open=False)
    cells = [ChainParams(g, a, s) for g, a, s in product(g_grid, a_grid, s_grid)]
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(_solve_cell, cells))
    return [_solve_cell(params) for params in cells]


def default_grid(step: float = 0.05) -> list[float]:
    """Interior probability grid step, 2*step, ..., < 1 used for sweeps."""
    if not 0.0 < step < 1.0:
        raise ValueError(f"step must lie in (0, 1), got {step!r}")
    count = int(round((1.0 - step) / step))
    return [round(i * step, 12) for i in range(1, count + 1) if i * step < 1.0 - 1e-12]


SWEEP_CSV_HEADER = "p_good,p_accept,p_success,pi0,pi1,pi2,pi3,status"


def sweep_to_csv(rows: list[SweepRow]) -> str:
    """Serialize sweep rows to CSV (12 significant digits, trailing newline)."""
    lines = [SWEEP_CSV_HEADER]
    for row in rows:
        p = row.params
        cols = [fmt12(p.p_good), fmt12(p.p_accept), fmt12(p.p_success)]
        if row.pi is None:
            cols += ["", "", "", ""]
        else:
            cols += [fmt12(x) for x in row.pi]
        cols.append(row.status)
        lines.append(",".join(cols))
    return "\n".join(lines) + "\n"
