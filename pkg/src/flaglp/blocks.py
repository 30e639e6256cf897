"""Array helpers for per-rectangle reductions and piecewise-constant expansion."""

import numpy as np

from .grid import Grid, rectangle_counts


def block_shape(grid: Grid, j: int, k: int, N: int) -> tuple:
    """(samples per rectangle axis in factor 1, in factor 2)."""
    ci, cj = rectangle_counts(grid, j, k, N)
    M = grid.samples_per_axis
    return M // ci, M // cj


def block_reduce(arr: np.ndarray, grid: Grid, j: int, k: int, N: int, op) -> np.ndarray:
    """Reduce a full-grid array over each dyadic rectangle at scale (j,k,N).

    op is a numpy reduction accepting an axis tuple (np.max, np.min,
    np.mean, np.sum).  Returns one value per rectangle, indexed like the
    coefficient slots.
    """
    b1, b2 = block_shape(grid, j, k, N)
    shape = []
    for _ in range(grid.n):
        shape += [grid.samples_per_axis // b1, b1]
    for _ in range(grid.m):
        shape += [grid.samples_per_axis // b2, b2]
    view = arr.reshape(shape)
    axes = tuple(range(1, 2 * grid.ndim, 2))
    return op(view, axis=axes)


def block_expand(arr: np.ndarray, grid: Grid, j: int, k: int, N: int) -> np.ndarray:
    """Piecewise-constant extension of per-rectangle values to the full grid."""
    b1, b2 = block_shape(grid, j, k, N)
    out = arr
    for ax in range(grid.n):
        out = np.repeat(out, b1, axis=ax)
    for ax in range(grid.n, grid.ndim):
        out = np.repeat(out, b2, axis=ax)
    return out
