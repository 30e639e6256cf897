"""Dyadic Hardy-Littlewood and strong maximal operators.

Both operators range over dyadic families (DD-M1): cubes use one block
exponent shared by every axis, rectangles use independent per-axis dyadic
side lengths.  Averages are computed exactly by pyramid block means, so
the sup over the declared family is exact, not sampled.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeMismatchError
from .grid import Grid, SampledFunction, lp_norm


@dataclass(frozen=True)
class MaximalConfig:
    family: str = "dyadic-rectangles"
    dilation_cap: float = 1.0

    def __post_init__(self):
        if self.family not in ("dyadic-cubes", "dyadic-rectangles"):
            raise ConfigurationError(f"unknown family {self.family!r}")
        if not (0 < self.dilation_cap <= 1.0):
            raise ConfigurationError("dilation cap must lie in (0, 1]")


def _block_mean_expand(arr: np.ndarray, axis: int, size: int) -> np.ndarray:
    """Average over aligned blocks of `size` samples along one axis, expanded back."""
    if size == 1:
        return arr
    M = arr.shape[axis]
    shape = list(arr.shape)
    shape[axis : axis + 1] = [M // size, size]
    reduced = arr.reshape(shape).mean(axis=axis + 1)
    return np.repeat(reduced, size, axis=axis)


def _max_levels(grid: Grid, dilation_cap: float) -> int:
    cap = int(np.floor(np.log2(dilation_cap * grid.samples_per_axis)))
    return min(grid.L, cap)


def hl_maximal(f: SampledFunction, config: MaximalConfig = MaximalConfig("dyadic-cubes")) -> SampledFunction:
    """Dyadic Hardy-Littlewood maximal function (cube family)."""
    grid = f.grid
    a0 = np.abs(f.values)
    out = np.zeros(grid.shape)
    for t in range(_max_levels(grid, config.dilation_cap) + 1):
        a = a0
        for ax in range(grid.ndim):
            a = _block_mean_expand(a, ax, 2**t)
        np.maximum(out, a, out=out)
    return SampledFunction(grid, out)


def strong_maximal(f: SampledFunction, config: MaximalConfig = MaximalConfig()) -> SampledFunction:
    """Dyadic strong maximal function (independent per-axis side lengths)."""
    grid = f.grid
    levels = _max_levels(grid, config.dilation_cap)
    out = np.zeros(grid.shape)

    def recurse(arr: np.ndarray, axis: int):
        if axis == grid.ndim:
            np.maximum(out, arr, out=out)
            return
        for t in range(levels + 1):
            recurse(_block_mean_expand(arr, axis, 2**t), axis + 1)

    recurse(np.abs(f.values), 0)
    return SampledFunction(grid, out)


def dilated_level_set(mask: np.ndarray, grid: Grid, threshold: float = 0.5) -> np.ndarray:
    """{M_s(indicator of mask) >= threshold} as a boolean cell mask.

    The closed threshold makes the stopping-time support property exact:
    a rectangle covering at least half its measure inside the mask is a
    member of the maximal family and certifies the bound on all its points.
    """
    if mask.shape != grid.shape:
        raise ShapeMismatchError("mask shape does not match the grid")
    ms = strong_maximal(SampledFunction(grid, mask.astype(float)))
    return ms.values.real >= threshold


def fs_vector_check(family: list, r: float, p: float) -> dict:
    """Vector-valued maximal ratio ||(sum (M_s f_i)^r)^(1/r)||_p / ||(sum |f_i|^r)^(1/r)||_p."""
    if r <= 1 or p <= 1:
        raise DomainError(f"the vector-valued inequality needs r > 1 and p > 1, got r={r}, p={p}")
    if not family:
        raise DomainError("empty function family")
    grid = family[0].grid
    for f in family:
        if f.grid != grid:
            raise ShapeMismatchError("family members live on different grids")
    num_acc = np.zeros(grid.shape)
    den_acc = np.zeros(grid.shape)
    for f in family:
        num_acc += strong_maximal(f).values.real ** r
        den_acc += np.abs(f.values) ** r
    numerator = lp_norm(SampledFunction(grid, num_acc ** (1.0 / r)), p)
    denominator = lp_norm(SampledFunction(grid, den_acc ** (1.0 / r)), p)
    degenerate = False
    if denominator == 0.0:
        ratio, degenerate = 1.0, True
    else:
        ratio = numerator / denominator
    return {
        "r": r,
        "p": p,
        "count": len(family),
        "numerator": numerator,
        "denominator": denominator,
        "ratio": ratio,
        "degenerate": degenerate,
    }
