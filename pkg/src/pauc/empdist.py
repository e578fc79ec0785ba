"""Empirical distribution functions and generalized quantiles.

Everything here is a literal indicator count: ``ecdf_eval`` uses ``<=`` and no
mid-rank correction is applied anywhere.  Extended reals are IEEE infinities;
they are only ever compared, never used in arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "Sample",
    "PairedSample",
    "order_index",
    "ecdf_eval",
    "quantile",
    "joint_ecdf_eval",
]


@lru_cache(maxsize=4096)
def order_index(n: int, prob: float) -> int:
    """Return ``ceil(n * prob)``, robust to binary rounding of ``prob``.

    ``prob`` is snapped to the nearest fraction with denominator at most 1e9
    first, so ``order_index(10, 1 - 0.7)`` is 3 and not 4.
    """
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {prob!r}")
    snapped = Fraction(prob).limit_denominator(10**9)
    return math.ceil(n * snapped)


@dataclass(frozen=True, eq=False)
class Sample:
    """Univariate sample with its sort order cached at construction."""

    values: NDArray[np.float64]
    order: NDArray[np.intp] = field(init=False, repr=False)
    sorted_values: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        values.setflags(write=False)
        order = np.argsort(values, kind="stable")
        sorted_values = values[order]
        order.setflags(write=False)
        sorted_values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "sorted_values", sorted_values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class PairedSample:
    """Row-aligned marker measurements, shape ``(n, kappa)``.

    Row ``r`` holds all markers of subject ``r``.
    """

    values: NDArray[np.float64]
    columns: tuple[Sample, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError("paired sample must be a 2-D array with at least one column")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(Sample(values[:, i]) for i in range(values.shape[1])))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def kappa(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.n


def _as_sample(sample: Sample | ArrayLike) -> Sample:
    return sample if isinstance(sample, Sample) else Sample(np.asarray(sample))


def ecdf_eval(sample: Sample | ArrayLike, u: float) -> float:
    """Fraction of observations ``<= u``; 0 at ``-inf`` and 1 at ``+inf``."""
    s = _as_sample(sample)
    return int(np.searchsorted(s.sorted_values, u, side="right")) / len(s)


def quantile(sample: Sample | ArrayLike, prob: float) -> float:
    """Generalized inverse ``inf{t : F_n(t) >= prob}``.

    For ``prob`` in (0, 1] this is the ``ceil(n * prob)``-th order statistic.
    ``prob == 0`` gives ``-inf`` since every real satisfies ``F_n(t) >= 0``.
    """
    s = _as_sample(sample)
    k = order_index(len(s), float(prob))
    if k == 0:
        return -math.inf
    return float(s.sorted_values[k - 1])


def joint_ecdf_eval(paired: PairedSample, i: int, j: int, x: float, y: float) -> float:
    """Fraction of rows with column ``i`` <= ``x`` and column ``j`` <= ``y``.

    Marker indices are 0-based.
    """
    kappa = paired.kappa
    for idx in (i, j):
        if not 0 <= idx < kappa:
            raise IndexError(f"marker index {idx} out of range for kappa={kappa}")
    v = paired.values
    return float(np.count_nonzero((v[:, i] <= x) & (v[:, j] <= y))) / paired.n
