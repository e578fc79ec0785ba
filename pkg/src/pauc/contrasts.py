"""Contrast matrices for families of linear hypotheses ``<c_i, theta> = 0``."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = ["ContrastMatrix", "tukey", "dunnett", "interaction", "custom", "from_config"]

_ZERO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ContrastMatrix:
    """``r x kappa`` matrix whose rows are contrasts, with one label per row."""

    rows: NDArray[np.float64]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise ValueError("contrast matrix must be a non-empty 2-D array")
        if not np.all(np.isfinite(rows)):
            raise ValueError("contrast entries must be finite")
        for k, row in enumerate(rows, start=1):
            scale = max(1.0, float(np.max(np.abs(row))))
            if np.all(np.abs(row) <= _ZERO_TOL * scale):
                raise ValueError(f"row {k} is identically zero")
            if abs(row.sum()) > _ZERO_TOL * scale * row.size:
                raise ValueError(f"row {k} does not sum to zero")
        labels = tuple(self.labels)
        if len(labels) != rows.shape[0]:
            raise ValueError(f"{len(labels)} labels for {rows.shape[0]} rows")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def r(self) -> int:
        return self.rows.shape[0]

    @property
    def kappa(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.r


def _names(kappa: int, names: Sequence[str] | None) -> list[str]:
    if names is None:
        return [str(i + 1) for i in range(kappa)]
    if len(names) != kappa:
        raise ValueError(f"{len(names)} names for {kappa} markers")
    return list(names)


def tukey(kappa: int, names: Sequence[str] | None = None) -> ContrastMatrix:
    """All-pairs comparisons, rows ordered by ``(i, j)`` with ``+1`` at the smaller index."""
    if kappa < 2:
        raise ValueError("Tukey contrasts need at least 2 markers")
    nm = _names(kappa, names)
    pairs = list(combinations(range(kappa), 2))
    rows = np.zeros((len(pairs), kappa))
    for k, (i, j) in enumerate(pairs):
        rows[k, i], rows[k, j] = 1.0, -1.0
    return ContrastMatrix(rows, tuple(f"{nm[i]} - {nm[j]}" for i, j in pairs))


def dunnett(kappa: int, reference: int = 0, names: Sequence[str] | None = None) -> ContrastMatrix:
    """Many-to-one comparisons against the (0-based) ``reference`` marker."""
    if kappa < 2:
        raise ValueError("Dunnett contrasts need at least 2 markers")
    if not 0 <= reference < kappa:
        raise ValueError(f"reference {reference} out of range for kappa={kappa}")
    nm = _names(kappa, names)
    others = [j for j in range(kappa) if j != reference]
    rows = np.zeros((len(others), kappa))
    for k, j in enumerate(others):
        rows[k, j], rows[k, reference] = 1.0, -1.0
    return ContrastMatrix(rows, tuple(f"{nm[j]} - {nm[reference]}" for j in others))


def _centering(n: int) -> NDArray[np.float64]:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def interaction(a_levels: int, b_levels: int) -> ContrastMatrix:
    """No-interaction hypothesis of a crossed two-factor layout.

    Returns the Kronecker product of the two centering matrices; marker
    ``a * b_levels + b`` is level ``a`` of factor A and level ``b`` of factor B.
    The rows are linearly dependent and all of them are used.
    """
    if a_levels < 2 or b_levels < 2:
        raise ValueError("each factor needs at least 2 levels")
    rows = np.kron(_centering(a_levels), _centering(b_levels))
    labels = tuple(f"AxB[{a + 1},{b + 1}]" for a in range(a_levels) for b in range(b_levels))
    return ContrastMatrix(rows, labels)


def custom(rows: ArrayLike, labels: Sequence[str] | None = None) -> ContrastMatrix:
    """Validate user-supplied contrast rows."""
    arr = np.array(rows, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if labels is None:
        labels = [f"c{k + 1}" for k in range(arr.shape[0])]
    return ContrastMatrix(arr, tuple(labels))


def from_config(cfg: dict, kappa: int, names: Sequence[str] | None = None) -> ContrastMatrix:
    """Build a contrast from a config mapping with a ``type`` key.

    Types: ``tukey``, ``dunnett`` (``reference``, 0-based), ``interaction``
    (``levels: [a, b]``) and ``custom`` (``rows``, optional ``labels``).
    """
    kind = cfg.get("type")
    if kind == "tukey":
        out = tukey(kappa, names)
    elif kind == "dunnett":
        out = dunnett(kappa, int(cfg.get("reference", 0)), names)
    elif kind == "interaction":
        levels = cfg.get("levels")
        if not isinstance(levels, (list, tuple)) or len(levels) != 2:
            raise ValueError("contrast.levels must be a pair [a_levels, b_levels]")
        out = interaction(int(levels[0]), int(levels[1]))
    elif kind == "custom":
        if "rows" not in cfg:
            raise ValueError("custom contrast needs 'rows'")
        out = custom(cfg["rows"], cfg.get("labels"))
    else:
        raise ValueError(f"unknown contrast type {kind!r}")
    if out.kappa != kappa:
        raise ValueError(f"contrast has {out.kappa} columns but there are {kappa} markers")
    return out
