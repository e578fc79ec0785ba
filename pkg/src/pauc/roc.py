"""Plot-ready empirical ROC curves ``t -> (1 - F_n(t), 1 - G_n(t))``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from pauc.empdist import Sample, quantile
from pauc.estimator import TrimSpec

__all__ = ["RocCurve", "empirical_roc"]


@dataclass(frozen=True)
class RocCurve:
    """Corner points of the empirical ROC curve of one marker.

    ``vertices`` run from ``(0, 0)`` to ``(1, 1)``; collinear intermediate
    points are dropped.  With a trim, ``segment`` lists the part of the curve
    traced by thresholds in ``[lower_cut, upper_cut]``.
    """

    vertices: tuple[tuple[float, float], ...]
    lower_cut: float | None = None
    upper_cut: float | None = None
    segment: tuple[tuple[float, float], ...] = ()

    def to_dict(self) -> dict:
        out = {"vertices": [list(v) for v in self.vertices]}
        if self.lower_cut is not None:
            out["cut_points"] = {"lower": _json_real(self.lower_cut), "upper": _json_real(self.upper_cut)}
            out["segment"] = [list(v) for v in self.segment]
        return out


def _json_real(x: float) -> float | str:
    return x if np.isfinite(x) else ("-inf" if x < 0 else "inf")


def _counts_above(sorted_vals: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return sorted_vals.size - np.searchsorted(sorted_vals, thresholds, side="right")


def _corners(fp: np.ndarray, tp: np.ndarray) -> list[int]:
    """Indices of points where the integer path changes direction."""
    keep = [0]
    for k in range(1, fp.size - 1):
        d1 = (fp[k] - fp[keep[-1]], tp[k] - tp[keep[-1]])
        d2 = (fp[k + 1] - fp[k], tp[k + 1] - tp[k])
        if d1[0] * d2[1] - d1[1] * d2[0] != 0:
            keep.append(k)
    keep.append(fp.size - 1)
    return keep


def _path(xs: np.ndarray, ys: np.ndarray, thresholds: np.ndarray) -> tuple[tuple[float, float], ...]:
    fp = _counts_above(xs, thresholds)
    tp = _counts_above(ys, thresholds)
    distinct = np.ones(fp.size, dtype=bool)
    distinct[1:] = (np.diff(fp) != 0) | (np.diff(tp) != 0)
    fp, tp = fp[distinct], tp[distinct]
    if fp.size > 2:
        idx = _corners(fp, tp)
        fp, tp = fp[idx], tp[idx]
    return tuple((float(a) / xs.size, float(b) / ys.size) for a, b in zip(fp, tp))


def empirical_roc(nondiseased: ArrayLike, diseased: ArrayLike, trim: TrimSpec | None = None) -> RocCurve:
    """Empirical ROC of one marker, optionally with the segment selected by ``trim``.

    The cut points are ``F_n^{-1}(1 - p)`` and ``G_n^{-1}(1 - q)``.
    """
    x, y = Sample(np.asarray(nondiseased)), Sample(np.asarray(diseased))
    xs, ys = x.sorted_values, y.sorted_values
    pooled = np.unique(np.concatenate([xs, ys]))[::-1]
    thresholds = np.concatenate([[np.inf], pooled, [-np.inf]])
    vertices = _path(xs, ys, thresholds)
    if trim is None:
        return RocCurve(vertices)
    lo = quantile(x, 1.0 - trim.p)
    hi = quantile(y, 1.0 - trim.q)
    if hi < lo:
        return RocCurve(vertices, lo, hi, ())
    inside = thresholds[(thresholds >= lo) & (thresholds <= hi)]
    inside = np.unique(np.concatenate([[hi], inside, [lo]]))[::-1]
    return RocCurve(vertices, lo, hi, _path(xs, ys, inside))
