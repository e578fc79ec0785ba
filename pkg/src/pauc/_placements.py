"""Weighted placement kernel behind the point estimate, covariance and bootstrap.

A bootstrap resample is represented by multiplicity weights on the original
rows (``c`` for the non-diseased group, ``d`` for the diseased group), so every
replicate reuses one sort per marker and one set of ``searchsorted`` positions.
The unweighted estimate is the special case ``c = d = 1``.  Weight arrays are
laid out ``(n, B)``: subjects along the first axis, replicates along the second.

Per marker ``i`` and replicate, with window ``(a, b]`` given by the resampled
cut points,

* ``theta(i) = sum_r c_r 1{a < x_r <= b} #_d{s : x_r < y_s <= b} / (alpha beta)``
* ``A_r(i) = #_d{s : a < y_s <= b, y_s >= x_r} / beta``
* ``B_s(i) = #_c{r : a < x_r <= b, x_r >= y_s} / alpha``

and the covariance estimate is
``(alpha + beta) * (cov_c(A) / alpha + cov_d(B) / beta)`` with weighted
population covariances.  The double sums over pairs of subjects in the
covariance definition factor into exactly these placement covariances.

Window-restricted counts use prefix sums ``P`` of the sorted weights.  The
window is a contiguous block ``[j_lo, j_hi)`` of sorted positions and ``P`` is
nondecreasing, so the windowed count at or above position ``j`` is
``P[j_hi] - clip(P[j], P[j_lo], P[j_hi])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from pauc.empdist import order_index


@dataclass(frozen=True)
class Prepared:
    """Per-marker sort orders and cross-group positions of one data set."""

    alpha: int
    beta: int
    kappa: int
    x_order: NDArray[np.intp]  # (kappa, alpha)
    y_order: NDArray[np.intp]  # (kappa, beta)
    x_sorted: NDArray[np.float64]  # (kappa, alpha)
    y_sorted: NDArray[np.float64]  # (kappa, beta)
    x_gt: NDArray[np.intp]  # first sorted-y index with y > x_r, original r order
    x_ge: NDArray[np.intp]  # first sorted-y index with y >= x_r
    y_ge: NDArray[np.intp]  # first sorted-x index with x >= y_s


def prepare(xi: NDArray[np.float64], eta: NDArray[np.float64]) -> Prepared:
    x = np.ascontiguousarray(xi.T)
    y = np.ascontiguousarray(eta.T)
    x_order = np.argsort(x, axis=1, kind="stable")
    y_order = np.argsort(y, axis=1, kind="stable")
    x_sorted = np.take_along_axis(x, x_order, axis=1)
    y_sorted = np.take_along_axis(y, y_order, axis=1)
    kappa = x.shape[0]
    x_gt = np.stack([np.searchsorted(y_sorted[i], x[i], side="right") for i in range(kappa)])
    x_ge = np.stack([np.searchsorted(y_sorted[i], x[i], side="left") for i in range(kappa)])
    y_ge = np.stack([np.searchsorted(x_sorted[i], y[i], side="left") for i in range(kappa)])
    return Prepared(
        alpha=x.shape[1],
        beta=y.shape[1],
        kappa=kappa,
        x_order=x_order,
        y_order=y_order,
        x_sorted=x_sorted,
        y_sorted=y_sorted,
        x_gt=x_gt,
        x_ge=x_ge,
        y_ge=y_ge,
    )


@dataclass
class Placements:
    theta: NDArray[np.float64]  # (kappa, B)
    lower: NDArray[np.float64]  # (kappa, B)
    upper: NDArray[np.float64]  # (kappa, B)
    a: NDArray[np.float64]  # (kappa, alpha, B)
    b: NDArray[np.float64]  # (kappa, beta, B)


def _prefix(w_sorted):
    out = np.empty((w_sorted.shape[0] + 1, w_sorted.shape[1]))
    out[0] = 0.0
    np.cumsum(w_sorted, axis=0, out=out[1:])
    return out


def _order_stat(sorted_vals, prefix, k):
    """k-th smallest value of the weighted multiset, per replicate column."""
    if k == 0:
        return np.full(prefix.shape[1], -np.inf)
    idx = np.count_nonzero(prefix[1:] < k - 0.5, axis=0)
    return sorted_vals[idx]


def _window_counts(prefix, positions, j_lo, j_hi):
    cols = np.arange(prefix.shape[1])
    p_lo = prefix[j_lo, cols]
    p_hi = prefix[j_hi, cols]
    return p_hi - np.minimum(np.maximum(prefix[positions], p_lo), p_hi)


def placements(
    prep: Prepared,
    p: float,
    q: float,
    c: NDArray[np.float64],
    d: NDArray[np.float64],
) -> Placements:
    """Evaluate the weighted kernel for ``B`` replicates at once.

    ``c`` has shape ``(alpha, B)`` and ``d`` shape ``(beta, B)``; column sums
    must equal ``alpha`` and ``beta`` respectively.
    """
    alpha, beta, kappa = prep.alpha, prep.beta, prep.kappa
    nrep = c.shape[1]
    k_lo = order_index(alpha, 1.0 - p)
    k_hi = order_index(beta, 1.0 - q)

    theta = np.empty((kappa, nrep))
    lower = np.empty((kappa, nrep))
    upper = np.empty((kappa, nrep))
    a_pl = np.empty((kappa, alpha, nrep))
    b_pl = np.empty((kappa, beta, nrep))

    for i in range(kappa):
        xs, ys = prep.x_sorted[i], prep.y_sorted[i]
        c_sorted = c[prep.x_order[i]]
        px = _prefix(c_sorted)
        py = _prefix(d[prep.y_order[i]])
        lo = _order_stat(xs, px, k_lo)
        hi = _order_stat(ys, py, k_hi)
        lower[i] = lo
        upper[i] = hi

        jx_lo = np.searchsorted(xs, lo, side="right")
        jx_hi = np.maximum(np.searchsorted(xs, hi, side="right"), jx_lo)
        jy_lo = np.searchsorted(ys, lo, side="right")
        jy_hi = np.maximum(np.searchsorted(ys, hi, side="right"), jy_lo)

        # theta: sum over sorted x inside the window of c * #{y in window, y > x}
        x_gt_sorted = prep.x_gt[i][prep.x_order[i]]
        above = _window_counts(py, x_gt_sorted, jy_lo, jy_hi)
        pos = np.arange(alpha)[:, None]
        in_x = (pos >= jx_lo) & (pos < jx_hi)
        theta[i] = np.einsum("rb,rb->b", c_sorted * in_x, above) / (alpha * beta)

        a_pl[i] = _window_counts(py, prep.x_ge[i], jy_lo, jy_hi) / beta
        b_pl[i] = _window_counts(px, prep.y_ge[i], jx_lo, jx_hi) / alpha

    return Placements(theta=theta, lower=lower, upper=upper, a=a_pl, b=b_pl)


def _centered(values, weights, n):
    """Subtract the weighted mean over the subject axis (axis -2)."""
    mean = np.einsum("...rb,rb->...b", values, weights) / n
    return values - mean[..., None, :]


def covariance(
    pl: Placements,
    c: NDArray[np.float64],
    d: NDArray[np.float64],
    paired: bool = False,
) -> NDArray[np.float64]:
    """Full ``(B, kappa, kappa)`` covariance estimate from placements.

    With ``paired`` the cross-group addend for dependent groups is subtracted;
    this needs ``alpha == beta`` with row ``t`` of both groups from one subject
    and ``c == d``.
    """
    alpha, beta = pl.a.shape[1], pl.b.shape[1]
    ac = _centered(pl.a, c, alpha)
    bc = _centered(pl.b, d, beta)
    cov_a = np.einsum("irb,jrb,rb->bij", ac, ac, c) / alpha
    cov_b = np.einsum("isb,jsb,sb->bij", bc, bc, d) / beta
    sigma = (alpha + beta) * (cov_a / alpha + cov_b / beta)
    if paired:
        cross = np.einsum("itb,jtb,tb->bij", ac, bc, c) / alpha
        sigma = sigma - (alpha + beta) / np.sqrt(alpha * beta) * (cross + np.swapaxes(cross, 1, 2))
    return 0.5 * (sigma + np.swapaxes(sigma, 1, 2))


def contrast_variances(
    pl: Placements,
    c: NDArray[np.float64],
    d: NDArray[np.float64],
    contrast: NDArray[np.float64],
    paired: bool = False,
) -> NDArray[np.float64]:
    """``diag(C Sigma C^T)`` per replicate, shape ``(r, B)``, without forming Sigma."""
    alpha, beta = pl.a.shape[1], pl.b.shape[1]
    pa = _centered(np.tensordot(contrast, pl.a, axes=(1, 0)), c, alpha)
    pb = _centered(np.tensordot(contrast, pl.b, axes=(1, 0)), d, beta)
    var_a = np.einsum("krb,krb,rb->kb", pa, pa, c) / alpha
    var_b = np.einsum("ksb,ksb,sb->kb", pb, pb, d) / beta
    v = (alpha + beta) * (var_a / alpha + var_b / beta)
    if paired:
        cross = np.einsum("ktb,ktb,tb->kb", pa, pb, c) / alpha
        v = v - (alpha + beta) / np.sqrt(alpha * beta) * 2.0 * cross
    return v
