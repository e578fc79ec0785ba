"""Plug-in covariance estimator of the scaled partial AUC estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from pauc import _placements
from pauc.estimator import DiagnosticSample, PaucEstimate, TrimSpec

__all__ = ["CovarianceEstimate", "estimate_covariance"]


@dataclass(frozen=True)
class CovarianceEstimate:
    """``kappa x kappa`` estimate of the covariance of ``sqrt(alpha + beta) * theta_hat``."""

    sigma: NDArray[np.float64]

    @property
    def kappa(self) -> int:
        return self.sigma.shape[0]


def estimate_covariance(
    data: DiagnosticSample,
    trim: TrimSpec,
    cuts: PaucEstimate | None = None,
    assume_independent_groups: bool = True,
) -> CovarianceEstimate:
    """Estimate ``Sigma_hat`` for ``data`` at ``trim``.

    Entry ``(i, j)`` is the two double sums over diseased and non-diseased
    subject pairs, weighted by the joint empirical CDFs of the other group and
    restricted to the estimated window ``(a_hat, b_hat]``.  Both reduce to
    population covariances of placement values, which is how they are computed
    (O(kappa n log n) instead of O(kappa^2 n^3)).

    With ``assume_independent_groups=False`` the cross-group addend for
    dependent populations is subtracted.  That requires ``alpha == beta`` with
    row ``t`` of both groups taken from the same unit.

    ``cuts``, if given, must come from the same data and trim; it is checked
    against the recomputed cut points.
    """
    if cuts is not None:
        if (
            cuts.alpha_n != data.alpha
            or cuts.beta_n != data.beta
            or cuts.theta.shape != (data.kappa,)
        ):
            raise ValueError("cut points do not match the data (group sizes or number of markers differ)")
    paired = not assume_independent_groups
    if paired and data.alpha != data.beta:
        raise ValueError("dependent-groups correction needs equal group sizes (paired rows)")
    ones_x = np.ones((data.alpha, 1))
    ones_y = np.ones((data.beta, 1))
    pl = _placements.placements(data.prepared, trim.p, trim.q, ones_x, ones_y)
    if cuts is not None and not (
        np.array_equal(pl.lower[:, 0], cuts.lower_cuts) and np.array_equal(pl.upper[:, 0], cuts.upper_cuts)
    ):
        raise ValueError("cut points were not produced from this data and trim")
    sigma = _placements.covariance(pl, ones_x, ones_y, paired=paired)[0]
    return CovarianceEstimate(sigma=sigma)
