"""Partial AUC parameter, its plug-in estimator, and true values for known marginals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from pauc import _placements
from pauc.empdist import PairedSample, order_index

__all__ = [
    "DiagnosticSample",
    "TrimSpec",
    "PaucEstimate",
    "MarginalSpec",
    "estimate_pauc",
    "estimate_pauc_trimmed_mw",
    "true_pauc",
    "pauc_upper_bound",
]


@dataclass(frozen=True, eq=False)
class DiagnosticSample:
    """Non-diseased rows (``alpha x kappa``) and diseased rows (``beta x kappa``).

    The two groups are stored and resampled separately.  ``markers`` are
    optional column names.
    """

    nondiseased: PairedSample
    diseased: PairedSample
    markers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.nondiseased, PairedSample):
            object.__setattr__(self, "nondiseased", PairedSample(np.asarray(self.nondiseased)))
        if not isinstance(self.diseased, PairedSample):
            object.__setattr__(self, "diseased", PairedSample(np.asarray(self.diseased)))
        if self.nondiseased.kappa != self.diseased.kappa:
            raise ValueError(
                f"groups disagree on number of markers: {self.nondiseased.kappa} vs {self.diseased.kappa}"
            )
        if self.nondiseased.n < 2 or self.diseased.n < 2:
            raise ValueError("each group needs at least 2 subjects")
        markers = tuple(self.markers) or tuple(f"marker{i + 1}" for i in range(self.kappa))
        if len(markers) != self.kappa:
            raise ValueError(f"{len(markers)} marker names given for {self.kappa} markers")
        object.__setattr__(self, "markers", markers)

    @classmethod
    def from_arrays(cls, xi: ArrayLike, eta: ArrayLike, markers: Sequence[str] = ()) -> "DiagnosticSample":
        return cls(PairedSample(np.asarray(xi)), PairedSample(np.asarray(eta)), tuple(markers))

    @property
    def alpha(self) -> int:
        return self.nondiseased.n

    @property
    def beta(self) -> int:
        return self.diseased.n

    @property
    def kappa(self) -> int:
        return self.nondiseased.kappa

    @property
    def xi(self) -> NDArray[np.float64]:
        return self.nondiseased.values

    @property
    def eta(self) -> NDArray[np.float64]:
        return self.diseased.values

    @cached_property
    def prepared(self) -> _placements.Prepared:
        return _placements.prepare(self.xi, self.eta)

    def transform(self, marker: int, fn) -> "DiagnosticSample":
        """Apply ``fn`` elementwise to one marker column of both groups."""
        xi = np.array(self.xi)
        eta = np.array(self.eta)
        xi[:, marker] = fn(xi[:, marker])
        eta[:, marker] = fn(eta[:, marker])
        return DiagnosticSample.from_arrays(xi, eta, self.markers)


@dataclass(frozen=True)
class TrimSpec:
    """Maximal acceptable false-positive rate ``p`` and minimal true-positive rate ``q``.

    ``p`` lies in (0, 1] and ``q`` in [0, 1); ``(1, 0)`` is the total AUC.
    """

    p: float
    q: float

    def __post_init__(self) -> None:
        p, q = float(self.p), float(self.q)
        if not (0.0 < p <= 1.0 and 0.0 <= q < 1.0):
            raise ValueError(f"trim (p, q) = ({self.p}, {self.q}) needs 0 < p <= 1 and 0 <= q < 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_total(self) -> bool:
        return self.p == 1.0 and self.q == 0.0

    def __str__(self) -> str:
        return f"({self.p:g},{self.q:g})"


TOTAL_AUC = TrimSpec(1.0, 0.0)


@dataclass(frozen=True)
class PaucEstimate:
    theta: NDArray[np.float64]
    lower_cuts: NDArray[np.float64]
    upper_cuts: NDArray[np.float64]
    alpha_n: int
    beta_n: int


def pauc_upper_bound(alpha: int, beta: int, trim: TrimSpec) -> float:
    """Largest value the estimator can take: the number of summands over ``alpha * beta``."""
    rows = alpha - order_index(alpha, 1.0 - trim.p)
    cols = order_index(beta, 1.0 - trim.q)
    return rows * cols / (alpha * beta)


def estimate_pauc(data: DiagnosticSample, trim: TrimSpec) -> PaucEstimate:
    """Plug-in partial AUC: the empirical Stieltjes integral over ``(a_hat, b_hat]``.

    Component ``i`` is
    ``(1/alpha) sum_r 1{a_hat < xi_r <= b_hat} [G_n(b_hat) - G_n(xi_r)]``
    with ``a_hat = F_n^{-1}(1 - p)`` and ``b_hat = G_n^{-1}(1 - q)``.
    Tied cross-group pairs contribute 0.
    """
    ones_x = np.ones((data.alpha, 1))
    ones_y = np.ones((data.beta, 1))
    pl = _placements.placements(data.prepared, trim.p, trim.q, ones_x, ones_y)
    return PaucEstimate(
        theta=pl.theta[:, 0],
        lower_cuts=pl.lower[:, 0],
        upper_cuts=pl.upper[:, 0],
        alpha_n=data.alpha,
        beta_n=data.beta,
    )


def estimate_pauc_trimmed_mw(data: DiagnosticSample, trim: TrimSpec) -> PaucEstimate:
    """Trimmed Mann-Whitney form: a literal double sum over order statistics.

    ``(1/(alpha beta)) sum_{r > ceil(alpha(1-p))} sum_{s <= ceil(beta(1-q))} 1{xi_(r) < eta_(s)}``.
    Agrees with :func:`estimate_pauc` on tie-free data.
    """
    alpha, beta = data.alpha, data.beta
    k_lo = order_index(alpha, 1.0 - trim.p)
    k_hi = order_index(beta, 1.0 - trim.q)
    theta = np.empty(data.kappa)
    lower = np.empty(data.kappa)
    upper = np.empty(data.kappa)
    for i in range(data.kappa):
        xs = np.sort(data.xi[:, i])
        ys = np.sort(data.eta[:, i])
        count = np.count_nonzero(xs[k_lo:, None] < ys[None, :k_hi])
        theta[i] = count / (alpha * beta)
        lower[i] = xs[k_lo - 1] if k_lo > 0 else -math.inf
        upper[i] = ys[k_hi - 1] if k_hi > 0 else -math.inf
    return PaucEstimate(theta=theta, lower_cuts=lower, upper_cuts=upper, alpha_n=alpha, beta_n=beta)


MarginalKind = Literal["normal", "lognormal", "logitnormal"]


@dataclass(frozen=True)
class MarginalSpec:
    """Monotone image ``h(N(mu, sigma^2))`` with ``h`` identity, ``exp`` or logistic."""

    kind: MarginalKind
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("normal", "lognormal", "logitnormal"):
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def with_mu(self, mu: float) -> "MarginalSpec":
        return MarginalSpec(self.kind, float(mu), self.sigma)

    def from_latent(self, z: ArrayLike) -> NDArray[np.float64]:
        """Map standard normal draws to this distribution."""
        t = self.mu + self.sigma * np.asarray(z, dtype=np.float64)
        if self.kind == "lognormal":
            return np.exp(t)
        if self.kind == "logitnormal":
            return special.expit(t)
        return t

    def _to_normal_scale(self, x):
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "lognormal":
                return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), -np.inf)
            if self.kind == "logitnormal":
                inside = np.clip(x, 0.0, 1.0)
                return np.where(x <= 0, -np.inf, np.where(x >= 1, np.inf, special.logit(inside)))
        return x

    def cdf(self, x: ArrayLike) -> NDArray[np.float64]:
        return special.ndtr((self._to_normal_scale(x) - self.mu) / self.sigma)

    def ppf(self, u: ArrayLike) -> NDArray[np.float64]:
        return self.from_latent(special.ndtri(np.asarray(u, dtype=np.float64)))


def _g_of_f_inverse(f: MarginalSpec, g: MarginalSpec, u: NDArray[np.float64]) -> NDArray[np.float64]:
    """``G(F^{-1}(u))``, evaluated on the shared normal scale when the kinds match."""
    if f.kind == g.kind:
        return special.ndtr((f.mu + f.sigma * special.ndtri(u) - g.mu) / g.sigma)
    return g.cdf(f.ppf(u))


def true_pauc(f: MarginalSpec, g: MarginalSpec, trim: TrimSpec, resolution: int = 100_000) -> float:
    """Partial AUC ``Pr{a < X < Y <= b}`` for independent ``X ~ f``, ``Y ~ g``.

    Substituting ``u = F(x)`` gives
    ``int_{1-p}^{F(b)} (1 - q - G(F^{-1}(u))) du``, evaluated with the composite
    midpoint rule on ``resolution`` cells.  The integrand is monotone with range
    at most ``1 - q``, so the absolute error is at most ``(1 - q) / resolution``.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    u_lo = 1.0 - trim.p
    if trim.q == 0.0:
        u_hi = 1.0
    else:
        u_hi = float(_g_of_f_inverse(g, f, np.array([1.0 - trim.q]))[0])
    if u_hi <= u_lo:
        return 0.0
    h = (u_hi - u_lo) / resolution
    u = u_lo + (np.arange(resolution) + 0.5) * h
    integrand = (1.0 - trim.q) - _g_of_f_inverse(f, g, u)
    return float(np.sum(np.maximum(integrand, 0.0)) * h)
