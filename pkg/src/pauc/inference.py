"""Bootstrap-calibrated maximum test for linear hypotheses about partial AUCs.

The test statistic is ``T = sqrt(alpha + beta) V^{-1/2} C theta_hat`` with
``V = diag(C Sigma_hat C^T)``.  Its critical value is the equicoordinate
``1 - delta`` quantile of ``max_i |S*_i|`` where ``S*`` is the studentized
bootstrap version centred at ``theta_hat`` with ``V*`` re-estimated on each
resample.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pauc import _placements
from pauc.contrasts import ContrastMatrix
from pauc.empdist import order_index
from pauc.estimator import DiagnosticSample, TrimSpec

__all__ = [
    "RngStream",
    "MctResult",
    "VARIANCE_FLOOR",
    "test_statistic",
    "bootstrap_resample",
    "bootstrap_max_statistics",
    "equicoordinate_quantile",
    "run_mct",
    "holm_adjust",
]

VARIANCE_FLOOR = 1e-12
DEFAULT_BOOTSTRAP_REPS = 2000
# Replicates are drawn in fixed-size blocks, each from its own child stream, so
# the draws never depend on how blocks are spread over workers.
BLOCK_SIZE = 250
DEGENERATE_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by a seed and a path of stream indices."""

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        stream = (self.stream,) if isinstance(self.stream, int) else tuple(self.stream)
        if self.seed < 0 or any(s < 0 for s in stream):
            raise ValueError("seed and stream indices must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(s) for s in stream))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream + (int(index),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True, eq=False)
class MctResult:
    """Outcome of one maximum test.

    ``decisions[i]`` is ``|statistics[i]| > critical_value``; ``adjusted_p[i] <= delta``
    and ``0`` lying outside ``intervals[i]`` are both equivalent to it.
    """

    statistics: NDArray[np.float64]
    critical_value: float
    decisions: NDArray[np.bool_]
    adjusted_p: NDArray[np.float64]
    global_p: float
    intervals: NDArray[np.float64]
    bootstrap_reps_used: int
    degenerate_flags: NDArray[np.bool_]
    estimate: NDArray[np.float64]
    contrast_estimates: NDArray[np.float64]
    standard_errors: NDArray[np.float64]
    labels: tuple[str, ...]
    trim: TrimSpec
    delta: float
    degenerate_replicates: int = 0
    warnings: tuple[str, ...] = field(default=())

    @property
    def reject_global(self) -> bool:
        return bool(np.any(self.decisions))

    def to_dict(self) -> dict:
        return {
            "trim": {"p": self.trim.p, "q": self.trim.q},
            "delta": self.delta,
            "estimate": self.estimate.tolist(),
            "hypotheses": [
                {
                    "label": label,
                    "estimate": float(self.contrast_estimates[i]),
                    "statistic": float(self.statistics[i]),
                    "adjusted_p": float(self.adjusted_p[i]),
                    "reject": bool(self.decisions[i]),
                    "ci_lower": float(self.intervals[i, 0]),
                    "ci_upper": float(self.intervals[i, 1]),
                    "degenerate_variance": bool(self.degenerate_flags[i]),
                }
                for i, label in enumerate(self.labels)
            ],
            "critical_value": self.critical_value,
            "global_p": self.global_p,
            "reject_global": self.reject_global,
            "bootstrap_reps": self.bootstrap_reps_used,
            "degenerate_replicates": self.degenerate_replicates,
            "warnings": list(self.warnings),
        }


def _check_dims(data: DiagnosticSample, contrast: ContrastMatrix) -> None:
    if contrast.kappa != data.kappa:
        raise ValueError(f"contrast has {contrast.kappa} columns but the data has {data.kappa} markers")


def _studentize(estimates, variances, scale):
    degenerate = variances < VARIANCE_FLOOR
    stat = scale * estimates / np.sqrt(np.maximum(variances, VARIANCE_FLOOR))
    return stat, degenerate


def _point(data: DiagnosticSample, contrast: ContrastMatrix, trim: TrimSpec, paired: bool):
    ones_x = np.ones((data.alpha, 1))
    ones_y = np.ones((data.beta, 1))
    pl = _placements.placements(data.prepared, trim.p, trim.q, ones_x, ones_y)
    v = _placements.contrast_variances(pl, ones_x, ones_y, contrast.rows, paired=paired)[:, 0]
    theta = pl.theta[:, 0]
    est = contrast.rows @ theta
    stat, degenerate = _studentize(est, v, math.sqrt(data.alpha + data.beta))
    return theta, est, v, stat, degenerate


def test_statistic(data: DiagnosticSample, contrast: ContrastMatrix, trim: TrimSpec) -> NDArray[np.float64]:
    """Studentized contrasts ``sqrt(alpha + beta) <c_i, theta_hat> / sqrt(c_i^T Sigma_hat c_i)``.

    Variances below ``VARIANCE_FLOOR`` are replaced by the floor.
    """
    _check_dims(data, contrast)
    return _point(data, contrast, trim, paired=False)[3]


test_statistic.__test__ = False  # keep pytest from collecting the name


def _draw_indices(gen: np.random.Generator, nrep: int, alpha: int, beta: int, paired: bool):
    ix = gen.integers(0, alpha, size=(nrep, alpha))
    iy = ix if paired else gen.integers(0, beta, size=(nrep, beta))
    return ix, iy


def _counts(idx: NDArray[np.intp], n: int) -> NDArray[np.float64]:
    """Row multiplicities laid out ``(n, nrep)`` from ``(nrep, n)`` draws."""
    nrep = idx.shape[0]
    flat = (idx * nrep + np.arange(nrep)[:, None]).ravel()
    return np.bincount(flat, minlength=n * nrep).reshape(n, nrep).astype(np.float64)


def bootstrap_resample(data: DiagnosticSample, rng: RngStream, paired: bool = False) -> DiagnosticSample:
    """Draw whole rows with replacement, independently within each group.

    With ``paired`` one index vector is used for both groups (``alpha == beta``).
    """
    ix, iy = _draw_indices(rng.generator(), 1, data.alpha, data.beta, paired)
    return DiagnosticSample.from_arrays(data.xi[ix[0]], data.eta[iy[0]], data.markers)


def _block_max(data, contrast, trim, est, nrep, rng, paired):
    ix, iy = _draw_indices(rng.generator(), nrep, data.alpha, data.beta, paired)
    c = _counts(ix, data.alpha)
    d = c if paired else _counts(iy, data.beta)
    pl = _placements.placements(data.prepared, trim.p, trim.q, c, d)
    v = _placements.contrast_variances(pl, c, d, contrast.rows, paired=paired)
    diff = contrast.rows @ pl.theta - est[:, None]
    s, degenerate = _studentize(diff, v, math.sqrt(data.alpha + data.beta))
    return np.max(np.abs(s), axis=0), np.any(degenerate, axis=0)


def _bootstrap(data, contrast, trim, est, B, rng, workers, paired):
    blocks = [(k, min(BLOCK_SIZE, B - k * BLOCK_SIZE)) for k in range(-(-B // BLOCK_SIZE))]

    def run(block):
        k, size = block
        return _block_max(data, contrast, trim, est, size, rng.child(k), paired)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    maxima = np.concatenate([p[0] for p in parts])
    degenerate = np.concatenate([p[1] for p in parts])
    return maxima, int(np.count_nonzero(degenerate))


def bootstrap_max_statistics(
    data: DiagnosticSample,
    contrast: ContrastMatrix,
    trim: TrimSpec,
    B: int,
    rng: RngStream,
    workers: int = 1,
    assume_independent_groups: bool = True,
) -> NDArray[np.float64]:
    """``max_i |S*_i|`` for ``B`` studentized bootstrap replicates.

    Replicate variances below ``VARIANCE_FLOOR`` are floored, not dropped.
    """
    if B < 100:
        raise ValueError(f"B too small: need at least 100 bootstrap replicates, got {B}")
    _check_dims(data, contrast)
    paired = not assume_independent_groups
    est = _point(data, contrast, trim, paired)[1]
    return _bootstrap(data, contrast, trim, est, B, rng, workers, paired)[0]


def equicoordinate_quantile(values: ArrayLike, level: float) -> float:
    """``ceil(B * level)``-th order statistic of ``values`` (generalized inverse)."""
    vals = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if vals.size == 0:
        raise ValueError("empty input")
    if not 0.0 < level <= 1.0:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    k = order_index(vals.size, level)
    return float(vals[max(k, 1) - 1])


def _allowed_exceedances(B: int, delta: float) -> int:
    """Largest ``m`` with ``m / B <= delta`` as evaluated in floating point."""
    m = int(math.floor(B * delta))
    while m + 1 <= B and (m + 1) / B <= delta:
        m += 1
    while m > 0 and m / B > delta:
        m -= 1
    return m


def run_mct(
    data: DiagnosticSample,
    contrast: ContrastMatrix,
    trim: TrimSpec,
    delta: float = 0.05,
    B: int = DEFAULT_BOOTSTRAP_REPS,
    rng: RngStream | None = None,
    workers: int = 1,
    assume_independent_groups: bool = True,
) -> MctResult:
    """Multiple contrast test at family-wise level ``delta``.

    The critical value is the order statistic of the bootstrap maxima that
    leaves ``m = #{c : c / B <= delta}`` replicates strictly above it, i.e. the
    ``ceil(B (1 - delta))``-th.  Adjusted p-values count replicates with
    ``max |S*| >= |T_i|``, so ``adjusted_p <= delta`` exactly when the
    hypothesis is rejected.  Simultaneous intervals are
    ``<c_i, theta_hat> +- critical * se_i``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if B < 100:
        raise ValueError(f"B too small: need at least 100 bootstrap replicates, got {B}")
    _check_dims(data, contrast)
    rng = RngStream(0) if rng is None else rng
    paired = not assume_independent_groups
    if paired and data.alpha != data.beta:
        raise ValueError("dependent-groups mode needs equal group sizes")

    theta, est, v, stat, degenerate = _point(data, contrast, trim, paired)
    maxima, n_degenerate = _bootstrap(data, contrast, trim, est, B, rng, workers, paired)
    maxima.sort()

    m = _allowed_exceedances(B, delta)
    critical = float(maxima[B - m - 1])
    abs_stat = np.abs(stat)
    decisions = abs_stat > critical
    exceed = B - np.searchsorted(maxima, abs_stat, side="left")
    adjusted_p = exceed / B
    global_p = float((B - np.searchsorted(maxima, abs_stat.max(), side="left")) / B)

    scale = math.sqrt(data.alpha + data.beta)
    se = np.sqrt(np.maximum(v, VARIANCE_FLOOR)) / scale
    half = critical * se
    intervals = np.column_stack([est - half, est + half])

    notes = []
    if n_degenerate > DEGENERATE_WARN_FRACTION * B:
        notes.append(
            f"{n_degenerate} of {B} bootstrap replicates had a degenerate variance (window without observations)"
        )
    if np.any(degenerate):
        notes.append("degenerate variance for: " + ", ".join(np.asarray(contrast.labels)[degenerate]))

    result = MctResult(
        statistics=stat,
        critical_value=critical,
        decisions=decisions,
        adjusted_p=adjusted_p,
        global_p=global_p,
        intervals=intervals,
        bootstrap_reps_used=B,
        degenerate_flags=degenerate,
        estimate=theta,
        contrast_estimates=est,
        standard_errors=se,
        labels=contrast.labels,
        trim=trim,
        delta=float(delta),
        degenerate_replicates=n_degenerate,
        warnings=tuple(notes),
    )
    assert np.array_equal(decisions, adjusted_p <= delta)
    return result


def holm_adjust(p_values: ArrayLike) -> NDArray[np.float64]:
    """Holm step-down adjusted p-values, made monotone and capped at 1."""
    p = np.asarray(p_values, dtype=np.float64).ravel()
    if p.size == 0:
        return p.copy()
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    stepped = (m - np.arange(m)) * p[order]
    adjusted_sorted = np.minimum(np.maximum.accumulate(stepped), 1.0)
    out = np.empty(m)
    out[order] = adjusted_sorted
    return out
