"""Gaussian-copula scenarios and the Monte Carlo harness around the maximum test.

Every simulation run is keyed by ``(seed, run)``: the latent normal draws come
from stream ``(run, 0)`` and the bootstrap from stream ``(run, 1)``.  Several
procedures compared in one experiment therefore see identical data up to their
own marginal parameters, and results never depend on the worker count.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from typing import Sequence

import numpy as np
import yaml
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from pauc import contrasts as _contrasts
from pauc.contrasts import ContrastMatrix
from pauc.estimator import DiagnosticSample, MarginalSpec, TrimSpec, true_pauc
from pauc.inference import RngStream, run_mct

__all__ = [
    "ScenarioSpec",
    "ExperimentReport",
    "Calibration",
    "spearman_to_pearson",
    "correlation_factor",
    "sample_scenario",
    "true_theta",
    "calibrate_effect",
    "run_type1_experiment",
    "run_power_experiment",
    "run_comparison",
    "load_preset",
    "PRESETS",
]

PRESETS = ("table1", "table2", "table3")
PSD_REPAIR_THRESHOLD = -1e-10
PSD_FACTOR_TOLERANCE = -1e-8
CALIBRATION_TOLERANCE = 1e-3
ANGLE_TOLERANCE = 1e-2


def spearman_to_pearson(spearman: ArrayLike) -> NDArray[np.float64]:
    """Pearson correlation of the Gaussian copula with the given Spearman matrix.

    Uses ``rho = 2 sin(pi rho_s / 6)`` entrywise.  If the result has an
    eigenvalue below ``-1e-10`` its negative eigenvalues are clipped to zero,
    the matrix is rescaled to unit diagonal and a ``RuntimeWarning`` is issued.
    """
    rs = np.array(spearman, dtype=np.float64)
    if rs.ndim != 2 or rs.shape[0] != rs.shape[1]:
        raise ValueError("Spearman matrix must be square")
    if not np.all(np.isfinite(rs)) or np.any(np.abs(rs) > 1.0):
        raise ValueError("Spearman correlations must lie in [-1, 1]")
    rho = 2.0 * np.sin(np.pi * rs / 6.0)
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    w, v = np.linalg.eigh(rho)
    if w.min() < PSD_REPAIR_THRESHOLD:
        warnings.warn(
            f"converted correlation matrix was not PSD (min eigenvalue {w.min():.3g}); clipped",
            RuntimeWarning,
            stacklevel=2,
        )
        rho = (v * np.maximum(w, 0.0)) @ v.T
        d = np.sqrt(np.diag(rho))
        rho = rho / np.outer(d, d)
        rho = 0.5 * (rho + rho.T)
        np.fill_diagonal(rho, 1.0)
    return rho


def correlation_factor(corr: NDArray[np.float64]) -> NDArray[np.float64]:
    """Matrix ``L`` with ``L L^T = corr``; Cholesky, or eigenvectors when singular."""
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(corr)
        if w.min() < PSD_FACTOR_TOLERANCE:
            raise ValueError(f"correlation matrix is not positive semidefinite (min eigenvalue {w.min():.3g})")
        return v * np.sqrt(np.maximum(w, 0.0))


def _marginal(cfg) -> MarginalSpec:
    if isinstance(cfg, MarginalSpec):
        return cfg
    return MarginalSpec(str(cfg["kind"]), float(cfg.get("mu", 0.0)), float(cfg.get("sigma", 1.0)))


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """One simulated balanced trial design and the test applied to it.

    ``spearman`` is the ``2 kappa x 2 kappa`` rank correlation of the latent
    vector ``(non-diseased markers, diseased markers)``.  With
    ``independent_groups`` the two off-diagonal blocks must vanish and the
    groups are drawn independently; otherwise row ``t`` of both groups comes
    from one latent draw and the test uses the dependent-groups covariance.
    ``tunable`` is the (0-based) marker whose diseased location is calibrated.
    """

    nondiseased: tuple[MarginalSpec, ...]
    diseased: tuple[MarginalSpec, ...]
    spearman: NDArray[np.float64]
    group_size: int
    trim: TrimSpec
    contrast: ContrastMatrix
    delta: float = 0.05
    bootstrap_reps: int = 2000
    sim_runs: int = 1000
    tunable: int | None = None
    independent_groups: bool = True
    name: str = "custom"

    def __post_init__(self) -> None:
        nd = tuple(_marginal(m) for m in self.nondiseased)
        di = tuple(_marginal(m) for m in self.diseased)
        kappa = len(nd)
        if kappa < 1 or len(di) != kappa:
            raise ValueError("need the same positive number of non-diseased and diseased marginals")
        rs = np.array(self.spearman, dtype=np.float64)
        if rs.shape != (2 * kappa, 2 * kappa):
            raise ValueError(f"spearman must be {2 * kappa}x{2 * kappa}, got {rs.shape}")
        if not np.allclose(rs, rs.T, atol=1e-12, rtol=0):
            raise ValueError("spearman matrix must be symmetric")
        if not np.allclose(np.diag(rs), 1.0, atol=1e-12, rtol=0):
            raise ValueError("spearman matrix must have unit diagonal")
        if np.any(np.abs(rs) > 1.0):
            raise ValueError("spearman entries must lie in [-1, 1]")
        if self.independent_groups and np.any(rs[:kappa, kappa:] != 0.0):
            raise ValueError("cross-group blocks of the spearman matrix must be zero for independent groups")
        if int(self.group_size) < 2:
            raise ValueError("group_size must be at least 2")
        if int(self.sim_runs) < 1:
            raise ValueError("sim_runs must be at least 1")
        if not 0.0 < float(self.delta) < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.contrast.kappa != kappa:
            raise ValueError(f"contrast has {self.contrast.kappa} columns for {kappa} markers")
        tunable = kappa - 1 if self.tunable is None else int(self.tunable)
        if not 0 <= tunable < kappa:
            raise ValueError(f"tunable marker {tunable} out of range")
        trim = self.trim if isinstance(self.trim, TrimSpec) else TrimSpec(*self.trim)
        rs.setflags(write=False)
        for name, value in (
            ("nondiseased", nd),
            ("diseased", di),
            ("spearman", rs),
            ("group_size", int(self.group_size)),
            ("trim", trim),
            ("delta", float(self.delta)),
            ("bootstrap_reps", int(self.bootstrap_reps)),
            ("sim_runs", int(self.sim_runs)),
            ("tunable", tunable),
        ):
            object.__setattr__(self, name, value)

    @property
    def kappa(self) -> int:
        return len(self.nondiseased)

    @cached_property
    def pearson(self) -> NDArray[np.float64]:
        return spearman_to_pearson(self.spearman)

    @cached_property
    def factor(self) -> NDArray[np.float64]:
        return correlation_factor(self.pearson)

    def with_(self, **changes) -> "ScenarioSpec":
        """Copy with fields replaced (``trim`` may be a ``(p, q)`` pair)."""
        if "trim" in changes and not isinstance(changes["trim"], TrimSpec):
            changes["trim"] = TrimSpec(*changes["trim"])
        return replace(self, **changes)

    def with_mu(self, mu: float) -> "ScenarioSpec":
        """Copy with the tunable diseased marginal relocated to ``mu``."""
        di = list(self.diseased)
        di[self.tunable] = di[self.tunable].with_mu(mu)
        return replace(self, diseased=tuple(di))

    @property
    def mu(self) -> float:
        return self.diseased[self.tunable].mu

    @classmethod
    def from_config(cls, cfg: dict) -> "ScenarioSpec":
        """Build from a mapping as stored in the preset files."""
        try:
            nd = tuple(_marginal(m) for m in cfg["nondiseased"])
            di = tuple(_marginal(m) for m in cfg["diseased"])
            trim_cfg = cfg.get("trim", {"p": 1.0, "q": 0.0})
            trim = TrimSpec(*trim_cfg) if isinstance(trim_cfg, (list, tuple)) else TrimSpec(trim_cfg["p"], trim_cfg["q"])
            contrast = _contrasts.from_config(cfg.get("contrast", {"type": "tukey"}), len(nd))
            return cls(
                nondiseased=nd,
                diseased=di,
                spearman=np.array(cfg["spearman"], dtype=np.float64),
                group_size=int(cfg["group_size"]),
                trim=trim,
                contrast=contrast,
                delta=float(cfg.get("delta", 0.05)),
                bootstrap_reps=int(cfg.get("bootstrap_reps", 2000)),
                sim_runs=int(cfg.get("sim_runs", 1000)),
                tunable=cfg.get("tunable"),
                independent_groups=bool(cfg.get("independent_groups", True)),
                name=str(cfg.get("name", "custom")),
            )
        except KeyError as exc:
            raise ValueError(f"scenario config is missing key {exc.args[0]!r}") from None

    def to_config(self) -> dict:
        return {
            "name": self.name,
            "nondiseased": [{"kind": m.kind, "mu": m.mu, "sigma": m.sigma} for m in self.nondiseased],
            "diseased": [{"kind": m.kind, "mu": m.mu, "sigma": m.sigma} for m in self.diseased],
            "spearman": self.spearman.tolist(),
            "contrast": {"type": "custom", "rows": self.contrast.rows.tolist(), "labels": list(self.contrast.labels)},
            "trim": {"p": self.trim.p, "q": self.trim.q},
            "group_size": self.group_size,
            "delta": self.delta,
            "bootstrap_reps": self.bootstrap_reps,
            "sim_runs": self.sim_runs,
            "tunable": self.tunable,
            "independent_groups": self.independent_groups,
        }


def load_preset(name: str) -> dict:
    """Raw config mapping of a bundled preset (``table1``, ``table2``, ``table3``)."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("pauc").joinpath("presets", f"{name}.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def draw_latent(spec: ScenarioSpec, gen: np.random.Generator, n: int | None = None) -> NDArray[np.float64]:
    """``(n, 2 kappa)`` correlated standard normals for one simulated trial."""
    n = spec.group_size if n is None else n
    z = gen.standard_normal((n, 2 * spec.kappa))
    return z @ spec.factor.T


def latent_to_sample(spec: ScenarioSpec, z: NDArray[np.float64]) -> DiagnosticSample:
    """Apply the marginals: ``h(mu + sigma z)`` equals ``F^{-1}(Phi(z))`` exactly."""
    k = spec.kappa
    xi = np.column_stack([m.from_latent(z[:, i]) for i, m in enumerate(spec.nondiseased)])
    eta = np.column_stack([m.from_latent(z[:, k + i]) for i, m in enumerate(spec.diseased)])
    return DiagnosticSample.from_arrays(xi, eta)


def sample_scenario(spec: ScenarioSpec, rng: RngStream | np.random.Generator) -> DiagnosticSample:
    """Draw one trial of ``group_size`` subjects per group from the copula model."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return latent_to_sample(spec, draw_latent(spec, gen))


def true_theta(spec: ScenarioSpec, trim: TrimSpec | None = None, resolution: int = 100_000) -> NDArray[np.float64]:
    """Partial AUC of every marker under the scenario's marginals."""
    trim = spec.trim if trim is None else trim
    return np.array([true_pauc(f, g, trim, resolution) for f, g in zip(spec.nondiseased, spec.diseased)])


@dataclass(frozen=True)
class Calibration:
    """Result of tuning the tunable location to a target effect ``lambda * v``."""

    mu: float
    target_lambda: float
    direction: NDArray[np.float64]
    realized: NDArray[np.float64]
    angle: float
    spec: ScenarioSpec = field(repr=False)

    @property
    def realized_lambda(self) -> float:
        return float(np.linalg.norm(self.realized))


def _unit(v: NDArray[np.float64]) -> NDArray[np.float64]:
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("direction vector is zero")
    return v / norm


def calibrate_effect(
    spec: ScenarioSpec,
    target_lambda: float,
    tunable: int | None = None,
    direction_check: ArrayLike | None = None,
    resolution: int = 100_000,
) -> Calibration:
    """Find the location ``mu`` of one diseased marginal with ``C theta(mu) = lambda v``.

    ``theta`` is the true partial AUC at ``spec.trim``.  The projection
    ``<C theta(mu), v>`` is increasing in ``mu`` and is solved for ``lambda``
    with a bracketing root finder; the bracket around the current ``mu`` is
    doubled up to 40 times.  ``v`` defaults to the unit vector along column
    ``tunable`` of ``C``, the direction a shift of that one marker moves
    ``C theta`` in when the other components are equal.  Raises if
    ``||C theta - lambda v||_inf >= 1e-3`` or, for ``lambda > 0``, if the
    realized direction is more than ``1e-2`` radians off ``v``.
    """
    if tunable is not None:
        spec = spec.with_(tunable=tunable)
    t = spec.tunable
    C = spec.contrast.rows
    v = _unit(C[:, t].copy() if direction_check is None else np.asarray(direction_check, dtype=np.float64))
    f, g = spec.nondiseased[t], spec.diseased[t]
    theta = true_theta(spec, resolution=resolution)

    def realized(mu: float) -> NDArray[np.float64]:
        th = theta.copy()
        th[t] = true_pauc(f, g.with_mu(mu), spec.trim, resolution)
        return C @ th

    def gap(mu: float) -> float:
        return float(realized(mu) @ v) - target_lambda

    mu0 = g.mu
    width = 1.0
    lo, hi = mu0 - width, mu0 + width
    for _ in range(40):
        if gap(lo) <= 0.0 <= gap(hi):
            break
        width *= 2.0
        lo, hi = mu0 - width, mu0 + width
    else:
        raise ValueError(f"could not bracket the effect size {target_lambda} (reachable range exhausted)")
    mu = float(optimize.brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12))
    ct = realized(mu)
    if np.max(np.abs(ct - target_lambda * v)) >= CALIBRATION_TOLERANCE:
        raise ValueError(f"calibrated effect misses lambda * v by {np.max(np.abs(ct - target_lambda * v)):.3g}")
    norm = np.linalg.norm(ct)
    angle = 0.0 if norm == 0.0 else float(np.arccos(np.clip(ct @ v / norm, -1.0, 1.0)))
    if target_lambda > 0 and angle > ANGLE_TOLERANCE:
        raise ValueError(f"realized direction is {angle:.3g} rad away from the requested direction")
    return Calibration(mu=mu, target_lambda=float(target_lambda), direction=v, realized=ct, angle=angle, spec=spec.with_mu(mu))


@dataclass(frozen=True)
class ExperimentReport:
    """Monte Carlo rejection rates of one procedure in one scenario."""

    rejection_rate: float
    per_hypothesis_rates: NDArray[np.float64]
    runs: int
    mc_standard_error: float
    wall_time: float
    seed: int
    trim: TrimSpec
    group_size: int
    delta: float
    bootstrap_reps: int
    labels: tuple[str, ...]
    mu: float
    effect_size: float | None = None
    scenario: str = "custom"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "trim": {"p": self.trim.p, "q": self.trim.q},
            "group_size": self.group_size,
            "effect_size": self.effect_size,
            "mu": self.mu,
            "delta": self.delta,
            "bootstrap_reps": self.bootstrap_reps,
            "runs": self.runs,
            "seed": self.seed,
            "rejection_rate": self.rejection_rate,
            "mc_standard_error": self.mc_standard_error,
            "per_hypothesis_rates": dict(zip(self.labels, map(float, self.per_hypothesis_rates))),
            "wall_time_s": self.wall_time,
        }


def _check_compatible(specs: Sequence[ScenarioSpec]) -> None:
    first = specs[0]
    for s in specs[1:]:
        if (
            s.kappa != first.kappa
            or s.group_size != first.group_size
            or not np.array_equal(s.spearman, first.spearman)
            or s.independent_groups != first.independent_groups
        ):
            raise ValueError("procedures compared on shared draws need one design (kappa, n, copula)")


def _simulate_runs(specs: tuple[ScenarioSpec, ...], seed: int, runs: range) -> NDArray[np.bool_]:
    """Decisions, shape ``(len(runs), len(specs), r)``, for a contiguous block of runs."""
    r = max(s.contrast.r for s in specs)
    out = np.zeros((len(runs), len(specs), r), dtype=bool)
    base = specs[0]
    for k, run in enumerate(runs):
        stream = RngStream(seed, (run,))
        z = draw_latent(base, stream.child(0).generator())
        boot = stream.child(1)
        for j, spec in enumerate(specs):
            data = latent_to_sample(spec, z)
            res = run_mct(
                data,
                spec.contrast,
                spec.trim,
                delta=spec.delta,
                B=spec.bootstrap_reps,
                rng=boot,
                assume_independent_groups=spec.independent_groups,
            )
            out[k, j, : spec.contrast.r] = res.decisions
    return out


def _chunks(runs: int, workers: int) -> list[range]:
    size = max(1, -(-runs // (4 * workers)))
    return [range(i, min(i + size, runs)) for i in range(0, runs, size)]


def run_comparison(
    specs: Sequence[ScenarioSpec],
    seed: int = 0,
    runs: int | None = None,
    workers: int = 1,
    effect_sizes: Sequence[float | None] | None = None,
) -> list[ExperimentReport]:
    """Run several procedures on shared random numbers, one report each.

    All specs must share the design (markers, group size, copula); they may
    differ in marginal locations, trim, contrast, level and ``B``.  Runs are
    split into blocks over ``workers`` processes; each run depends only on
    ``(seed, run)``.
    """
    specs = tuple(specs)
    if not specs:
        raise ValueError("no procedures given")
    _check_compatible(specs)
    runs = specs[0].sim_runs if runs is None else int(runs)
    if runs < 1:
        raise ValueError("sim_runs must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    start = time.perf_counter()
    blocks = _chunks(runs, workers)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_runs, [specs] * len(blocks), [seed] * len(blocks), blocks))
    else:
        parts = [_simulate_runs(specs, seed, b) for b in blocks]
    decisions = np.concatenate(parts, axis=0)
    elapsed = time.perf_counter() - start
    effect_sizes = [None] * len(specs) if effect_sizes is None else list(effect_sizes)
    reports = []
    for j, spec in enumerate(specs):
        d = decisions[:, j, : spec.contrast.r]
        rate = float(np.mean(np.any(d, axis=1)))
        reports.append(
            ExperimentReport(
                rejection_rate=rate,
                per_hypothesis_rates=d.mean(axis=0),
                runs=runs,
                mc_standard_error=math.sqrt(rate * (1.0 - rate) / runs),
                wall_time=elapsed,
                seed=int(seed),
                trim=spec.trim,
                group_size=spec.group_size,
                delta=spec.delta,
                bootstrap_reps=spec.bootstrap_reps,
                labels=spec.contrast.labels,
                mu=spec.mu,
                effect_size=effect_sizes[j],
                scenario=spec.name,
            )
        )
    return reports


def run_type1_experiment(spec: ScenarioSpec, seed: int = 0, workers: int = 1) -> ExperimentReport:
    """Empirical global rejection rate of the maximum test under ``spec``.

    ``spec`` should satisfy the global null; this is not checked since the
    true parameter is only known up to quadrature error.
    """
    return run_comparison([spec], seed=seed, workers=workers)[0]


def run_power_experiment(
    spec: ScenarioSpec,
    seed: int = 0,
    workers: int = 1,
    effect_size: float | None = None,
) -> ExperimentReport:
    """Empirical power under ``spec``; pass ``effect_size`` to calibrate ``mu`` first."""
    if effect_size is not None:
        spec = calibrate_effect(spec, effect_size).spec
    return run_comparison([spec], seed=seed, workers=workers, effect_sizes=[effect_size])[0]
