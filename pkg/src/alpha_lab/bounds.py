"""Uniform generalization bounds and their empirical audits.

The high-probability bound on |population risk - empirical risk| over
the radius-r parameter ball combines the margin Lipschitz constant with
the loss supremum:

    C(alpha) * 2 r sqrt(d) / sqrt(n) + 4 D(alpha) * sqrt(2 log(4/delta) / n).

A companion bound controls the uniform discrepancy between the empirical
risk at finite alpha >= 1 and the population risk at alpha = inf, with a
saturation term (log sigmoid(-r sqrt(d)))^2 / (2 alpha) that vanishes as
alpha grows.  Population risks are Monte-Carlo estimates; audits subtract
three standard errors from the measured side before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import logistic
from .datasets import GmmSpec, bayes_risk, gaussian_linear_error, sample_gmm
from .losses import canon_alpha, loss_sup_bound, margin_alpha_loss, margin_lipschitz_constant
from .training import TrainConfig, _batched_gd
from .util import derive_rng, softplus

_STREAM_POP = 701
_STREAM_THETA = 702
_STREAM_TRIAL = 703
_STREAM_TREND = 704


@dataclass(frozen=True)
class BoundQuery:
    """Everything a uniform bound depends on: alpha, ball, sample, confidence."""

    alpha: float
    r: float
    d: int
    n: int
    delta: float

    def __post_init__(self):
        canon_alpha(self.alpha)
        if self.r <= 0.0 or self.d < 1 or self.n < 1:
            raise ValueError("need r > 0, d >= 1, n >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def rademacher_bound(q: BoundQuery) -> float:
    """Two-term uniform deviation bound; decreasing in n like 1/sqrt(n)."""
    a = canon_alpha(q.alpha)
    rd = q.r * np.sqrt(q.d)
    c = margin_lipschitz_constant(a, rd)
    d_sup = loss_sup_bound(a, rd)
    return float(c * 2.0 * rd / np.sqrt(q.n) + 4.0 * d_sup * np.sqrt(2.0 * np.log(4.0 / q.delta) / q.n))


def uniform_discrepancy_bound(q: BoundQuery) -> float:
    """Bound on sup |empirical risk at alpha - population risk at inf|.

    Defined for alpha >= 1; the saturation term is proportional to
    1/alpha and vanishes at alpha = inf.
    """
    a = canon_alpha(q.alpha)
    if not a >= 1.0:
        raise ValueError("uniform discrepancy bound requires alpha >= 1")
    rd = q.r * np.sqrt(q.d)
    sig = 1.0 / (1.0 + np.exp(-rd))
    base = sig * (2.0 * rd / np.sqrt(q.n) + 4.0 * np.sqrt(2.0 * np.log(4.0 / q.delta) / q.n))
    saturation = 0.0 if np.isinf(a) else float(softplus(rd) ** 2 / (2.0 * a))
    return float(base + saturation)


def _ball_points(dim: int, radius: float, count: int, seed) -> np.ndarray:
    rng = derive_rng(*seed)
    u = rng.standard_normal((count, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return u * radii[:, None]


def _population_risks(thetas: np.ndarray, spec: GmmSpec, alpha, pop_n: int, seed, chunk: int = 50_000):
    """Chunked Monte-Carlo population risk and its standard error per theta."""
    m = thetas.shape[0]
    total = np.zeros(m)
    total_sq = np.zeros(m)
    seen = 0
    block = 0
    while seen < pop_n:
        k = min(chunk, pop_n - seen)
        pool = sample_gmm(spec, k, seed=(*seed, block), normalize=True)
        Z = (pool.X @ thetas.T) * pool.y[:, None].astype(float)
        vals = margin_alpha_loss(alpha, Z)
        total += vals.sum(axis=0)
        total_sq += (vals**2).sum(axis=0)
        seen += k
        block += 1
    mean = total / seen
    var = np.maximum(total_sq / seen - mean**2, 0.0)
    se = np.sqrt(var / seen)
    return mean, se


@dataclass
class GeneralizationAudit:
    """Per-trial measured sup deviations against the bound."""

    alpha: float
    bound: float
    measured: np.ndarray       # per trial: sup_theta (|gap| - 3 SE)
    passed: np.ndarray
    pass_fraction: float


def audit_generalization(
    spec: GmmSpec,
    query: BoundQuery,
    trials: int,
    n_theta: int = 200,
    pop_n: int = 1_000_000,
    seed: int = 0,
) -> GeneralizationAudit:
    """Measure sup_theta |empirical - population risk| over seeded trials.

    Features are mapped to the unit box (the bound's contract).  Each
    trial draws a fresh n-sample dataset; the population side is one
    shared Monte-Carlo estimate with per-theta standard errors, and three
    standard errors of slack are subtracted from the measured gap.
    """
    thetas = _ball_points(query.d, query.r, n_theta, (seed, _STREAM_THETA))
    pop, pop_se = _population_risks(thetas, spec, query.alpha, pop_n, (seed, _STREAM_POP))
    bound = rademacher_bound(query)
    measured = np.zeros(trials)
    for t in range(trials):
        data = sample_gmm(spec, query.n, seed=(seed, _STREAM_TRIAL, t), normalize=True)
        emp = logistic.risk_batch(thetas, data, query.alpha)
        measured[t] = np.max(np.abs(emp - pop) - 3.0 * pop_se)
    passed = measured <= bound
    return GeneralizationAudit(query.alpha, bound, measured, passed, float(passed.mean()))


def audit_uniform_discrepancy(
    spec: GmmSpec,
    query: BoundQuery,
    trials: int,
    n_theta: int = 200,
    pop_n: int = 1_000_000,
    seed: int = 0,
) -> GeneralizationAudit:
    """Measure sup_theta |empirical risk at alpha - population risk at inf|."""
    thetas = _ball_points(query.d, query.r, n_theta, (seed, _STREAM_THETA))
    pop_inf, pop_se = _population_risks(thetas, spec, np.inf, pop_n, (seed, _STREAM_POP))
    bound = uniform_discrepancy_bound(query)
    measured = np.zeros(trials)
    for t in range(trials):
        data = sample_gmm(spec, query.n, seed=(seed, _STREAM_TRIAL, t), normalize=True)
        emp = logistic.risk_batch(thetas, data, query.alpha)
        measured[t] = np.max(np.abs(emp - pop_inf) - 3.0 * pop_se)
    passed = measured <= bound
    return GeneralizationAudit(query.alpha, bound, measured, passed, float(passed.mean()))


@dataclass
class TrendResult:
    """Excess 0-1 risk of trained predictors as the sample size grows.

    The check is conditional on the linear model attaining the minimal
    risk for the data distribution; ``conditional`` records that caveat.
    """

    alpha: float
    ns: List[int]
    mean_gap: np.ndarray
    se_gap: np.ndarray
    bayes: float
    conditional: str = (
        "trend is conditional on the linear model attaining the minimal risk; "
        "this assumption is not verified"
    )

    def non_increasing_within_se(self) -> bool:
        for i in range(len(self.ns) - 1):
            tol = float(np.hypot(self.se_gap[i], self.se_gap[i + 1]))
            if self.mean_gap[i + 1] > self.mean_gap[i] + tol:
                return False
        return True


def optimality_trend(
    spec: GmmSpec,
    alpha,
    n_grid: Sequence[int],
    runs: int,
    config: Optional[TrainConfig] = None,
    seed: int = 0,
) -> TrendResult:
    """Train empirical-risk minimizers at each n and report 0-1 excess risk.

    The 0-1 risk of each trained linear predictor is computed exactly via
    the Gaussian projection of the mixture, and compared with the Bayes
    risk of the clean distribution.
    """
    cfg = config or TrainConfig()
    a = canon_alpha(alpha)
    rstar = bayes_risk(spec)
    mean_gap = np.zeros(len(n_grid))
    se_gap = np.zeros(len(n_grid))
    for i, n in enumerate(n_grid):
        datasets = [
            sample_gmm(spec, int(n), seed=(seed, _STREAM_TREND, i, r)) for r in range(runs)
        ]
        X = np.stack([d.X for d in datasets])
        y = np.stack([d.y for d in datasets]).astype(float)
        thetas, _ = _batched_gd(X, y, TrainConfig(
            alpha=a,
            learning_rate=cfg.learning_rate,
            optimality_parameter=cfg.optimality_parameter,
            max_iterations=cfg.max_iterations,
            radius=cfg.radius,
            seed=cfg.seed,
        ))
        gaps = np.array(
            [gaussian_linear_error(spec, th, 0.0) - rstar for th in thetas]
        )
        mean_gap[i] = gaps.mean()
        se_gap[i] = gaps.std(ddof=1) / np.sqrt(runs) if runs > 1 else np.inf
    return TrendResult(a, [int(n) for n in n_grid], mean_gap, se_gap, float(rstar))
