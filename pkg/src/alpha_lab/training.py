"""Full-batch gradient-descent training and the seeded experiment harness.

``train_gd`` minimizes the empirical risk with a fixed learning rate,
projecting onto the parameter ball when a finite radius is set, and
stops once the gradient norm falls below the optimality parameter.
``run_synthetic_experiment`` repeats draw/corrupt/train over seeded runs
for several tuning values, averages the trained linear predictors, and
reports their angles to the Bayes reference plus balanced-test
accuracies.  ``landscape_grid`` evaluates the empirical risk over a 2-D
parameter lattice for landscape and saturation audits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import expit

from . import logistic
from .datasets import (
    CorruptionSpec,
    GmmSpec,
    LabeledDataset,
    bayes_direction,
    corrupt,
    sample_balanced_gmm,
    sample_gmm,
)
from .losses import canon_alpha

# Reserved seed-stream tags so data, corruption and test draws never collide.
_STREAM_DATA = 101
_STREAM_CORRUPT = 102
_STREAM_TEST = 103


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of full-batch gradient descent."""

    alpha: float = 1.0
    learning_rate: float = 0.01
    optimality_parameter: float = 1e-4
    max_iterations: int = 200_000
    radius: float = np.inf
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0 or self.optimality_parameter <= 0.0:
            raise ValueError("learning rate and optimality parameter must be positive")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    iterations: int
    grad_norm: float
    cause: str  # "gradient_tolerance" or "max_iterations"


class NumericTrainingError(RuntimeError):
    """Gradient went non-finite; carries the offending iterate."""

    def __init__(self, iteration: int, theta: np.ndarray):
        self.iteration = iteration
        self.theta = theta
        super().__init__(
            f"non-finite gradient at iteration {iteration}; iterate dump: {theta.tolist()}"
        )


def _gd_step_weights(Z: np.ndarray, y: np.ndarray, beta: float) -> np.ndarray:
    """F1 = -y * sigmoid(z)^(1-beta) * sigmoid(-z).

    For beta <= 1 the direct power of the sigmoid is stable (exponent is
    nonnegative); for beta > 1 the weight blows up at very negative
    margins, so it is evaluated in the log domain via
    softplus(z) = z + softplus(-z).
    """
    if beta <= 1.0:
        P = expit(Z)
        return -y * P ** (1.0 - beta) * (1.0 - P)
    S = np.logaddexp(0.0, -Z)
    with np.errstate(over="ignore"):
        return -y * np.exp(-Z - (2.0 - beta) * S)


def _batched_gd(X: np.ndarray, y: np.ndarray, config: TrainConfig):
    """Gradient descent on R stacked datasets of identical shape.

    X is (R, n, d), y is (R, n).  Converged runs are removed from the
    working batch (and their iterates frozen), so the batched result is
    bit-identical to training each run alone.
    """
    R, n, d = X.shape
    a = canon_alpha(config.alpha)
    beta = 0.0 if np.isinf(a) else 1.0 / a
    lr = config.learning_rate
    tol = config.optimality_parameter
    theta_out = np.zeros((R, d))
    iterations = np.zeros(R, dtype=int)
    grad_norms = np.full(R, np.inf)
    done = np.zeros(R, dtype=bool)

    idx = np.arange(R)  # rows of the working batch -> original run ids
    Xw, yw = X, y
    theta = np.zeros((len(idx), d))
    it = 0
    while True:
        Z = np.matmul(Xw, theta[:, :, None])[:, :, 0] * yw
        W = _gd_step_weights(Z, yw, beta)
        grads = np.matmul(W[:, None, :], Xw)[:, 0, :] / n
        gn = np.sqrt((grads * grads).sum(axis=1))
        if not np.all(np.isfinite(gn)):
            bad = int(np.flatnonzero(~np.isfinite(gn))[0])
            raise NumericTrainingError(it, theta[bad])
        newly = gn <= tol
        stop = newly | (it >= config.max_iterations)
        if np.any(stop):
            rows = idx[stop]
            theta_out[rows] = theta[stop]
            iterations[rows] = it
            grad_norms[rows] = gn[stop]
            done[rows] = newly[stop]
            keep = ~stop
            if not np.any(keep):
                break
            idx, Xw, yw, theta, grads = idx[keep], Xw[keep], yw[keep], theta[keep], grads[keep]
        theta -= lr * grads
        if np.isfinite(config.radius):
            norms = np.linalg.norm(theta, axis=1)
            over = norms > config.radius
            if np.any(over):
                theta[over] *= (config.radius / norms[over])[:, None]
        it += 1
    reports = [
        ConvergenceReport(
            converged=bool(done[r]),
            iterations=int(iterations[r]),
            grad_norm=float(grad_norms[r]),
            cause="gradient_tolerance" if done[r] else "max_iterations",
        )
        for r in range(R)
    ]
    return theta_out, reports


def train_gd(data: LabeledDataset, config: TrainConfig):
    """Train one dataset to convergence; returns (ParamVector, report)."""
    if data.n == 0:
        raise ValueError("empty dataset")
    theta, reports = _batched_gd(data.X[None], data.y[None].astype(float), config)
    return logistic.ParamVector(theta[0], config.radius), reports[0]


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two nonzero vectors, in radians."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("angle undefined for a zero vector")
    c = np.clip(u @ v / (nu * nv), -1.0, 1.0)
    return float(np.arccos(c))


def relative_accuracy_gain(acc_alpha: float, acc_reference: float) -> Tuple[float, int]:
    """|acc - ref| / ref * 100 and, separately, the sign of (acc - ref)."""
    if acc_reference <= 0.0:
        return float("inf") if acc_alpha > 0 else 0.0, int(np.sign(acc_alpha - acc_reference))
    return abs(acc_alpha - acc_reference) / acc_reference * 100.0, int(
        np.sign(acc_alpha - acc_reference)
    )


@dataclass
class ExperimentSummary:
    """Averaged predictors and their quality metrics, one row per alpha."""

    alphas: List[float]
    averaged_theta: np.ndarray          # (A, d)
    angle_to_bayes: np.ndarray          # radians, in [0, pi]
    accuracy_minus: np.ndarray
    accuracy_plus: np.ndarray
    accuracy_overall: np.ndarray
    relative_gain_pct: np.ndarray       # vs the alpha = 1 arm (nan if absent)
    gain_sign: np.ndarray
    run_thetas: np.ndarray              # (A, runs, d)
    run_converged: np.ndarray           # (A, runs) bool
    runs: int

    @property
    def angles_degrees(self) -> np.ndarray:
        return np.degrees(self.angle_to_bayes)


def run_synthetic_experiment(
    spec: GmmSpec,
    corruption: CorruptionSpec,
    alphas: Sequence[float],
    runs: int,
    config: TrainConfig,
    train_pool: int = 400,
    test_per_class: int = 1000,
    average: str = "mean",
) -> ExperimentSummary:
    """Seeded draw/corrupt/train loop with cross-run predictor averaging.

    Every run draws a fresh pool (seed derived from the master seed and
    the run index), corrupts it, and trains one predictor per alpha on
    the same corrupted sample.  Test accuracy is measured for the
    averaged predictor on a fresh clean balanced test set, regardless of
    the corruption.  ``average`` may be "mean" or "median" (robustness
    check; the averaging rule is a harness convention).
    """
    if runs < 1:
        raise ValueError("need at least one run")
    if average not in ("mean", "median"):
        raise ValueError("average must be 'mean' or 'median'")
    alphas = [canon_alpha(a) for a in alphas]
    master = config.seed
    normalize = corruption.feature_normalization

    datasets = []
    for r in range(runs):
        pool = sample_gmm(spec, train_pool, seed=(master, _STREAM_DATA, r), normalize=normalize)
        datasets.append(corrupt(pool, corruption, seed=(master, _STREAM_CORRUPT, r)))
    sizes = {d.n for d in datasets}
    if len(sizes) != 1:
        raise ValueError("corruption produced runs of unequal size; fix class_counts")
    X = np.stack([d.X for d in datasets])
    y = np.stack([d.y for d in datasets]).astype(float)

    test = sample_balanced_gmm(
        spec, test_per_class, seed=(master, _STREAM_TEST), normalize=normalize
    )
    bayes_w, _ = bayes_direction(spec)

    A = len(alphas)
    d = spec.dim
    avg_theta = np.zeros((A, d))
    run_thetas = np.zeros((A, runs, d))
    run_conv = np.zeros((A, runs), dtype=bool)
    angles = np.zeros(A)
    acc_minus = np.zeros(A)
    acc_plus = np.zeros(A)
    acc_all = np.zeros(A)
    for i, a in enumerate(alphas):
        thetas, reports = _batched_gd(X, y, replace(config, alpha=a))
        run_thetas[i] = thetas
        run_conv[i] = [rep.converged for rep in reports]
        avg = thetas.mean(axis=0) if average == "mean" else np.median(thetas, axis=0)
        avg_theta[i] = avg
        angles[i] = angle_between(avg, bayes_w)
        pred = np.where(test.X @ avg >= 0.0, 1, -1)
        correct = pred == test.y
        acc_minus[i] = correct[test.y == -1].mean()
        acc_plus[i] = correct[test.y == 1].mean()
        acc_all[i] = correct.mean()

    gains = np.full(A, np.nan)
    signs = np.zeros(A)
    if 1.0 in alphas:
        ref = acc_all[alphas.index(1.0)]
        for i in range(A):
            gains[i], signs[i] = relative_accuracy_gain(acc_all[i], ref)
    return ExperimentSummary(
        alphas, avg_theta, angles, acc_minus, acc_plus, acc_all,
        gains, signs, run_thetas, run_conv, runs,
    )


def parameter_lattice(radius: float, grid_size: int) -> np.ndarray:
    """1-D lattice over [-radius, radius]; a single point sits at 0."""
    if grid_size < 1:
        raise ValueError("grid size must be positive")
    if grid_size == 1:
        return np.zeros(1)
    return np.linspace(-radius, radius, grid_size)


def landscape_grid(data: LabeledDataset, alpha, radius: float, grid_size: int):
    """Empirical risk over the square lattice in the 2-D parameter plane.

    Returns (axis, risk matrix) with risk[i, j] at theta = (axis[i], axis[j]).
    """
    if data.dim != 2:
        raise ValueError("landscape grids are defined for d = 2")
    axis = parameter_lattice(radius, grid_size)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    thetas = np.stack([t1.ravel(), t2.ravel()], axis=1)
    risks = logistic.risk_batch(thetas, data, alpha)
    return axis, risks.reshape(grid_size, grid_size)


def saturation_report(
    data: LabeledDataset, radius: float, grid_size: int, alpha: float = 10.0
) -> Dict[str, float]:
    """Grid audit of |risk_alpha - risk_inf| against the 1/alpha rate.

    Both the value gap and the gradient gap are compared with the
    respective Lipschitz-in-1/alpha envelopes max L/alpha and max J/alpha
    over the same lattice.  Requires alpha >= 1 and unit-box features.
    """
    a = canon_alpha(alpha)
    if not a >= 1.0:
        raise ValueError("saturation audit needs alpha >= 1")
    if data.dim != 2:
        raise ValueError("saturation grids are defined for d = 2")
    if not data.normalized:
        raise ValueError("saturation envelopes assume unit-box features; normalize the data")
    axis = parameter_lattice(radius, grid_size)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    thetas = np.stack([t1.ravel(), t2.ravel()], axis=1)
    r_a = logistic.risk_batch(thetas, data, a)
    r_inf = logistic.risk_batch(thetas, data, np.inf)
    g_a = logistic.risk_gradient_batch(thetas, data, a)
    g_inf = logistic.risk_gradient_batch(thetas, data, np.inf)
    norms = np.linalg.norm(thetas, axis=1)
    sqrt_d = np.sqrt(2.0)
    L = np.logaddexp(0.0, norms * sqrt_d) ** 2 / 2.0
    J = sqrt_d * np.logaddexp(0.0, norms * sqrt_d) / (1.0 + np.exp(-norms * sqrt_d))
    value_gap = np.abs(r_a - r_inf)
    grad_gap = np.linalg.norm(g_a - g_inf, axis=1)
    return {
        "max_value_gap": float(value_gap.max()),
        "max_value_bound": float((L / a).max()),
        "max_grad_gap": float(grad_gap.max()),
        "max_grad_bound": float((J / a).max()),
        "value_ok": bool(value_gap.max() <= (L / a).max()),
        "grad_ok": bool(grad_gap.max() <= (J / a).max()),
    }


def lattice_strict_local_minima(values: np.ndarray) -> List[Tuple[int, int]]:
    """Interior lattice points strictly below all eight neighbors."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or min(v.shape) < 3:
        return []
    out = []
    for i in range(1, v.shape[0] - 1):
        for j in range(1, v.shape[1] - 1):
            patch = v[i - 1 : i + 2, j - 1 : j + 2]
            neighbors = np.delete(patch.ravel(), 4)
            if np.all(v[i, j] < neighbors):
                out.append((i, j))
    return out


def single_basin(values: np.ndarray) -> bool:
    """True when every strict 8-neighbor local minimum is the global one."""
    v = np.asarray(values, dtype=float)
    minima = lattice_strict_local_minima(v)
    gi, gj = np.unravel_index(int(np.argmin(v)), v.shape)
    interior = (
        1 <= gi < v.shape[0] - 1 and 1 <= gj < v.shape[1] - 1
    )
    allowed = {(int(gi), int(gj))} if interior else set()
    return set(minima) <= allowed
