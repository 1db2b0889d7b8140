import numpy as np
import pytest

from alpha_lab.datasets import (
    CorruptionSpec,
    GmmSpec,
    bayes_direction,
    bayes_risk,
    corrupt,
    gaussian_linear_error,
    normalize_features,
    sample_balanced_gmm,
    sample_gmm,
)
from alpha_lab.training import (
    TrainConfig,
    angle_between,
    landscape_grid,
    lattice_strict_local_minima,
    relative_accuracy_gain,
    run_synthetic_experiment,
    saturation_report,
    single_basin,
    train_gd,
)

SYMMETRIC = GmmSpec.symmetric()

# anisotropic two-component config with unequal covariances (landscape demos)
SKEWED = GmmSpec(
    prior_minus=0.12,
    mean_minus=(-0.18, 1.49),
    mean_plus=(-0.01, 0.16),
    cov_minus=[[3.20, -2.02], [-2.02, 2.71]],
    cov_plus=[[4.19, 1.27], [1.27, 0.90]],
)


def test_spec_validation():
    with pytest.raises(ValueError):
        GmmSpec(1.5, (0, 0), (1, 1), np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        GmmSpec(0.5, (0, 0), (1, 1), [[1, 0.5], [0.4, 1]], np.eye(2))  # asymmetric
    with pytest.raises(ValueError):
        GmmSpec(0.5, (0, 0), (1, 1), [[1, 2], [2, 1]], np.eye(2))  # indefinite


def test_sampling_determinism_and_prior():
    d1 = sample_gmm(SYMMETRIC, 10_000, seed=42)
    d2 = sample_gmm(SYMMETRIC, 10_000, seed=42)
    assert np.array_equal(d1.X, d2.X) and np.array_equal(d1.y, d2.y)
    frac_minus = np.mean(d1.y == -1)
    sigma = np.sqrt(0.25 / 10_000)
    assert abs(frac_minus - 0.5) <= 3 * sigma


def test_zero_covariance_collapses_to_means():
    spec = GmmSpec(0.5, (-1.0, -1.0), (1.0, 1.0), np.zeros((2, 2)), np.zeros((2, 2)))
    data = sample_gmm(spec, 50, seed=1)
    for label, mean in ((-1, (-1.0, -1.0)), (1, (1.0, 1.0))):
        rows = data.X[data.y == label]
        assert np.allclose(rows, mean)


def test_normalization_unit_box():
    data = sample_gmm(SYMMETRIC, 1000, seed=3, normalize=True)
    assert data.normalized
    assert data.X.min() >= 0.0 and data.X.max() <= 1.0
    raw = np.array([[-7.0, 0.0], [7.0, 6.0]])
    boxed = normalize_features(raw)
    assert np.allclose(boxed, [[0.0, 0.5], [1.0, 1.0]])


def test_corrupt_identity():
    data = sample_gmm(SYMMETRIC, 200, seed=5)
    n_minus, n_plus = data.class_sizes()
    spec = CorruptionSpec(flip_probability=(0.0, 0.0), class_counts=(n_minus, n_plus))
    out = corrupt(data, spec, seed=9)
    assert np.array_equal(out.X, data.X)
    assert np.array_equal(out.y, data.y)
    assert not out.flipped.any()


def test_corrupt_exact_counts():
    data = sample_gmm(SYMMETRIC, 400, seed=6)
    out = corrupt(data, CorruptionSpec(class_counts=(2, 98)), seed=7)
    assert out.class_sizes() == (2, 98)
    assert out.n == 100
    with pytest.raises(ValueError):
        corrupt(data, CorruptionSpec(class_counts=(1000, 10)), seed=7)


def test_corrupt_flip_fraction_and_provenance():
    spec = GmmSpec.symmetric()
    data = sample_gmm(spec, 20_000, seed=8)
    out = corrupt(data, CorruptionSpec(flip_probability=(0.2, 0.0)), seed=11)
    minus_origin = out.origin == -1
    flipped_fraction = out.flipped[minus_origin].mean()
    sigma = np.sqrt(0.2 * 0.8 / minus_origin.sum())
    assert abs(flipped_fraction - 0.2) <= 3 * sigma
    assert not out.flipped[out.origin == 1].any()
    # flipped rows now carry the opposite label but remember their class
    assert np.all(out.y[out.flipped] == 1)
    assert np.all(out.origin[out.flipped] == -1)


def test_train_gd_separable_toy():
    X = np.array([[1.0, 0.2], [0.9, 0.1]])
    y = np.array([1, -1])
    data_ok = sample_gmm(SYMMETRIC, 4, seed=0)  # placeholder for type
    from alpha_lab.datasets import LabeledDataset

    toy = LabeledDataset(X, y, np.zeros(2, bool), y.copy())
    theta, report = train_gd(toy, TrainConfig(alpha=1.0, max_iterations=20_000))
    margins = y * (X @ theta.theta)
    assert np.all(margins > 0)
    assert report.cause in ("gradient_tolerance", "max_iterations")


def test_train_gd_symmetry_axis():
    # mirrored pair keeps the iterate on the span of x
    x = np.array([0.6, 0.8])
    from alpha_lab.datasets import LabeledDataset

    toy = LabeledDataset(
        np.stack([x, -x]), np.array([1, -1]), np.zeros(2, bool), np.array([1, -1])
    )
    theta, _ = train_gd(toy, TrainConfig(alpha=0.8, max_iterations=5000))
    cross = theta.theta[0] * x[1] - theta.theta[1] * x[0]
    assert abs(cross) <= 1e-12


def test_train_gd_projection_respects_radius():
    data = sample_gmm(SYMMETRIC, 100, seed=13)
    theta, _ = train_gd(data, TrainConfig(alpha=1.0, radius=0.2, max_iterations=2000))
    assert np.linalg.norm(theta.theta) <= 0.2 + 1e-12


def test_bayes_direction_closed_form():
    w, b = bayes_direction(SYMMETRIC)
    assert np.allclose(w, np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-12)
    assert b == pytest.approx(0.0, abs=1e-12)
    # scaling both means leaves the direction unchanged
    spec2 = GmmSpec.symmetric(mean=(2.0, 2.0))
    w2, _ = bayes_direction(spec2)
    assert np.allclose(w2, w, atol=1e-12)


def test_bayes_direction_grid_fallback_agrees():
    shared = GmmSpec(0.5, (-1.0, -0.5), (1.0, 0.5), np.eye(2), np.eye(2))
    w_closed, b_closed = bayes_direction(shared)
    forced = GmmSpec(
        0.5, (-1.0, -0.5), (1.0, 0.5), np.eye(2), np.eye(2) + np.diag([1e-9, 0.0])
    )
    assert not forced.shared_covariance
    w_grid, b_grid = bayes_direction(forced)
    assert np.degrees(angle_between(w_grid, w_closed)) <= 1.0
    assert abs(b_grid - b_closed) <= 0.05


def test_gaussian_linear_error_bayes_value():
    w, b = bayes_direction(SYMMETRIC)
    err = gaussian_linear_error(SYMMETRIC, w, b)
    from scipy.stats import norm

    assert err == pytest.approx(norm.sf(np.sqrt(2)), rel=1e-12)
    # Monte-Carlo cross-check
    data = sample_gmm(SYMMETRIC, 1_000_000, seed=17)
    pred = np.where(data.X @ w >= b, 1, -1)
    mc = np.mean(pred != data.y)
    assert abs(mc - err) <= 3 * np.sqrt(err * (1 - err) / data.n)


def test_bayes_risk_grid_integration_close_to_linear_error():
    rs = bayes_risk(SKEWED)
    # sanity: a valid probability, below coin flipping, above zero
    assert 0.0 < rs < 0.5
    w, b = bayes_direction(SKEWED)
    assert rs <= gaussian_linear_error(SKEWED, w, b) + 1e-6


def test_angle_between_range():
    assert angle_between([1, 0], [0, 1]) == pytest.approx(np.pi / 2)
    assert angle_between([1, 0], [-1, 0]) == pytest.approx(np.pi)
    with pytest.raises(ValueError):
        angle_between([0, 0], [1, 0])


def test_relative_accuracy_gain():
    gain, sign = relative_accuracy_gain(0.9, 0.9)
    assert gain == 0.0 and sign == 0
    g1, s1 = relative_accuracy_gain(0.99, 0.9)
    g2, s2 = relative_accuracy_gain(0.81, 0.9)
    assert g1 == pytest.approx(10.0) and s1 == 1
    assert g2 == pytest.approx(10.0) and s2 == -1


def test_landscape_grid_shapes_and_constant_dataset():
    from alpha_lab.datasets import LabeledDataset

    X = np.zeros((10, 2))
    y = np.array([1, -1] * 5)
    const = LabeledDataset(X, y, np.zeros(10, bool), y.copy())
    axis, risks = landscape_grid(const, 1.0, radius=1.0, grid_size=5)
    assert risks.shape == (5, 5)
    assert np.allclose(risks, np.log(2))
    axis1, risks1 = landscape_grid(const, 1.0, radius=1.0, grid_size=1)
    assert axis1[0] == 0.0 and risks1.shape == (1, 1)


def test_lattice_minima_and_single_basin():
    vals = np.array(
        [
            [3, 3, 3, 3, 3],
            [3, 2, 3, 3, 3],
            [3, 3, 3, 1, 3],
            [3, 3, 3, 3, 3],
            [3, 3, 3, 3, 3],
        ],
        dtype=float,
    )
    minima = lattice_strict_local_minima(vals)
    assert set(minima) == {(1, 1), (2, 3)}
    assert not single_basin(vals)
    bowl = np.add.outer(np.arange(-3, 4) ** 2, np.arange(-3, 4) ** 2).astype(float)
    assert single_basin(bowl)


def test_landscape_single_basin_for_convex_member():
    data = sample_gmm(SKEWED, 1500, seed=19, normalize=True)
    _, risks = landscape_grid(data, 0.95, radius=5.0, grid_size=41)
    assert single_basin(risks)


def test_saturation_report_bounds_hold():
    data = sample_gmm(SKEWED, 1500, seed=23, normalize=True)
    rep = saturation_report(data, radius=1.0, grid_size=21, alpha=10.0)
    assert rep["value_ok"] and rep["grad_ok"]
    with pytest.raises(ValueError):
        saturation_report(data, radius=1.0, grid_size=5, alpha=0.5)


def test_experiment_single_run_equals_single_predictor():
    corruption = CorruptionSpec(class_counts=(50, 50))
    config = TrainConfig(seed=7)
    summary = run_synthetic_experiment(
        SYMMETRIC, corruption, [1.0], runs=1, config=config, train_pool=400
    )
    assert summary.runs == 1
    assert np.allclose(summary.averaged_theta[0], summary.run_thetas[0, 0])
    assert 0.0 <= summary.angle_to_bayes[0] <= np.pi
    assert summary.relative_gain_pct[0] == 0.0


def test_experiment_determinism():
    corruption = CorruptionSpec(class_counts=(30, 70))
    config = TrainConfig(seed=123)
    s1 = run_synthetic_experiment(SYMMETRIC, corruption, [0.65, 1.0], 2, config, train_pool=300)
    s2 = run_synthetic_experiment(SYMMETRIC, corruption, [0.65, 1.0], 2, config, train_pool=300)
    assert np.array_equal(s1.averaged_theta, s2.averaged_theta)
    assert np.array_equal(s1.accuracy_overall, s2.accuracy_overall)
    assert np.array_equal(s1.run_thetas, s2.run_thetas)


def test_balanced_test_sets_are_balanced():
    test = sample_balanced_gmm(SYMMETRIC, 500, seed=31)
    assert test.class_sizes() == (500, 500)
