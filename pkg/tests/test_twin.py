"""Twin experiment generation: operators, truth, observations, archives."""

import numpy as np
import pytest

from enkf_evidence.lorenz95 import Lorenz95Config, equilibrium
from enkf_evidence.twin import (
    DiagonalCovariance,
    ObservationOperator,
    TwinRun,
    generate_truth,
    load_archive,
    make_twin_run,
    save_archive,
    synthesize_observations,
)


# -- observation operator ---------------------------------------------------


def test_full_operator_is_identity():
    op = ObservationOperator.full(5)
    x = np.arange(5.0)
    np.testing.assert_array_equal(op.apply(x), x)
    np.testing.assert_array_equal(op.matrix(), np.eye(5))


def test_selection_semantics():
    op = ObservationOperator(np.array([0, 2]), 3)
    np.testing.assert_array_equal(op.apply(np.array([1.0, 2.0, 3.0])), [1.0, 3.0])


def test_operator_linearity():
    rng = np.random.default_rng(0)
    op = ObservationOperator(np.array([1, 3, 4]), 6)
    x, z = rng.standard_normal(6), rng.standard_normal(6)
    np.testing.assert_allclose(
        op.apply(2.0 * x + 3.0 * z), 2.0 * op.apply(x) + 3.0 * op.apply(z), rtol=1e-15
    )


def test_operator_matrix_matches_apply():
    rng = np.random.default_rng(1)
    op = ObservationOperator(np.array([0, 2, 5]), 7)
    x = rng.standard_normal(7)
    np.testing.assert_allclose(op.matrix() @ x, op.apply(x), rtol=1e-15)


def test_operator_validation():
    with pytest.raises(ValueError):
        ObservationOperator(np.array([2, 1]), 5)  # not increasing
    with pytest.raises(ValueError):
        ObservationOperator(np.array([1, 1]), 5)  # duplicate
    with pytest.raises(ValueError):
        ObservationOperator(np.array([-1, 2]), 5)
    with pytest.raises(ValueError):
        ObservationOperator(np.array([0, 5]), 5)
    with pytest.raises(ValueError):
        ObservationOperator(np.array([], dtype=int), 5)
    with pytest.raises(ValueError):
        ObservationOperator.full(4).apply(np.zeros(5))


def test_covariance_validation():
    with pytest.raises(ValueError):
        DiagonalCovariance(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        DiagonalCovariance(np.array([1.0, -2.0]))
    with pytest.raises(ValueError):
        DiagonalCovariance(np.array([1.0, np.inf]))
    assert DiagonalCovariance.isotropic(2.0, 3).size == 3


# -- truth generation -------------------------------------------------------


def test_truth_deterministic():
    cfg = Lorenz95Config()
    a = generate_truth(cfg, 5, seed=42, burn_in_steps=100)
    b = generate_truth(cfg, 5, seed=42, burn_in_steps=100)
    np.testing.assert_array_equal(a, b)
    c = generate_truth(cfg, 5, seed=43, burn_in_steps=100)
    assert not np.array_equal(a, c)


def test_truth_zero_perturbation_stays_at_equilibrium():
    cfg = Lorenz95Config(forcing=8.0)
    truth = generate_truth(cfg, 4, seed=0, burn_in_steps=0, init_perturbation=0.0)
    np.testing.assert_array_equal(truth, np.tile(equilibrium(cfg), (4, 1)))


def test_truth_shape_and_one_state_per_cycle():
    cfg = Lorenz95Config()
    truth = generate_truth(cfg, 7, seed=1, burn_in_steps=50)
    assert truth.shape == (7, cfg.grid_size)
    # Consecutive rows differ: states are recorded after propagation.
    assert np.all(np.any(truth[1:] != truth[:-1], axis=1))


def test_truth_validation():
    cfg = Lorenz95Config()
    with pytest.raises(ValueError):
        generate_truth(cfg, 0, seed=0)
    with pytest.raises(ValueError):
        generate_truth(cfg, 3, seed=0, cycle_interval_steps=0)


# -- observations -----------------------------------------------------------


def test_observations_noiseless_limit():
    cfg = Lorenz95Config()
    truth = generate_truth(cfg, 10, seed=2, burn_in_steps=100)
    op = ObservationOperator.full(cfg.grid_size)
    obs = synthesize_observations(truth, op, DiagonalCovariance.isotropic(1e-30, 40), seed=2)
    np.testing.assert_allclose(obs, truth, atol=1e-12)


def test_observations_deterministic_and_seed_sensitive():
    cfg = Lorenz95Config()
    truth = generate_truth(cfg, 6, seed=3, burn_in_steps=50)
    op = ObservationOperator.full(cfg.grid_size)
    R = DiagonalCovariance.isotropic(1.0, 40)
    a = synthesize_observations(truth, op, R, seed=3)
    b = synthesize_observations(truth, op, R, seed=3)
    c = synthesize_observations(truth, op, R, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.slow
def test_observation_noise_empirical_variance():
    # Law of large numbers on the generator itself: unit-variance noise.
    cfg = Lorenz95Config()
    truth = generate_truth(cfg, 50_000, seed=5, burn_in_steps=200)
    op = ObservationOperator.full(cfg.grid_size)
    obs = synthesize_observations(truth, op, DiagonalCovariance.isotropic(1.0, 40), seed=5)
    var = np.var(obs - truth, axis=0)
    assert np.all(var > 0.97) and np.all(var < 1.03), (var.min(), var.max())


def test_observations_partial_operator():
    cfg = Lorenz95Config(grid_size=6)
    truth = generate_truth(cfg, 4, seed=6, burn_in_steps=10)
    op = ObservationOperator(np.array([1, 4]), 6)
    obs = synthesize_observations(truth, op, DiagonalCovariance.isotropic(1e-30, 2), seed=6)
    np.testing.assert_allclose(obs, truth[:, [1, 4]], atol=1e-12)


def test_observation_size_mismatch_rejected():
    cfg = Lorenz95Config(grid_size=6)
    truth = generate_truth(cfg, 3, seed=0, burn_in_steps=5)
    with pytest.raises(ValueError):
        synthesize_observations(
            truth, ObservationOperator.full(6), DiagonalCovariance.isotropic(1.0, 5), seed=0
        )


# -- the combined run and archives -----------------------------------------


def _small_run(n_cycles=8):
    cfg = Lorenz95Config(grid_size=8)
    op = ObservationOperator.full(8)
    R = DiagonalCovariance(np.linspace(0.5, 1.5, 8))
    return make_twin_run(cfg, op, R, n_cycles=n_cycles, seed=99, burn_in_steps=60)


def test_twin_run_invariants():
    run = _small_run()
    assert run.truth.shape[0] == run.observations.shape[0] == run.n_cycles
    batch = run.batch(3)
    assert batch.time_index == 3
    np.testing.assert_array_equal(batch.values, run.observations[3])


def test_twin_run_regeneration_is_bitwise():
    a, b = _small_run(), _small_run()
    np.testing.assert_array_equal(a.truth, b.truth)
    np.testing.assert_array_equal(a.observations, b.observations)


def test_archive_round_trip_bit_exact(tmp_path):
    run = _small_run()
    meta = save_archive(run, tmp_path, prefix="t")
    loaded = load_archive(tmp_path, prefix="t")
    np.testing.assert_array_equal(loaded.truth, run.truth)
    np.testing.assert_array_equal(loaded.observations, run.observations)
    assert loaded.model == run.model
    assert loaded.seed == run.seed
    np.testing.assert_array_equal(loaded.operator.observed_indices, run.operator.observed_indices)
    np.testing.assert_array_equal(loaded.noise.variances, run.noise.variances)
    assert meta["n_cycles"] == run.n_cycles


def test_archive_rejects_corrupt_header(tmp_path):
    run = _small_run()
    save_archive(run, tmp_path, prefix="t")
    path = tmp_path / "t_truth.csv"
    body = path.read_text().splitlines()
    body[0] = body[0].replace("x_0", "z_0")
    path.write_text("\n".join(body) + "\n")
    with pytest.raises(ValueError):
        load_archive(tmp_path, prefix="t")
