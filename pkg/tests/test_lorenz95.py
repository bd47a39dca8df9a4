"""Model dynamics: tendency, RK4, equilibrium, chaos diagnostics."""

import numpy as np
import pytest

from enkf_evidence.lorenz95 import (
    DAYS_PER_TIME_UNIT,
    Lorenz95Config,
    equilibrium,
    error_doubling_time,
    propagate,
    rk4_step,
    tendency,
)


def tendency_oracle(x, forcing):
    # Hand-looped ring tendency, independent of the vectorized path.
    m = len(x)
    out = np.empty(m)
    for i in range(m):
        out[i] = (x[(i + 1) % m] - x[(i - 2) % m]) * x[(i - 1) % m] - x[i] + forcing
    return out


@pytest.mark.parametrize("m", [4, 5, 7, 40])
def test_tendency_matches_hand_loop(m):
    rng = np.random.default_rng(11)
    cfg = Lorenz95Config(forcing=8.0, grid_size=m)
    for _ in range(5):
        x = rng.standard_normal(m) * 4.0
        np.testing.assert_allclose(tendency(x, cfg), tendency_oracle(x, 8.0), rtol=1e-14)


def test_tendency_on_ensemble_columns():
    rng = np.random.default_rng(12)
    cfg = Lorenz95Config(grid_size=6)
    E = rng.standard_normal((6, 3))
    got = tendency(E, cfg)
    for j in range(3):
        np.testing.assert_allclose(got[:, j], tendency(E[:, j], cfg), rtol=1e-14)


def test_equilibrium_is_fixed_point():
    cfg = Lorenz95Config(forcing=8.0)
    x = equilibrium(cfg)
    assert np.all(tendency(x, cfg) == 0.0)
    assert np.all(rk4_step(x, cfg) == x)


def test_ring_rotation_equivariance():
    rng = np.random.default_rng(13)
    cfg = Lorenz95Config(grid_size=12)
    x = rng.standard_normal(12) * 3.0
    for shift in (1, 5):
        np.testing.assert_allclose(
            tendency(np.roll(x, shift), cfg), np.roll(tendency(x, cfg), shift), rtol=1e-14
        )
        np.testing.assert_allclose(
            rk4_step(np.roll(x, shift), cfg), np.roll(rk4_step(x, cfg), shift), rtol=1e-14
        )


def test_propagate_semigroup_and_identity():
    rng = np.random.default_rng(14)
    cfg = Lorenz95Config()
    x = equilibrium(cfg) + rng.standard_normal(cfg.grid_size)
    assert np.all(propagate(x, cfg, 0) == x)
    np.testing.assert_array_equal(
        propagate(x, cfg, 7), propagate(propagate(x, cfg, 3), cfg, 4)
    )


def test_rk4_convergence_order():
    # Richardson estimate on a short smooth segment against a fine reference.
    base = Lorenz95Config(dt=0.05)
    rng = np.random.default_rng(15)
    x0 = propagate(equilibrium(base) + 1e-3 * rng.standard_normal(base.grid_size), base, 1000)
    horizon = 0.25

    def endpoint(dt):
        cfg = Lorenz95Config(dt=dt)
        return propagate(x0, cfg, int(round(horizon / dt)))

    ref = endpoint(0.05 / 64)
    err = [np.linalg.norm(endpoint(dt) - ref) for dt in (0.05, 0.025)]
    order = np.log2(err[0] / err[1])
    assert 3.7 <= order <= 4.3, f"observed RK4 order {order:.2f}"


def test_climatological_band():
    # Long free run: every component's time mean sits in the known band.
    cfg = Lorenz95Config()
    rng = np.random.default_rng(16)
    x = propagate(equilibrium(cfg) + 1e-3 * rng.standard_normal(cfg.grid_size), cfg, 2000)
    acc = np.zeros(cfg.grid_size)
    n = 5000
    for _ in range(n):
        x = rk4_step(x, cfg)
        acc += x
    means = acc / n
    assert np.all(means > 1.5) and np.all(means < 3.5), means


@pytest.mark.slow
def test_error_doubling_time_band():
    days = error_doubling_time(Lorenz95Config(forcing=8.0))
    assert 1.7 <= days <= 2.5, f"doubling time {days:.2f} days"


def test_doubling_time_uses_day_conversion():
    assert DAYS_PER_TIME_UNIT == 5.0


def test_config_validation():
    with pytest.raises(ValueError):
        Lorenz95Config(dt=0.0)
    with pytest.raises(ValueError):
        Lorenz95Config(dt=-0.1)
    with pytest.raises(ValueError):
        Lorenz95Config(grid_size=3)
    with pytest.raises(ValueError):
        tendency(np.zeros(5), Lorenz95Config(grid_size=6))
    with pytest.raises(ValueError):
        propagate(np.zeros(40), Lorenz95Config(), -1)
