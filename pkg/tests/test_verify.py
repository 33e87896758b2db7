import numpy as np
import pytest

from lrtfr.errors import DomainError, UnsupportedConfigurationError
from lrtfr.model import CoordinateGrid, index_grid, init_model
from lrtfr.tensor import numerical_tucker_rank, tucker_product
from lrtfr.verify import (
    discretize_as_tensor_function,
    gradient_check,
    lipschitz_constants,
    verify_lipschitz,
    verify_rank_bound,
)


def test_rank_bound_rank_one_model():
    m = init_model((1, 1, 1), (6, 6, 6), hidden=8, seed=0)
    rep = verify_rank_bound(m, trials=30, max_dim=8)
    assert rep.ok and max(rep.max_rank) <= 1


def test_rank_bound_random_model():
    m = init_model((3, 2, 4), (10, 10, 10), hidden=16, omega0=3.0, seed=1)
    rep = verify_rank_bound(m, trials=200, max_dim=12)
    assert rep.ok
    assert rep.trials == 200
    assert all(a <= b for a, b in zip(rep.max_rank, (3, 2, 4)))


def test_rank_bound_degenerate_grid():
    m = init_model((3, 3, 3), (5, 5, 5), hidden=8, seed=2)
    t = m.sample_tensor(CoordinateGrid([2.0], [1.0, 3.0], [0.0]))
    assert all(r <= 1 for r in numerical_tucker_rank(t)[::2])


def test_rank_bound_reports_violations():
    m = init_model((1, 1, 1), (4, 4, 4), hidden=4, seed=3)
    full_rank = np.random.default_rng(0).normal(size=(4, 4, 4))
    rep = verify_rank_bound(m, trials=1, extra=[full_rank])
    assert not rep.ok
    assert rep.violations[0][0] == 1


def test_lipschitz_zero_core():
    m = init_model((2, 2, 2), (5, 5, 5), hidden=8, seed=4)
    m.core[:] = 0
    rep = verify_lipschitz(m, pairs=200)
    assert rep.max_ratio == (0.0, 0.0, 0.0)
    assert rep.ok


def test_lipschitz_random_model():
    m = init_model((1, 1, 1), (9, 9, 9), hidden=16, depth=3, omega0=1.0, seed=5)
    rep = verify_lipschitz(m, pairs=10_000)
    assert rep.ok
    assert max(rep.max_ratio) < rep.delta
    assert 1.0 <= rep.zeta <= 2.0


def test_lipschitz_budget_consistency():
    m = init_model((1, 1, 1), (3, 3, 3), hidden=4, depth=3, omega0=2.0, seed=6)
    m.core[:] = 1.5
    for mlp in m.mlps:
        for w in mlp.weights:
            w[:] = 0
            w.flat[0] = 1.5
    delta, eta, kappa, d = lipschitz_constants(m, 1.0)
    assert (eta, kappa, d) == (1.5, 2.0, 3)
    assert delta == pytest.approx(3690.5625)


def test_lipschitz_requires_shared_depth_and_omega():
    m = init_model((1, 1, 1), (3, 3, 3), hidden=4, depth=(2, 3, 3), seed=7)
    with pytest.raises(UnsupportedConfigurationError):
        verify_lipschitz(m, pairs=10)
    m = init_model((1, 1, 1), (3, 3, 3), hidden=4, omega0=(1, 2, 1), seed=7)
    with pytest.raises(UnsupportedConfigurationError):
        verify_lipschitz(m, pairs=10)


def test_adjacent_differences_within_budget():
    m = init_model((2, 2, 2), (12, 12, 12), hidden=8, omega0=2.0, seed=8)
    t = m.sample_tensor(index_grid((12, 12, 12)))
    delta, *_ = lipschitz_constants(m, 2.0)
    step = m.input_scale(0)
    for axis in range(3):
        assert np.abs(np.diff(t, axis=axis)).max() <= delta * step


def test_lookup_identity_and_errors():
    x = np.random.default_rng(9).normal(size=(4, 5, 6))
    f = discretize_as_tensor_function(x)
    assert np.array_equal(f.sample_tensor(index_grid(x.shape)), x)
    assert f.evaluate_point(1, 2, 3) == x[1, 2, 3]
    with pytest.raises(DomainError):
        f.evaluate_point(0.5, 0, 0)
    with pytest.raises(DomainError):
        f.evaluate_grid(CoordinateGrid([4], [0], [0]))


def test_lookup_resampling_keeps_rank():
    rng = np.random.default_rng(10)
    x = tucker_product(rng.normal(size=(2, 3, 2)), *(rng.normal(size=(8, r)) for r in (2, 3, 2)))
    f = discretize_as_tensor_function(x)
    assert numerical_tucker_rank(f.sample_tensor(index_grid(x.shape))) == (2, 3, 2)
    dup = CoordinateGrid([0, 0, 1, 1, 5], [2, 2, 2], [7, 3, 3, 0])
    assert all(a <= b for a, b in zip(numerical_tucker_rank(f.sample_tensor(dup)), (2, 3, 2)))


def test_lookup_constant_tensor():
    f = discretize_as_tensor_function(np.full((3, 3, 3), 2.0))
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = CoordinateGrid(*(rng.integers(0, 3, size=rng.integers(1, 6)) for _ in range(3)))
        assert numerical_tucker_rank(f.sample_tensor(g)) == (1, 1, 1)


def test_gradient_check_subsampled():
    m = init_model((3, 3, 3), (6, 6, 6), hidden=32, omega0=4.0, seed=12)
    rep = gradient_check(m, max_entries=10)
    assert rep.ok
    assert len(rep.per_parameter) == len(m.parameters())
