import math

import numpy as np
import pytest

from lrtfr.errors import DimensionError, DomainError
from lrtfr.mlp import Mlp
from lrtfr.model import INPUT_HI, INPUT_LO, CoordinateGrid, LrtfrModel, evenly_spaced, index_grid, init_model
from lrtfr.tensor import numerical_tucker_rank
from lrtfr.verify import gradient_check


def stub_mlp(value):
    # At normalized input 1 with omega0 = pi/2: sin(pi/2) = 1, so the output is `value`.
    return Mlp([np.array([[1.0]]), np.array([[float(value)]])], math.pi / 2)


def test_zero_core_gives_zero():
    m = init_model((2, 3, 2), (5, 5, 5), hidden=8, seed=0)
    m.core[:] = 0
    assert m.evaluate_point(1.0, 2.5, 4.0) == 0.0
    assert not m.evaluate_grid(index_grid((5, 5, 5))).any()


def test_scalar_product_with_stub_factors():
    m = LrtfrModel(np.full((1, 1, 1), 2.0), [stub_mlp(3), stub_mlp(5), stub_mlp(7)], ((0, 1),) * 3)
    assert m.evaluate_point(0, 0, 0) == pytest.approx(210.0)


def test_point_equals_single_cell_grid():
    m = init_model((2, 2, 3), (4, 5, 6), hidden=8, omega0=2.0, seed=1)
    v = m.evaluate_point(1.3, 2.2, 4.9)
    g = m.evaluate_grid(CoordinateGrid([1.3], [2.2], [4.9]))
    assert v == g[0, 0, 0]


def test_grid_matches_pointwise_loop():
    m = init_model((3, 2, 2), (3, 3, 3), hidden=8, omega0=3.0, seed=2)
    g = index_grid((3, 3, 3))
    t = m.evaluate_grid(g)
    for i, j, k in np.ndindex(3, 3, 3):
        assert abs(t[i, j, k] - m.evaluate_point(i, j, k)) <= 1e-12


def test_repeated_coordinates_repeat_slices():
    m = init_model((2, 2, 2), (4, 4, 4), hidden=8, seed=3)
    t = m.evaluate_grid(CoordinateGrid([1.5, 1.5], [0, 1, 2], [3, 0]))
    assert np.array_equal(t[0], t[1])
    assert np.array_equal(m.sample_tensor(index_grid((4, 4, 4))), m.evaluate_grid(index_grid((4, 4, 4))))


def test_points_match_grid():
    m = init_model((2, 3, 2), (6, 6, 6), hidden=8, omega0=2.0, seed=4)
    g = CoordinateGrid([0.5, 2.0, 5.0], [1.0, 3.0], [0.0, 4.5, 2.5, 1.0])
    t = m.evaluate_grid(g)
    pts = np.array([[x, y, z] for x in g.xs for y in g.ys for z in g.zs])
    assert np.allclose(m.evaluate_points(pts), t.ravel(), rtol=0, atol=1e-12)


def test_normalization_maps_domain_onto_input_interval():
    m = init_model((1, 1, 1), ((-3.0, 5.0), (0.0, 1.0), (2.0, 2.0)), hidden=4, seed=0)
    assert m.normalize(0, [-3.0, 5.0]).tolist() == [INPUT_LO, INPUT_HI]
    assert m.normalize(2, [2.0]).tolist() == [INPUT_LO]


def test_out_of_domain_raises_or_warns():
    m = init_model((1, 1, 1), (4, 4, 4), hidden=4, seed=0)
    with pytest.raises(DomainError):
        m.evaluate_point(-1.0, 0.0, 0.0)
    m.extrapolate = True
    with pytest.warns(RuntimeWarning):
        m.evaluate_point(3.5, 0.0, 4.2)


def test_model_validation():
    mlps = [stub_mlp(1), stub_mlp(1), stub_mlp(1)]
    with pytest.raises(DimensionError):
        LrtfrModel(np.zeros((2, 1, 1)), mlps, ((0, 1),) * 3)
    with pytest.raises(DomainError):
        LrtfrModel(np.zeros((1, 1, 1)), mlps, ((1, 0),) * 3)


def test_gradients_zero_upstream():
    m = init_model((2, 2, 2), (4, 4, 4), hidden=8, seed=5)
    g = index_grid((4, 4, 4))
    assert all(not x.any() for x in m.grid_gradients(g, np.zeros((4, 4, 4))))
    with pytest.raises(DimensionError):
        m.grid_gradients(g, np.zeros((4, 4, 3)))


def test_rank_one_core_gradient():
    m = init_model((1, 1, 1), (3, 4, 5), hidden=8, seed=6)
    g = index_grid((3, 4, 5))
    up = np.random.default_rng(0).normal(size=(3, 4, 5))
    u, v, w = m.factor_matrices(g)
    expect = np.einsum("ijk,i,j,k->", up, u[:, 0], v[:, 0], w[:, 0])
    assert m.grid_gradients(g, up)[0][0, 0, 0] == pytest.approx(expect, rel=1e-12)


def test_grid_gradients_match_finite_differences():
    m = init_model((2, 2, 2), (4, 4, 4), hidden=8, depth=3, omega0=2.0, seed=7)
    rep = gradient_check(m, index_grid((4, 4, 4)), seed=1)
    assert rep.max_rel_error <= 1e-5


def test_point_gradients_match_finite_differences():
    m = init_model((2, 3, 2), (4, 4, 4), hidden=6, depth=3, omega0=2.0, seed=8)
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 3, size=(9, 3))
    pts[4] = pts[0]  # shared coordinates exercise the scatter-add
    up = rng.normal(size=9)
    ana = m.point_gradients(pts, up)
    for p, a in zip(m.parameters(), ana):
        flat = p.reshape(-1)
        num = np.empty(flat.size)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + 1e-6
            hi = up @ m.evaluate_points(pts)
            flat[i] = keep - 1e-6
            lo = up @ m.evaluate_points(pts)
            flat[i] = keep
            num[i] = (hi - lo) / 2e-6
        assert np.linalg.norm(a.ravel() - num) <= 1e-5 * max(np.linalg.norm(num), 1e-12)


def test_superresolve_conventions():
    m = init_model((2, 2, 2), ((0.0, 2.0), (1.0, 3.0), (-1.0, 1.0)), hidden=8, seed=9)
    single = m.superresolve((1, 1, 1))
    assert single[0, 0, 0] == m.evaluate_point(0.0, 1.0, -1.0)
    same = m.superresolve((3, 3, 3))
    assert np.array_equal(same, m.evaluate_grid(CoordinateGrid([0, 1, 2], [1, 2, 3], [-1, 0, 1])))
    assert evenly_spaced(0.0, 1.0, 1).tolist() == [0.0]


def test_superresolve_of_constant_model_is_constant():
    m = init_model((2, 2, 2), ((1.0, 1.0),) * 3, hidden=8, seed=10)
    t = m.superresolve((2, 2, 2))
    assert np.all(t == t[0, 0, 0])


def test_superresolve_respects_rank_bound():
    m = init_model((3, 2, 4), (8, 8, 8), hidden=16, omega0=4.0, seed=11)
    t = m.superresolve((32, 32, 32))
    assert all(a <= b for a, b in zip(numerical_tucker_rank(t), (3, 2, 4)))


def test_init_model_domain_forms_and_per_axis_settings():
    m = init_model((2, 2, 2), (5, 6, 7), hidden=4, seed=0)
    assert m.domain == ((0.0, 4.0), (0.0, 5.0), (0.0, 6.0))
    m = init_model((2, 2, 2), ((0, 1), (2, 3), (4, 5)), hidden=4, depth=(2, 3, 4), omega0=(1, 2, 3), seed=0)
    assert [x.depth for x in m.mlps] == [2, 3, 4]
    assert [x.omega0 for x in m.mlps] == [1.0, 2.0, 3.0]
    copy = m.copy()
    copy.core[:] = 0
    assert m.core.any()
