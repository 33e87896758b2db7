"""Hypothesis properties for the tensor algebra, metrics and model sampling."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lrtfr.metrics import chamfer, f_score, nrmse, psnr
from lrtfr.model import CoordinateGrid, init_model
from lrtfr.tensor import (
    fold,
    mode_product,
    numerical_tucker_rank,
    soft_threshold,
    tucker_product,
    tv_seminorm,
    unfold,
)

settings.register_profile("lrtfr", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lrtfr")

dims = st.tuples(*(st.integers(1, 16) for _ in range(3)))
small_dims = st.tuples(*(st.integers(1, 6) for _ in range(3)))
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
modes = st.sampled_from([1, 2, 3])


@st.composite
def tensors(draw, shape=dims):
    return draw(arrays(np.float64, draw(shape), elements=finite))


@st.composite
def clouds(draw, max_points=30):
    n = draw(st.integers(1, max_points))
    return draw(arrays(np.float64, (n, 3), elements=st.floats(-10, 10, allow_nan=False)))


@given(tensors(), modes)
def test_fold_inverts_unfold(t, mode):
    m = unfold(t, mode)
    assert m.shape[0] == t.shape[mode - 1]
    assert np.array_equal(fold(m, mode, t.shape), t)


@given(tensors(), modes)
def test_unfold_column_order(t, mode):
    n1, n2, n3 = t.shape
    m = unfold(t, mode)
    i, j, k = n1 - 1, n2 - 1, n3 - 1
    col = {1: j * n3 + k, 2: i * n3 + k, 3: i * n2 + j}[mode]
    row = (i, j, k)[mode - 1]
    assert m[row, col] == t[i, j, k]


@given(tensors(small_dims), modes, st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_mode_product_matches_loops(t, mode, p, seed):
    a = np.random.default_rng(seed).normal(size=(p, t.shape[mode - 1]))
    got = mode_product(t, a, mode)
    want_shape = list(t.shape)
    want_shape[mode - 1] = p
    want = np.zeros(want_shape)
    for idx in np.ndindex(*want_shape):
        for s in range(t.shape[mode - 1]):
            src = list(idx)
            src[mode - 1] = s
            want[idx] += a[idx[mode - 1], s] * t[tuple(src)]
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-9 * (1 + np.abs(t).max()))


@given(st.tuples(*(st.integers(1, 4) for _ in range(3))), dims, st.integers(0, 2**32 - 1))
def test_tucker_rank_bounded_by_core(ranks, shape, seed):
    rng = np.random.default_rng(seed)
    core = rng.normal(size=ranks)
    factors = [rng.normal(size=(n, r)) for n, r in zip(shape, ranks)]
    got = numerical_tucker_rank(tucker_product(core, *factors))
    assert all(g <= min(r, n) for g, r, n in zip(got, ranks, shape))


@given(arrays(np.float64, st.integers(1, 200), elements=finite), st.floats(0, 100))
def test_soft_threshold_optimality(x, v):
    s = soft_threshold(x, v)
    nz = s != 0
    # stationarity where s != 0, and |x| <= v where s = 0
    np.testing.assert_allclose(x[nz] - s[nz], v * np.sign(s[nz]), atol=1e-9 * (1 + np.abs(x).max()))
    assert np.all(np.abs(x[~nz]) <= v)


@given(st.floats(-10, 10), st.floats(0, 10), st.floats(-10, 10))
def test_soft_threshold_beats_any_candidate(x, v, cand):
    s = float(soft_threshold(np.array([x]), v)[0])
    obj = lambda z: (x - z) ** 2 + 2 * v * abs(z)  # noqa: E731
    assert obj(s) <= obj(cand) + 1e-9


@given(small_dims, st.lists(finite, min_size=6, max_size=6))
def test_tv_zero_for_constant_slices(shape, vals):
    n1, n2, n3 = shape
    t = np.broadcast_to(np.array(vals[:n3]), (n1, n2, n3)).copy()
    assert tv_seminorm(t) == 0.0


@given(tensors(small_dims))
def test_tv_zero_iff_slices_constant(t):
    constant = all(np.ptp(t[:, :, k]) == 0 for k in range(t.shape[2]))
    assert (tv_seminorm(t) == 0.0) == constant


@given(tensors(small_dims), st.floats(0.01, 100))
def test_nrmse_scale_covariance(t, c):
    rng = np.random.default_rng(0)
    ref = t + rng.normal(size=t.shape)
    x = ref + rng.normal(size=t.shape)
    assert np.isclose(nrmse(c * x, c * ref), nrmse(x, ref), rtol=1e-12)


@given(tensors(small_dims))
def test_psnr_identity_is_infinite(t):
    assert psnr(t, t) == np.inf


@given(clouds(), clouds())
def test_chamfer_symmetric_and_nonnegative(p, q):
    a, b = chamfer(p, q), chamfer(q, p)
    assert a >= 0 and np.isclose(a, b, rtol=1e-12, atol=0)
    assert chamfer(p, p) == 0.0


@given(clouds(), clouds(), st.floats(0.01, 5), st.floats(0.01, 5))
def test_f_score_monotone_in_threshold(p, q, d1, d2):
    lo, hi = sorted((d1, d2))
    assert 0.0 <= f_score(p, q, lo) <= f_score(p, q, hi) <= 1.0


@settings(max_examples=15)
@given(st.tuples(*(st.integers(1, 3) for _ in range(3))), st.integers(0, 1000),
       st.lists(st.floats(0, 7), min_size=1, max_size=5),
       st.lists(st.floats(0, 7), min_size=1, max_size=5),
       st.lists(st.floats(0, 7), min_size=1, max_size=5))
def test_model_samples_respect_rank_and_pointwise(ranks, seed, xs, ys, zs):
    m = init_model(ranks, (8, 8, 8), hidden=8, omega0=3.0, seed=seed)
    t = m.sample_tensor(CoordinateGrid(xs, ys, zs))
    assert all(a <= b for a, b in zip(numerical_tucker_rank(t), ranks))
    i, j, k = len(xs) - 1, len(ys) - 1, len(zs) - 1
    assert np.isclose(t[i, j, k], m.evaluate_point(xs[i], ys[j], zs[k]), rtol=1e-12, atol=1e-12)
