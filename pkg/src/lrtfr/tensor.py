"""Dense third-order tensor algebra.

Tensors are plain ``numpy.ndarray`` objects of shape ``(n1, n2, n3)`` and
dtype float64 in C order, so the flat index of element ``(i, j, k)`` is
``(i * n2 + j) * n3 + k``.  Masks use the same layout with entries 0.0/1.0.

Unfolding column order is fixed as follows:

* mode 1: column ``j * n3 + k``
* mode 2: column ``i * n3 + k``
* mode 3: column ``i * n2 + j``

i.e. the remaining indices keep their natural order and are flattened
row-major.
"""

import numpy as np

from .errors import ContractError, DimensionError, NumericalError

__all__ = [
    "as_tensor",
    "as_mask",
    "unfold",
    "fold",
    "mode_product",
    "tucker_product",
    "frobenius_norm",
    "l1_norm",
    "tv_seminorm",
    "tv_subgradient",
    "soft_threshold",
    "numerical_tucker_rank",
]


def as_tensor(t, name="tensor"):
    """Validate and convert ``t`` to a finite float64 third-order array."""
    arr = np.ascontiguousarray(t, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionError(f"{name} must be third order, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise DimensionError(f"{name} has an empty mode: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    return arr


def as_mask(m, shape=None):
    arr = as_tensor(m, "mask")
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ContractError("mask entries must be exactly 0 or 1")
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionError(f"mask shape {arr.shape} does not match {tuple(shape)}")
    return arr


def _check_mode(mode):
    if mode not in (1, 2, 3):
        raise ContractError(f"mode must be 1, 2 or 3, got {mode!r}")


def unfold(t, mode):
    """Mode-``mode`` unfolding: an ``n_mode x prod(other dims)`` matrix."""
    _check_mode(mode)
    t = np.asarray(t)
    if t.ndim != 3:
        raise DimensionError(f"expected a third-order tensor, got shape {t.shape}")
    ax = mode - 1
    return np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1)


def fold(m, mode, dims):
    """Inverse of :func:`unfold`."""
    _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise DimensionError(f"dims must have three entries, got {dims}")
    m = np.asarray(m)
    ax = mode - 1
    rest = [d for i, d in enumerate(dims) if i != ax]
    if m.shape != (dims[ax], rest[0] * rest[1]):
        raise DimensionError(
            f"matrix of shape {m.shape} cannot be folded along mode {mode} into {dims}"
        )
    return np.ascontiguousarray(np.moveaxis(m.reshape(dims[ax], *rest), 0, ax))


def mode_product(t, a, mode):
    """Tensor-matrix product ``t x_mode a`` for ``a`` of shape ``p x n_mode``."""
    _check_mode(mode)
    t = np.asarray(t, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != t.shape[mode - 1]:
        raise DimensionError(
            f"matrix of shape {a.shape} incompatible with mode {mode} of {t.shape}"
        )
    dims = list(t.shape)
    dims[mode - 1] = a.shape[0]
    return fold(a @ unfold(t, mode), mode, dims)


def tucker_product(core, u, v, w):
    """``core x1 u x2 v x3 w`` evaluated as a single contraction."""
    core = np.asarray(core, dtype=np.float64)
    r1, r2, r3 = core.shape
    if u.shape[1] != r1 or v.shape[1] != r2 or w.shape[1] != r3:
        raise DimensionError(
            f"factor shapes {u.shape}, {v.shape}, {w.shape} do not match core {core.shape}"
        )
    # Contract the widest factor last so the intermediate stays small.
    tmp = np.tensordot(u, core, axes=(1, 0))  # n1 x r2 x r3
    tmp = np.tensordot(tmp, v, axes=(1, 1))  # n1 x r3 x n2
    tmp = np.tensordot(tmp, w, axes=(1, 1))  # n1 x n2 x n3
    return np.ascontiguousarray(tmp)


def frobenius_norm(t):
    return float(np.sqrt(np.sum(np.square(t))))


def l1_norm(t):
    return float(np.sum(np.abs(t)))


def tv_seminorm(t):
    """Anisotropic spatial TV: absolute first differences along modes 1 and 2."""
    t = np.asarray(t, dtype=np.float64)
    return float(np.abs(np.diff(t, axis=0)).sum() + np.abs(np.diff(t, axis=1)).sum())


def tv_subgradient(t):
    """A subgradient of :func:`tv_seminorm` at ``t``, using ``sign(0) = 0``."""
    t = np.asarray(t, dtype=np.float64)
    g = np.zeros_like(t)
    s = np.sign(np.diff(t, axis=0))
    g[1:] += s
    g[:-1] -= s
    s = np.sign(np.diff(t, axis=1))
    g[:, 1:] += s
    g[:, :-1] -= s
    return g


def soft_threshold(t, v):
    """Elementwise ``sign(x) * max(|x| - v, 0)``.

    This is the exact minimizer over ``s`` of ``(x - s)**2 + 2 v |s|``.
    """
    if not v >= 0:
        raise ContractError(f"threshold must be nonnegative, got {v}")
    t = np.asarray(t, dtype=np.float64)
    return np.sign(t) * np.maximum(np.abs(t) - v, 0.0)


def numerical_tucker_rank(t, rel_tol=1e-8):
    """Count singular values of each unfolding above ``rel_tol * sigma_max``.

    Returns ``(0, 0, 0)`` for the zero tensor.
    """
    if not rel_tol > 0:
        raise ContractError(f"rel_tol must be positive, got {rel_tol}")
    t = np.asarray(t, dtype=np.float64)
    ranks = []
    for mode in (1, 2, 3):
        try:
            s = np.linalg.svd(unfold(t, mode), compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge for mode {mode}") from exc
        if s.size == 0 or s[0] == 0.0:
            ranks.append(0)
        else:
            ranks.append(int(np.count_nonzero(s > rel_tol * s[0])))
    return tuple(ranks)
