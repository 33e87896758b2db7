"""The low-rank tensor function: a core tensor contracted with three factor MLPs.

``f(x, y, z) = C x1 f_x(x) x2 f_y(y) x3 f_z(z)``

Coordinates live in a per-axis domain interval ``[lo, hi]``.  Before entering
the MLPs each axis is mapped affinely onto ``[INPUT_LO, INPUT_HI]``, a
strictly positive interval: the MLPs are bias-free and odd, so an interval
containing 0 would pin the output to zero there and force antisymmetry.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .mlp import init_mlp
from .tensor import tucker_product

__all__ = [
    "INPUT_LO",
    "INPUT_HI",
    "CoordinateGrid",
    "LrtfrModel",
    "init_model",
    "index_grid",
    "evenly_spaced",
]

INPUT_LO = 1.0
INPUT_HI = 2.0


@dataclass
class CoordinateGrid:
    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        self.xs, self.ys, self.zs = (
            np.atleast_1d(np.asarray(c, dtype=np.float64)).ravel() for c in (self.xs, self.ys, self.zs)
        )
        if min(len(self.xs), len(self.ys), len(self.zs)) < 1:
            raise DimensionError("every grid axis needs at least one coordinate")

    @property
    def axes(self):
        return (self.xs, self.ys, self.zs)

    @property
    def shape(self):
        return (len(self.xs), len(self.ys), len(self.zs))


def index_grid(dims):
    """Integer index grid ``0..n-1`` along each axis."""
    return CoordinateGrid(*(np.arange(n, dtype=np.float64) for n in dims))


def evenly_spaced(lo, hi, n):
    """``n`` evenly spaced points on ``[lo, hi]`` with both endpoints; ``n = 1`` gives ``lo``."""
    if n < 1:
        raise DimensionError(f"need at least one point, got {n}")
    if n == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, n)


@dataclass
class LrtfrModel:
    core: np.ndarray
    mlps: list
    domain: tuple
    extrapolate: bool = False

    def __post_init__(self):
        self.core = np.ascontiguousarray(self.core, dtype=np.float64)
        if self.core.ndim != 3:
            raise DimensionError(f"core must be third order, got shape {self.core.shape}")
        if len(self.mlps) != 3:
            raise DimensionError("a model needs exactly three factor MLPs")
        self.mlps = list(self.mlps)
        for axis, mlp in enumerate(self.mlps):
            if mlp.out_dim != self.core.shape[axis]:
                raise DimensionError(
                    f"MLP {axis} outputs {mlp.out_dim} features but core mode has {self.core.shape[axis]}"
                )
        self.domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if len(self.domain) != 3 or any(hi < lo for lo, hi in self.domain):
            raise DomainError(f"invalid domain {self.domain}")

    @property
    def ranks(self):
        return self.core.shape

    def parameters(self):
        """Flat list of every trainable array; order is core then x, y, z weights."""
        params = [self.core]
        for mlp in self.mlps:
            params.extend(mlp.weights)
        return params

    def copy(self):
        return LrtfrModel(self.core.copy(), [m.copy() for m in self.mlps], self.domain, self.extrapolate)

    # -- coordinates -----------------------------------------------------

    def normalize(self, axis, coords):
        """Map domain coordinates of ``axis`` to MLP inputs, checking the domain."""
        coords = np.asarray(coords, dtype=np.float64)
        lo, hi = self.domain[axis]
        span = hi - lo
        if not np.all(np.isfinite(coords)):
            raise DomainError("coordinates must be finite")
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        outside = (coords < lo - slack) | (coords > hi + slack)
        if np.any(outside):
            msg = f"coordinate outside axis {axis} domain [{lo}, {hi}]"
            if not self.extrapolate:
                raise DomainError(msg)
            warnings.warn(msg + "; extrapolating", RuntimeWarning, stacklevel=3)
        if span == 0.0:
            return INPUT_LO + (coords - lo)
        return INPUT_LO + (coords - lo) * ((INPUT_HI - INPUT_LO) / span)

    def input_scale(self, axis):
        """Derivative of the normalization map of ``axis``."""
        lo, hi = self.domain[axis]
        return 1.0 if hi == lo else (INPUT_HI - INPUT_LO) / (hi - lo)

    # -- evaluation ------------------------------------------------------

    def factor_matrices(self, grid, return_cache=False):
        outs, caches = [], []
        for axis, (mlp, c) in enumerate(zip(self.mlps, grid.axes)):
            out, cache = mlp.forward(self.normalize(axis, c), return_cache=True)
            outs.append(out)
            caches.append(cache)
        if return_cache:
            return outs, caches
        return outs

    def evaluate_grid(self, grid, return_cache=False):
        """Sample the function on ``xs x ys x zs``; each MLP runs once per axis coordinate."""
        (u, v, w), caches = self.factor_matrices(grid, return_cache=True)
        out = tucker_product(self.core, u, v, w)
        if return_cache:
            return out, ((u, v, w), caches)
        return out

    def sample_tensor(self, grid):
        """A member of the sampled tensor set: the function evaluated on ``grid``."""
        return self.evaluate_grid(grid)

    def evaluate_point(self, x, y, z):
        return float(self.evaluate_grid(CoordinateGrid([x], [y], [z]))[0, 0, 0])

    def evaluate_points(self, points, return_cache=False):
        """Evaluate at scattered points, an ``n x 3`` array; returns length ``n``.

        Each MLP runs once per distinct coordinate value on its axis, so
        stencils that shift one axis at a time share the other two.
        """
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DimensionError(f"points must be n x 3, got {points.shape}")
        feats, caches = [], []
        for axis, mlp in enumerate(self.mlps):
            uniq, inv = np.unique(points[:, axis], return_inverse=True)
            out, cache = mlp.forward(self.normalize(axis, uniq), return_cache=True)
            feats.append(out[inv])
            caches.append((cache, inv, len(uniq)))
        u, v, w = feats
        r1, r2, r3 = self.core.shape
        uc = (u @ self.core.reshape(r1, r2 * r3)).reshape(-1, r2, r3)
        vals = np.einsum("nbc,nb,nc->n", uc, v, w)
        if return_cache:
            return vals, (feats, caches, uc)
        return vals

    # -- gradients -------------------------------------------------------

    def grid_gradients(self, grid, upstream, cache=None):
        """Gradients of ``<upstream, evaluate_grid(grid)>`` w.r.t. :meth:`parameters`."""
        upstream = np.asarray(upstream, dtype=np.float64)
        if upstream.shape != grid.shape:
            raise DimensionError(f"upstream shape {upstream.shape} does not match grid {grid.shape}")
        if cache is None:
            _, cache = self.evaluate_grid(grid, return_cache=True)
        (u, v, w), caches = cache
        core = self.core
        core_grad = tucker_product(upstream, u.T, v.T, w.T)
        # G x2 V^T x3 W^T contracted with the core over modes 2 and 3, etc.
        gu = np.tensordot(np.tensordot(np.tensordot(upstream, v, axes=(1, 0)), w, axes=(1, 0)),
                          core, axes=([1, 2], [1, 2]))
        gv = np.tensordot(np.tensordot(np.tensordot(upstream, u, axes=(0, 0)), w, axes=(1, 0)),
                          core, axes=([1, 2], [0, 2]))
        gw = np.tensordot(np.tensordot(np.tensordot(upstream, u, axes=(0, 0)), v, axes=(0, 0)),
                          core, axes=([1, 2], [0, 1]))
        grads = [core_grad]
        for mlp, g, c in zip(self.mlps, (gu, gv, gw), caches):
            grads.extend(mlp.backward(None, g, cache=c))
        return grads

    def point_gradients(self, points, upstream, cache=None):
        """Gradients of ``sum(upstream * evaluate_points(points))`` w.r.t. :meth:`parameters`."""
        upstream = np.asarray(upstream, dtype=np.float64).ravel()
        if cache is None:
            _, cache = self.evaluate_points(points, return_cache=True)
        (u, v, w), caches, uc = cache
        if upstream.shape[0] != u.shape[0]:
            raise DimensionError("upstream length does not match the number of points")
        gu_ = upstream[:, None] * u
        core_grad = np.einsum("na,nb,nc->abc", gu_, v, w)
        # d/dU_n = g_n * C x2 V_n x3 W_n
        cw = np.tensordot(w, self.core, axes=(1, 2))  # n x r1 x r2
        gu = upstream[:, None] * np.einsum("nab,nb->na", cw, v)
        gv = upstream[:, None] * np.einsum("nab,na->nb", cw, u)
        gw = upstream[:, None] * np.einsum("nbc,nb->nc", uc, v)
        grads = [core_grad]
        for mlp, g, (c, inv, count) in zip(self.mlps, (gu, gv, gw), caches):
            agg = np.zeros((count, g.shape[1]))
            np.add.at(agg, inv, g)
            grads.extend(mlp.backward(None, agg, cache=c))
        return grads

    # -- resampling ------------------------------------------------------

    def superresolve(self, target_dims):
        """Evaluate on ``N_i`` evenly spaced points spanning each domain interval."""
        axes = [evenly_spaced(lo, hi, int(n)) for (lo, hi), n in zip(self.domain, target_dims)]
        return self.evaluate_grid(CoordinateGrid(*axes))


def init_model(ranks, dims_or_domain, *, hidden=256, depth=3, omega0=1.0, seed=0, core_std=0.1):
    """Randomly initialized model.

    ``dims_or_domain`` is either tensor dims ``(n1, n2, n3)``, giving the index
    domain ``[0, n-1]`` per axis, or an explicit tuple of ``(lo, hi)`` pairs.
    ``omega0`` and ``depth`` may be scalars or per-axis triples.
    """
    if all(np.isscalar(d) for d in dims_or_domain):
        domain = tuple((0.0, float(n - 1)) for n in dims_or_domain)
    else:
        domain = tuple(tuple(d) for d in dims_or_domain)
    omegas = (omega0,) * 3 if np.isscalar(omega0) else tuple(omega0)
    depths = (depth,) * 3 if np.isscalar(depth) else tuple(depth)
    rng = np.random.default_rng(seed)
    core = rng.normal(0.0, core_std, size=tuple(int(r) for r in ranks))
    mlps = [init_mlp(int(r), hidden, d, w, rng) for r, d, w in zip(ranks, depths, omegas)]
    return LrtfrModel(core, mlps, domain)

