"""Bias-free sine-activated MLPs mapping a scalar coordinate to an r-vector.

A net of depth ``d`` holds matrices ``H_1 (h x 1)``, ``H_2..H_{d-1} (h x h)``
and ``H_d (r x h)`` and computes ``H_d sin(w0 H_{d-1} ... sin(w0 H_1 x))``.
There are no bias vectors, so the net maps 0 to 0.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError

__all__ = ["Mlp", "init_mlp", "entrywise_l1_max", "lipschitz_budget"]


@dataclass
class Mlp:
    weights: list
    omega0: float

    def __post_init__(self):
        self.weights = [np.ascontiguousarray(w, dtype=np.float64) for w in self.weights]
        if len(self.weights) < 2:
            raise ContractError("an Mlp needs at least two weight matrices")
        if not self.omega0 > 0:
            raise ContractError(f"omega0 must be positive, got {self.omega0}")
        if not all(np.all(np.isfinite(w)) for w in self.weights):
            raise ContractError("Mlp weights must be finite")
        if self.weights[0].shape[1] != 1:
            raise DimensionError("first weight matrix must have a single column")
        for a, b in zip(self.weights[:-1], self.weights[1:]):
            if b.shape[1] != a.shape[0]:
                raise DimensionError(f"weight shapes {a.shape} and {b.shape} do not chain")

    @property
    def depth(self):
        return len(self.weights)

    @property
    def hidden(self):
        return self.weights[0].shape[0]

    @property
    def out_dim(self):
        return self.weights[-1].shape[0]

    def copy(self):
        return Mlp([w.copy() for w in self.weights], self.omega0)

    def forward(self, coords, return_cache=False):
        """Evaluate the net on a vector of coordinates; returns ``n x r``."""
        x = np.asarray(coords, dtype=np.float64).reshape(-1, 1)
        acts = [x]
        pre = []
        a = x
        for w in self.weights[:-1]:
            z = a @ w.T
            pre.append(z)
            a = np.sin(self.omega0 * z)
            acts.append(a)
        out = a @ self.weights[-1].T
        if return_cache:
            return out, (acts, pre)
        return out

    def backward(self, coords, upstream, cache=None):
        """Gradients of ``<upstream, forward(coords)>`` w.r.t. every weight matrix."""
        if cache is None:
            _, cache = self.forward(coords, return_cache=True)
        acts, pre = cache
        g = np.asarray(upstream, dtype=np.float64)
        if g.shape != (acts[0].shape[0], self.out_dim):
            raise DimensionError(
                f"upstream shape {g.shape} does not match output {(acts[0].shape[0], self.out_dim)}"
            )
        grads = [None] * self.depth
        grads[-1] = g.T @ acts[-1]
        delta = g
        for i in range(self.depth - 2, -1, -1):
            delta = (delta @ self.weights[i + 1]) * (self.omega0 * np.cos(self.omega0 * pre[i]))
            grads[i] = delta.T @ acts[i]
        return grads


def init_mlp(r, h, d, omega0, seed):
    """Sine-network initialization.

    ``H_1`` is uniform in [-1, 1]; deeper layers are uniform in
    ``[-sqrt(6/h)/omega0, sqrt(6/h)/omega0]``.  ``seed`` may be an int or a
    ``numpy.random.Generator``.
    """
    if r < 1 or h < 1 or d < 2:
        raise ContractError(f"invalid Mlp dimensions r={r}, h={h}, d={d}")
    if not omega0 > 0:
        raise ContractError(f"omega0 must be positive, got {omega0}")
    rng = np.random.default_rng(seed)
    bound = math.sqrt(6.0 / h) / omega0
    weights = [rng.uniform(-1.0, 1.0, size=(h, 1))]
    for _ in range(d - 2):
        weights.append(rng.uniform(-bound, bound, size=(h, h)))
    weights.append(rng.uniform(-bound, bound, size=(r, h)))
    return Mlp(weights, float(omega0))


def entrywise_l1_max(mlp):
    """Largest entrywise l1 norm among the net's weight matrices."""
    return max(float(np.abs(w).sum()) for w in mlp.weights)


def lipschitz_budget(eta, kappa, d, zeta):
    """``eta**(3d+1) * kappa**(3d-3) * zeta**2``; ``inf`` (with a warning) on overflow."""
    if not (eta > 0 and kappa > 0 and zeta > 0 and d >= 1):
        raise ContractError("lipschitz_budget needs positive inputs")
    try:
        delta = float(eta) ** (3 * d + 1) * float(kappa) ** (3 * d - 3) * float(zeta) ** 2
    except OverflowError:
        delta = math.inf
    if math.isinf(delta):
        warnings.warn("Lipschitz budget overflowed float64", RuntimeWarning, stacklevel=2)
    return delta
