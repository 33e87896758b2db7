"""Executable checks of the structural guarantees of the model.

* :func:`verify_rank_bound`: any sampled tensor has Tucker rank at most the
  core dims.
* :func:`verify_lipschitz`: single-axis differences are bounded by the
  budget ``eta**(3d+1) * kappa**(3d-3) * zeta**2``.
* :func:`discretize_as_tensor_function`: an integer lookup view of a
  discrete tensor, for resampling experiments.
* :func:`gradient_check`: analytic parameter gradients against central
  differences.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, UnsupportedConfigurationError
from .mlp import entrywise_l1_max, lipschitz_budget
from .model import CoordinateGrid
from .tensor import as_tensor, numerical_tucker_rank

__all__ = [
    "RankReport",
    "LipschitzReport",
    "GradientReport",
    "TensorLookup",
    "verify_rank_bound",
    "verify_lipschitz",
    "lipschitz_constants",
    "discretize_as_tensor_function",
    "gradient_check",
]


@dataclass
class RankReport:
    bound: tuple
    trials: int
    max_rank: tuple
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


@dataclass
class LipschitzReport:
    delta: float
    eta: float
    kappa: float
    depth: int
    zeta: float
    pairs: int
    max_ratio: tuple
    violations: int

    @property
    def ok(self):
        return self.violations == 0


@dataclass
class GradientReport:
    max_rel_error: float
    per_parameter: list
    tol: float

    @property
    def ok(self):
        return self.max_rel_error <= self.tol


def _random_grid(model, rng, max_dim):
    axes = []
    for lo, hi in model.domain:
        n = int(rng.integers(1, max_dim + 1))
        axes.append(rng.uniform(lo, hi, size=n))
    return CoordinateGrid(*axes)


def verify_rank_bound(model, trials=200, max_dim=12, tol=1e-8, seed=0, extra=()):
    """Sample ``trials`` random grids and compare numerical Tucker ranks to the core dims.

    ``extra`` may hold additional tensors (e.g. super-resolved samples) that
    are checked against the same bound.
    """
    if trials < 1:
        raise ContractError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    bound = tuple(model.ranks)
    worst = [0, 0, 0]
    violations = []
    samples = (model.sample_tensor(_random_grid(model, rng, max_dim)) for _ in range(trials))
    for idx, t in enumerate((*samples, *extra)):
        r = numerical_tucker_rank(t, tol)
        worst = [max(a, b) for a, b in zip(worst, r)]
        if any(a > b for a, b in zip(r, bound)):
            violations.append((idx, t.shape, r))
    return RankReport(bound, trials + len(extra), tuple(worst), violations)


def lipschitz_constants(model, zeta):
    """``(delta, eta, kappa, depth)`` for ``model`` given the input magnitude bound ``zeta``."""
    depths = {m.depth for m in model.mlps}
    omegas = {m.omega0 for m in model.mlps}
    if len(depths) != 1 or len(omegas) != 1:
        raise UnsupportedConfigurationError(
            "the budget needs one shared depth and omega0 across factor MLPs, "
            f"got depths {sorted(depths)} and omega0 {sorted(omegas)}"
        )
    d, kappa = depths.pop(), omegas.pop()
    eta = max(float(np.abs(model.core).sum()), *(entrywise_l1_max(m) for m in model.mlps))
    delta = 0.0 if eta == 0.0 else lipschitz_budget(eta, kappa, d, zeta)
    return delta, eta, kappa, d


def verify_lipschitz(model, pairs=10_000, seed=0):
    """Empirical ``|df| / |dv|`` for single-axis perturbations against the budget.

    Coordinates are measured after the model's input normalization, which is
    where the factor MLPs see them; ``zeta`` is the largest input magnitude
    over the drawn samples.
    """
    if pairs < 1:
        raise ContractError("pairs must be at least 1")
    rng = np.random.default_rng(seed)
    base = np.column_stack([rng.uniform(lo, hi, size=pairs) for lo, hi in model.domain])
    ratios, zeta = [], 0.0
    for axis in range(3):
        lo, hi = model.domain[axis]
        moved = base.copy()
        moved[:, axis] = rng.uniform(lo, hi, size=pairs)
        f0 = model.evaluate_points(base)
        f1 = model.evaluate_points(moved)
        dv = np.abs(model.normalize(axis, moved[:, axis]) - model.normalize(axis, base[:, axis]))
        ok = dv > 0
        ratio = np.zeros(pairs)
        ratio[ok] = np.abs(f1 - f0)[ok] / dv[ok]
        ratios.append(ratio)
        for a in range(3):
            for pts in (base, moved):
                zeta = max(zeta, float(np.abs(model.normalize(a, pts[:, a])).max()))
    delta, eta, kappa, d = lipschitz_constants(model, zeta)
    # A float-rounding allowance on delta; a real violation overshoots by orders of magnitude.
    limit = delta * (1.0 + 1e-12)
    violations = int(sum(np.count_nonzero(r > limit) for r in ratios))
    return LipschitzReport(delta, eta, kappa, d, zeta, pairs,
                           tuple(float(r.max()) for r in ratios), violations)


class TensorLookup:
    """A discrete tensor viewed as a function on its integer index grid."""

    def __init__(self, tensor):
        self.tensor = as_tensor(tensor)

    @property
    def shape(self):
        return self.tensor.shape

    def _indices(self, axis, coords):
        c = np.atleast_1d(np.asarray(coords, dtype=np.float64))
        idx = np.rint(c)
        if np.any(idx != c):
            raise DomainError(f"axis {axis}: coordinates must be integers")
        if np.any((idx < 0) | (idx >= self.tensor.shape[axis])):
            raise DomainError(f"axis {axis}: index outside 0..{self.tensor.shape[axis] - 1}")
        return idx.astype(np.intp)

    def evaluate_point(self, x, y, z):
        i, j, k = (int(self._indices(a, c)[0]) for a, c in enumerate((x, y, z)))
        return float(self.tensor[i, j, k])

    def evaluate_grid(self, grid):
        ix = [self._indices(a, c) for a, c in enumerate(grid.axes)]
        return self.tensor[np.ix_(*ix)]

    sample_tensor = evaluate_grid


def discretize_as_tensor_function(tensor):
    return TensorLookup(tensor)


def gradient_check(model, grid=None, *, step=1e-6, max_entries=None, seed=0, tol=1e-5):
    """Compare :meth:`LrtfrModel.grid_gradients` to central differences.

    The objective is ``<G, evaluate_grid(grid)>`` with a random ``G``.  The
    relative error of each parameter array is ``|a - n| / max(|a|, |n|)``
    over the checked entries; ``max_entries`` caps the entries probed per
    array (chosen at random) for large models.
    """
    rng = np.random.default_rng(seed)
    if grid is None:
        grid = _random_grid(model, rng, 4)
    upstream = rng.normal(size=grid.shape)
    analytic = model.grid_gradients(grid, upstream)

    def objective():
        return float(np.sum(upstream * model.evaluate_grid(grid)))

    per_param = []
    for p, g in zip(model.parameters(), analytic):
        flat = p.reshape(-1)
        if max_entries is None or flat.size <= max_entries:
            idx = np.arange(flat.size)
        else:
            idx = rng.choice(flat.size, size=max_entries, replace=False)
        num = np.empty(len(idx))
        for n, i in enumerate(idx):
            keep = flat[i]
            flat[i] = keep + step
            up = objective()
            flat[i] = keep - step
            down = objective()
            flat[i] = keep
            num[n] = (up - down) / (2.0 * step)
        ana = g.reshape(-1)[idx]
        scale = max(np.linalg.norm(ana), np.linalg.norm(num))
        per_param.append(0.0 if scale == 0.0 else float(np.linalg.norm(ana - num) / scale))
    return GradientReport(max(per_param), per_param, tol)
