"""Adam with weight decay and the training loops for each recovery task."""

import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import ContractError, DimensionError, NumericalError
from .model import index_grid, init_model
from .tensor import as_mask, as_tensor, soft_threshold, tv_seminorm, tv_subgradient

__all__ = [
    "AdamState",
    "FitConfig",
    "TASK_WEIGHT_DECAY",
    "adam_step",
    "fit_inpainting",
    "fit_denoising",
    "fit_sdf",
    "complete",
    "sdf_loss_terms",
]

# Adam weight decay per task, as used in the reference experiments.
TASK_WEIGHT_DECAY = {"inpaint": 1.0, "denoise": 0.1, "hpo": 0.5, "pcu": 0.5}


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    decoupled: bool = False
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, grads, state):
    """One in-place Adam update of ``params``.

    With ``state.decoupled`` False the decay term ``weight_decay * p`` is added
    to the gradient before the moment updates (classic L2 coupling); otherwise
    parameters are shrunk by ``lr * weight_decay`` directly.
    """
    if len(params) != len(grads):
        raise DimensionError(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise DimensionError(f"parameter {i} has shape {p.shape} but gradient {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter {i} at step {state.t + 1}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if state.weight_decay and not state.decoupled:
            g = g + state.weight_decay * p
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        if state.weight_decay and state.decoupled:
            p *= 1.0 - state.lr * state.weight_decay
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass
class FitConfig:
    ranks: tuple = (4, 4, 3)
    omega0: float = 1.0
    depth: int = 3
    hidden: int = 256
    lr: float = 1e-3
    iters: int = 5000
    weight_decay: float = 0.0
    decoupled_weight_decay: bool = False
    gamma1: float = 0.0
    gamma2: float = 0.0
    seed: int = 0
    # point-cloud extras
    mc_samples: int = 5000
    fd_step: float = 1e-3
    ball_radius: float = 0.01
    tau_init: float = 1e-3
    grid_res: int = 128
    min_points: int = 10_000
    log_path: str = None

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        if len(self.ranks) != 3 or min(self.ranks) < 1:
            raise ContractError(f"ranks must be three positive integers, got {self.ranks}")
        if self.iters < 1:
            raise ContractError("iters must be at least 1")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ContractError("gamma1 and gamma2 must be nonnegative")
        if self.depth < 2 or self.hidden < 1 or not self.omega0 > 0:
            raise ContractError("invalid network shape")

    @classmethod
    def for_task(cls, task, **overrides):
        """Defaults for ``task`` in {"inpaint", "denoise", "hpo", "pcu"}."""
        if task not in TASK_WEIGHT_DECAY:
            raise ContractError(f"unknown task {task!r}")
        base = {"weight_decay": TASK_WEIGHT_DECAY[task], "omega0": 4.0}
        if task == "denoise":
            base.update(gamma1=10.0, gamma2=1e-5)
        elif task == "hpo":
            # A few dozen observations: coupled decay would swamp the data term.
            base.update(decoupled_weight_decay=True, ranks=(2, 2, 2), hidden=64,
                        iters=1000)
        elif task == "pcu":
            # The surface term is a sum over points, so the regularizers need
            # weights of the same order to keep s from collapsing to zero.
            base.update(depth=4, iters=500, hidden=64, ranks=(4, 4, 4),
                        mc_samples=1000, gamma1=50.0, gamma2=20.0)
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes):
        return replace(self, **changes)


class _LossLog:
    """Collects per-iteration loss rows and mirrors them to CSV if asked."""

    def __init__(self, path, term_names, sink=None):
        self.rows = sink if sink is not None else []
        self.names = term_names
        self._fh = None
        if path:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            self._fh = open(path, "w", newline="")
            self._writer = csv.writer(self._fh)
            self._writer.writerow(["iter", "total_loss", *term_names])

    def add(self, it, total, terms):
        self.rows.append((it, total, *terms))
        if self._fh is not None:
            self._writer.writerow([it, repr(total), *(repr(t) for t in terms)])

    def close(self):
        if self._fh is not None:
            self._fh.close()


def _new_model(dims_or_domain, cfg):
    return init_model(cfg.ranks, dims_or_domain, hidden=cfg.hidden, depth=cfg.depth,
                      omega0=cfg.omega0, seed=cfg.seed)


def _adam(cfg):
    return AdamState(lr=cfg.lr, weight_decay=cfg.weight_decay, decoupled=cfg.decoupled_weight_decay)


def _check_loss(loss, it):
    if not math.isfinite(loss):
        raise NumericalError(f"loss became non-finite at iteration {it}")


def fit_inpainting(obs, mask, cfg, history=None, model=None):
    """Fit a model to the observed entries by minimizing ``||P_mask(obs - T)||_F^2``.

    ``history``, if given, is a list that receives ``(iter, loss)`` rows.
    """
    obs = as_tensor(obs, "observation")
    mask = as_mask(mask, obs.shape)
    if not mask.any():
        raise ContractError("mask has no observed entries")
    grid = index_grid(obs.shape)
    model = _new_model(obs.shape, cfg) if model is None else model
    params = model.parameters()
    state = _adam(cfg)
    log = _LossLog(cfg.log_path, ["fit"], history)
    target = mask * obs
    try:
        for it in range(cfg.iters):
            t, cache = model.evaluate_grid(grid, return_cache=True)
            resid = mask * t - target
            loss = float(np.sum(resid * resid))
            _check_loss(loss, it)
            log.add(it, loss, (loss,))
            grads = model.grid_gradients(grid, 2.0 * resid, cache=cache)
            adam_step(params, grads, state)
    finally:
        log.close()
    return model


def complete(obs, mask, model):
    """Observed entries from ``obs``, the rest from the model's reconstruction."""
    obs = as_tensor(obs, "observation")
    mask = as_mask(mask, obs.shape)
    rec = model if isinstance(model, np.ndarray) else model.evaluate_grid(index_grid(obs.shape))
    return np.where(mask == 1.0, obs, rec)


def fit_denoising(obs, cfg, history=None, model=None):
    """Alternating minimization of ``||O - T - S||^2 + g1 ||S||_1 + g2 TV(T)``.

    Each iteration takes one Adam step on the network parameters with ``S``
    held fixed, then sets ``S = Soft_{g1/2}(O - T)`` using the ``T`` of that
    iteration.  Returns ``(model, S)``.
    """
    obs = as_tensor(obs, "observation")
    grid = index_grid(obs.shape)
    model = _new_model(obs.shape, cfg) if model is None else model
    params = model.parameters()
    state = _adam(cfg)
    sparse = np.zeros_like(obs)
    log = _LossLog(cfg.log_path, ["fit", "l1", "tv"], history)
    g1, g2 = cfg.gamma1, cfg.gamma2
    try:
        for it in range(cfg.iters):
            t, cache = model.evaluate_grid(grid, return_cache=True)
            resid = t + sparse - obs
            fit = float(np.sum(resid * resid))
            tv = tv_seminorm(t) if g2 else 0.0
            l1 = float(np.abs(sparse).sum()) if g1 else 0.0
            loss = fit + g1 * l1 + g2 * tv
            _check_loss(loss, it)
            log.add(it, loss, (fit, l1, tv))
            upstream = 2.0 * resid
            if g2:
                upstream = upstream + g2 * tv_subgradient(t)
            grads = model.grid_gradients(grid, upstream, cache=cache)
            adam_step(params, grads, state)
            sparse = soft_threshold(obs - t, g1 / 2.0)
    finally:
        log.close()
    return model, sparse


# -- signed distance fitting -------------------------------------------------

_CUBE_VOLUME = 8.0


def sdf_loss_terms(sdf_values, point_count, grads_fd, off_values, off_keep):
    """The three terms of the point-cloud objective from precomputed samples.

    ``sdf_values`` are SDF values at observed points, ``grads_fd`` is an
    ``n x 3`` array of spatial gradients at random points, ``off_values`` the
    SDF at random points and ``off_keep`` a boolean mask excluding samples
    near observed points.  Integrals over the cube are volume times the mean.
    """
    on = float(np.abs(sdf_values[:point_count]).sum())
    eik = _CUBE_VOLUME * float(np.mean(np.abs(np.sum(grads_fd**2, axis=1) - 1.0)))
    off = _CUBE_VOLUME * float(np.sum(np.exp(-np.abs(off_values)) * off_keep) / len(off_values))
    return on, eik, off


def fit_sdf(points, cfg, history=None, model=None):
    """Fit an SDF to points in ``[-1, 1]^3``.

    Loss: sum of ``|s|`` at the points, ``gamma1`` times the integrated
    eikonal residual ``| ||grad s||^2 - 1 |`` and ``gamma2`` times the
    integrated ``exp(-|s|)`` away from the points.  Integrals are Monte Carlo
    estimates over ``cfg.mc_samples`` fresh uniform samples per iteration;
    spatial gradients are central differences with step ``cfg.fd_step``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DimensionError(f"points must be n x 3, got {pts.shape}")
    if len(pts) == 0:
        raise ContractError("point set is empty")
    if np.any(np.abs(pts) > 1.0):
        raise ContractError("points must lie in [-1, 1]^3")
    domain = ((-1.0, 1.0),) * 3
    model = _new_model(domain, cfg) if model is None else model
    params = model.parameters()
    state = _adam(cfg)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    tree = cKDTree(pts)
    p, n, h = len(pts), cfg.mc_samples, cfg.fd_step
    log = _LossLog(cfg.log_path, ["surface", "eikonal", "offsurface"], history)
    g1, g2 = cfg.gamma1, cfg.gamma2
    offsets = h * np.eye(3)
    try:
        for it in range(cfg.iters):
            q = rng.uniform(-1.0 + h, 1.0 - h, size=(n, 3))
            keep = tree.query(q, k=1)[0] > cfg.ball_radius
            stacked = np.concatenate([pts, q, *(q + o for o in offsets), *(q - o for o in offsets)])
            vals, cache = model.evaluate_points(stacked, return_cache=True)
            s_on = vals[:p]
            s_q = vals[p:p + n]
            plus = vals[p + n:p + 4 * n].reshape(3, n)
            minus = vals[p + 4 * n:].reshape(3, n)
            grad = ((plus - minus) / (2.0 * h)).T
            on, eik, off = sdf_loss_terms(s_on, p, grad, s_q, keep)
            loss = on + g1 * eik + g2 * off
            _check_loss(loss, it)
            log.add(it, loss, (on, eik, off))

            up = np.zeros_like(vals)
            up[:p] = np.sign(s_on)
            resid = np.sum(grad**2, axis=1) - 1.0
            # d/dgrad_a of mean|resid| is sign(resid) * 2 grad_a / n, then the stencil.
            coef = g1 * _CUBE_VOLUME / n * np.sign(resid)[None, :] * 2.0 * grad.T / (2.0 * h)
            up[p + n:p + 4 * n] = coef.ravel()
            up[p + 4 * n:] = -coef.ravel()
            up[p:p + n] = -g2 * _CUBE_VOLUME / n * keep * np.exp(-np.abs(s_q)) * np.sign(s_q)
            grads = model.point_gradients(stacked, up, cache=cache)
            adam_step(params, grads, state)
    finally:
        log.close()
    return model
