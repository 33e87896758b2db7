"""End-to-end recovery tasks built on the fitting routines."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError
from .model import CoordinateGrid, evenly_spaced, index_grid
from .optim import complete, fit_denoising, fit_inpainting, fit_sdf
from .tensor import as_mask, as_tensor

__all__ = [
    "HpoGrid",
    "Recommendation",
    "PointCloud",
    "inpaint",
    "denoise",
    "hpo_complete",
    "hpo_sample",
    "recommend",
    "decode_axis",
    "dense_scan",
    "upsample_pointcloud",
]


def inpaint(obs, mask, cfg):
    """Fit on the observed entries and fill in the rest."""
    model = fit_inpainting(obs, mask, cfg)
    return complete(obs, mask, model)


def denoise(obs, cfg):
    """Low-rank + TV + sparse-noise denoising; returns the clean estimate."""
    model, _ = fit_denoising(obs, cfg)
    return model.evaluate_grid(index_grid(np.shape(obs)))


# -- hyperparameter optimization ----------------------------------------------


@dataclass
class HpoGrid:
    axis1_values: np.ndarray
    axis2_values: np.ndarray
    dataset_count: int

    def __post_init__(self):
        self.axis1_values = np.asarray(self.axis1_values, dtype=np.float64)
        self.axis2_values = np.asarray(self.axis2_values, dtype=np.float64)
        for name, vals in (("axis1", self.axis1_values), ("axis2", self.axis2_values)):
            d = np.diff(vals)
            if vals.ndim != 1 or len(vals) < 1 or not (np.all(d > 0) or np.all(d < 0)):
                raise ContractError(f"{name} values must be strictly monotone")

    @property
    def shape(self):
        return (len(self.axis1_values), len(self.axis2_values), int(self.dataset_count))


@dataclass
class Recommendation:
    axis1_value: float
    axis2_value: float
    predicted_score: float
    grid_scale: int
    # Fractional index positions along the two hyperparameter axes.
    position: tuple = (0.0, 0.0)


def decode_axis(values, pos):
    """Hyperparameter value at fractional index ``pos``.

    Geometric grids (e.g. ``3**i``) are interpolated in the exponent,
    anything else linearly.
    """
    values = np.asarray(values, dtype=np.float64)
    idx = np.arange(len(values), dtype=np.float64)
    if len(values) == 1:
        return float(values[0])
    if np.all(values > 0):
        logs = np.log(values)
        steps = np.diff(logs)
        if np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            return float(np.exp(np.interp(pos, idx, logs)))
    return float(np.interp(pos, idx, values))


def hpo_sample(model, dims, scale):
    """The model on the ``scale``-times finer hyperparameter grid.

    The two hyperparameter modes get ``scale * (n - 1) + 1`` evenly spaced
    positions ``i / scale``, which include the original nodes; the dataset
    mode stays at its integer indices.
    """
    if scale not in (1, 2, 4):
        raise ContractError(f"scale must be 1, 2 or 4, got {scale}")
    n1, n2, n3 = dims
    # i / scale is exact for scale in {1, 2, 4}, so original nodes are hit exactly.
    xs = np.arange(scale * (n1 - 1) + 1) / scale
    ys = np.arange(scale * (n2 - 1) + 1) / scale
    return model.evaluate_grid(CoordinateGrid(xs, ys, np.arange(n3, dtype=np.float64)))


def recommend(full, grid, scale, new_dataset=-1):
    """Argmax of the ``new_dataset`` slice of a (possibly refined) tensor."""
    new = range(full.shape[2])[new_dataset]
    plane = full[:, :, new]
    i, j = np.unravel_index(int(np.argmax(plane)), plane.shape)
    p1, p2 = i / scale, j / scale
    return Recommendation(
        axis1_value=decode_axis(grid.axis1_values, p1),
        axis2_value=decode_axis(grid.axis2_values, p2),
        predicted_score=float(plane[i, j]),
        grid_scale=scale,
        position=(p1, p2),
    )


def hpo_complete(perf, mask, grid, cfg, scale=1, new_dataset=-1, model=None):
    """Complete a performance tensor and recommend a configuration.

    At ``scale`` 2 or 4 the prediction is refined with :func:`hpo_sample`.
    Observed entries always keep their measured values.  Returns
    ``(tensor, Recommendation)`` where the recommendation maximizes the
    prediction on the ``new_dataset`` slice.  A pre-trained ``model`` skips
    the fit.
    """
    if scale not in (1, 2, 4):
        raise ContractError(f"scale must be 1, 2 or 4, got {scale}")
    perf = as_tensor(perf, "performance tensor")
    mask = as_mask(mask, perf.shape)
    if perf.shape != grid.shape:
        raise DimensionError(f"performance tensor {perf.shape} does not match grid {grid.shape}")
    new = range(perf.shape[2])[new_dataset]
    if not mask[:, :, new].any():
        warnings.warn("new-dataset slice has no observations; prediction is pure transfer",
                      RuntimeWarning, stacklevel=2)
    if model is None:
        model = fit_inpainting(perf, mask, cfg)
    full = hpo_sample(model, perf.shape, scale)
    nodes = full[::scale, ::scale, :]
    full[::scale, ::scale, :] = np.where(mask == 1.0, perf, nodes)
    return full, recommend(full, grid, scale, new)


# -- point clouds ---------------------------------------------------------------


@dataclass
class PointCloud:
    points: np.ndarray
    center: np.ndarray = None
    scale: float = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if len(self.points) == 0:
            raise ContractError("a point cloud needs at least one point")
        if not np.all(np.isfinite(self.points)):
            raise ContractError("point coordinates must be finite")
        if self.center is None:
            self.center = self.points.mean(axis=0)
        self.center = np.asarray(self.center, dtype=np.float64)
        if self.scale is None:
            extent = float(np.abs(self.points - self.center).max())
            self.scale = 1.1 * extent if extent > 0 else 1.0

    def normalized(self):
        """Points mapped strictly inside ``[-1, 1]^3``."""
        return (self.points - self.center) / self.scale

    def denormalize(self, unit_points):
        return np.asarray(unit_points) * self.scale + self.center

    def __len__(self):
        return len(self.points)


def dense_scan(sdf, grid_res, tau_init, min_points):
    """Grid points of ``[-1, 1]^3`` where ``|sdf| < tau``, doubling ``tau`` as needed.

    ``sdf`` is anything with an ``evaluate_grid(CoordinateGrid)`` method.
    Returns ``(points, tau)``.
    """
    if not tau_init >= 0:
        raise ContractError("tau_init must be nonnegative")
    axis = evenly_spaced(-1.0, 1.0, grid_res)
    values = np.abs(sdf.evaluate_grid(CoordinateGrid(axis, axis, axis)))
    tau = float(tau_init)
    top = float(values.max())
    while True:
        keep = values < tau
        count = int(keep.sum())
        if count >= min_points or tau > top:
            break
        if tau > 0:
            tau *= 2.0
        else:
            # Doubling cannot leave zero; restart from the smallest nonzero |s|.
            positive = values[values > 0]
            tau = float(positive.min()) if positive.size else 1.0
    if count < min_points:
        warnings.warn(f"only {count} grid points satisfy |s| < tau for any tau", RuntimeWarning,
                      stacklevel=2)
    idx = np.argwhere(keep)
    return axis[idx], tau


def upsample_pointcloud(pc, cfg, model=None):
    """Fit an SDF to a sparse cloud and return a dense cloud near its zero level set."""
    if not isinstance(pc, PointCloud):
        pc = PointCloud(pc)
    if model is None:
        model = fit_sdf(pc.normalized(), cfg)
    dense, _ = dense_scan(model, cfg.grid_res, cfg.tau_init, cfg.min_points)
    return PointCloud(pc.denormalize(dense), center=pc.center, scale=pc.scale)
