"""Image, point-cloud and recommendation quality metrics."""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial import cKDTree

from .errors import ContractError, DimensionError

__all__ = [
    "MetricReport",
    "psnr",
    "nrmse",
    "ssim",
    "chamfer",
    "f_score",
    "ara_aca",
]


@dataclass
class MetricReport:
    name: str
    value: float
    params: dict = field(default_factory=dict)
    samples: int = 0

    def as_text(self):
        v = "Inf" if math.isinf(self.value) else repr(float(self.value))
        return f"{self.name}={v}"

    def as_dict(self):
        v = "Inf" if math.isinf(self.value) else float(self.value)
        return {"metric": self.name, "value": v, "params": dict(self.params), "samples": self.samples}


def _pair(x, ref):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {ref.shape}")
    return x, ref


def psnr(x, ref, peak=1.0):
    """``10 log10(peak^2 / MSE)``; ``inf`` for identical inputs."""
    if not peak > 0:
        raise ContractError("peak must be positive")
    x, ref = _pair(x, ref)
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def nrmse(x, ref):
    """Frobenius-relative error ``||x - ref|| / ||ref||``."""
    x, ref = _pair(x, ref)
    denom = float(np.linalg.norm(ref))
    if denom == 0.0:
        raise ContractError("nrmse is undefined for an all-zero reference")
    return float(np.linalg.norm(x - ref)) / denom


def ssim(x, ref, window=8, k1=0.01, k2=0.03, data_range=1.0):
    """Mean SSIM over all ``window x window`` patches of every frontal slice.

    Slices smaller than the window are treated as a single patch.
    """
    x, ref = _pair(x, ref)
    if x.ndim == 2:
        x, ref = x[:, :, None], ref[:, :, None]
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    n1, n2 = x.shape[:2]
    w1, w2 = min(window, n1), min(window, n2)
    scores = []
    for k in range(x.shape[2]):
        a = sliding_window_view(x[:, :, k], (w1, w2))
        b = sliding_window_view(ref[:, :, k], (w1, w2))
        mu_a = a.mean(axis=(-2, -1))
        mu_b = b.mean(axis=(-2, -1))
        var_a = a.var(axis=(-2, -1))
        var_b = b.var(axis=(-2, -1))
        cov = (a * b).mean(axis=(-2, -1)) - mu_a * mu_b
        num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
        den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
        scores.append(num / den)
    return float(np.mean(scores))


def _cloud(p, name):
    pts = np.asarray(getattr(p, "points", p), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DimensionError(f"{name} must be n x 3, got {pts.shape}")
    if len(pts) == 0:
        raise ContractError(f"{name} is empty")
    return pts


def chamfer(p, q):
    """Sum of the two mean nearest-neighbour Euclidean distances."""
    p, q = _cloud(p, "p"), _cloud(q, "q")
    dpq = cKDTree(q).query(p, k=1)[0]
    dqp = cKDTree(p).query(q, k=1)[0]
    return float(dpq.mean() + dqp.mean())


def f_score(p, q, d=None):
    """Harmonic mean of precision (``p`` near ``q``) and recall (``q`` near ``p``).

    ``q`` is the reference; the default threshold is 1% of its bounding-box
    diagonal.
    """
    p, q = _cloud(p, "p"), _cloud(q, "q")
    if d is None:
        d = 0.01 * float(np.linalg.norm(q.max(axis=0) - q.min(axis=0)))
    if not d > 0:
        raise ContractError("f_score threshold must be positive")
    precision = float(np.mean(cKDTree(q).query(p, k=1)[0] <= d))
    recall = float(np.mean(cKDTree(p).query(q, k=1)[0] <= d))
    if precision == 0.0 or recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def ara_aca(recommended_scores, best_scores):
    """``(ACA, ARA)``: mean recommended score and mean percentage of the best score."""
    rec = np.asarray(recommended_scores, dtype=np.float64).ravel()
    best = np.asarray(best_scores, dtype=np.float64).ravel()
    if rec.shape != best.shape:
        raise DimensionError(f"{rec.size} recommended scores but {best.size} best scores")
    if rec.size == 0:
        raise ContractError("need at least one dataset")
    if np.any(best <= 0):
        raise ContractError("best scores must be positive")
    return float(rec.mean()), float(np.mean(rec / best) * 100.0)
