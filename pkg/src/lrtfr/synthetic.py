"""Synthetic ground truths, masks and noise injectors for tests and demos."""

import numpy as np

from .tensor import tucker_product

__all__ = [
    "smooth_factor",
    "smooth_lowrank",
    "random_tucker",
    "uniform_mask",
    "add_gaussian",
    "add_impulse",
    "add_deadlines",
    "add_stripes",
    "sphere_points",
    "hpo_surface",
]


def smooth_factor(n, r, rng):
    """``n x r`` factor matrix: a constant column followed by low-frequency sinusoids."""
    pos = np.arange(n) / max(n - 1, 1)
    cols = [np.ones(n)]
    for _ in range(r - 1):
        freq = rng.uniform(0.3, 1.5)
        phase = rng.uniform(0, 2 * np.pi)
        cols.append(np.sin(2 * np.pi * freq * pos + phase))
    return np.stack(cols, axis=1)


def smooth_lowrank(dims, ranks, seed=0):
    """Smooth tensor of exact Tucker rank ``ranks`` scaled to span [0, 1].

    Each factor includes a constant column, so the affine rescale keeps the
    rank unchanged.
    """
    rng = np.random.default_rng(seed)
    factors = [smooth_factor(n, r, rng) for n, r in zip(dims, ranks)]
    core = rng.normal(size=tuple(ranks))
    t = tucker_product(core, *factors)
    return (t - t.min()) / (t.max() - t.min())


def random_tucker(dims, ranks, seed=0):
    """Gaussian core and Gaussian factors; generically of Tucker rank ``ranks``."""
    rng = np.random.default_rng(seed)
    core = rng.normal(size=tuple(ranks))
    factors = [rng.normal(size=(n, r)) for n, r in zip(dims, ranks)]
    return tucker_product(core, *factors)


def uniform_mask(dims, rate, seed=0):
    """Binary mask with exactly ``round(rate * size)`` observed entries."""
    rng = np.random.default_rng(seed)
    size = int(np.prod(dims))
    count = int(round(rate * size))
    flat = np.zeros(size)
    flat[rng.permutation(size)[:count]] = 1.0
    return flat.reshape(dims)


def hpo_mask(dims, new_dataset=-1, seed=0, history_rate=0.1, new_rate=0.01):
    """Per-slice observation mask: sparse on historical datasets, sparser on the new one.

    Every slice keeps at least one observed entry.
    """
    n1, n2, n3 = dims
    new = new_dataset % n3
    rng = np.random.default_rng(seed)
    mask = np.zeros(dims)
    for k in range(n3):
        rate = new_rate if k == new else history_rate
        count = max(1, int(round(rate * n1 * n2)))
        mask[:, :, k].flat[rng.permutation(n1 * n2)[:count]] = 1.0
    return mask


def add_gaussian(t, sigma, seed=0):
    rng = np.random.default_rng(seed)
    return t + rng.normal(0.0, sigma, size=t.shape)


def add_impulse(t, fraction, seed=0, low=0.5, high=1.0):
    """Add impulses of magnitude U(low, high) with random sign to a fraction of entries.

    Returns ``(noisy, support)`` where ``support`` is a boolean array.
    """
    rng = np.random.default_rng(seed)
    size = t.size
    idx = rng.permutation(size)[: int(round(fraction * size))]
    support = np.zeros(size, dtype=bool)
    support[idx] = True
    noise = np.zeros(size)
    noise[idx] = rng.uniform(low, high, size=len(idx)) * rng.choice([-1.0, 1.0], size=len(idx))
    return t + noise.reshape(t.shape), support.reshape(t.shape)


def add_deadlines(t, band_fraction, seed=0, max_cols=3):
    """Zero out a few random columns in a fraction of the frontal slices."""
    rng = np.random.default_rng(seed)
    out = t.copy()
    n1, n2, n3 = t.shape
    for k in rng.permutation(n3)[: int(round(band_fraction * n3))]:
        cols = rng.choice(n2, size=rng.integers(1, max_cols + 1), replace=False)
        out[:, cols, k] = 0.0
    return out


def add_stripes(t, band_fraction, seed=0, strength=0.25, max_cols=6):
    """Add a constant offset to a few random columns in a fraction of the slices."""
    rng = np.random.default_rng(seed)
    out = t.copy()
    n1, n2, n3 = t.shape
    for k in rng.permutation(n3)[: int(round(band_fraction * n3))]:
        cols = rng.choice(n2, size=rng.integers(1, max_cols + 1), replace=False)
        out[:, cols, k] += rng.uniform(-strength, strength, size=len(cols))
    return out


def sphere_points(n, seed=0, radius=1.0, center=(0.0, 0.0, 0.0)):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(n, 3))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    return radius * p + np.asarray(center, dtype=np.float64)


def hpo_surface(n=15, datasets=4, seed=0):
    """Separable smooth performance surface with a peak between grid nodes.

    Every dataset shares the response shape ``base + amp * bump`` up to a
    per-dataset level factor.  Returns ``(tensor, truth)`` where
    ``truth(p1, p2, k)`` evaluates the ground-truth score at fractional index
    positions for dataset ``k``.
    """
    rng = np.random.default_rng(seed)
    peak = rng.uniform(2.0, n - 3.0, size=2)
    # Push the peak off the integer lattice.
    peak = np.floor(peak) + rng.uniform(0.3, 0.7, size=2)
    width = rng.uniform(0.25, 0.35, size=2) * n
    base = rng.uniform(0.45, 0.6)
    amp = rng.uniform(0.3, 0.4)
    level = rng.uniform(0.8, 1.0, size=datasets)

    def truth(p1, p2, k):
        g1 = np.exp(-((np.asarray(p1) - peak[0]) / width[0]) ** 2)
        g2 = np.exp(-((np.asarray(p2) - peak[1]) / width[1]) ** 2)
        return level[k] * (base + amp * g1 * g2)

    i = np.arange(n, dtype=np.float64)
    tensor = np.stack([truth(i[:, None], i[None, :], k) for k in range(datasets)], axis=2)
    return tensor, truth
