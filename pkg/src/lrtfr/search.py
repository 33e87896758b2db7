"""Rank / omega0 grid search over the divisor sets used for model selection."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .metrics import psnr
from .model import index_grid
from .optim import complete, fit_denoising, fit_inpainting, fit_sdf
from .tensor import as_mask, as_tensor

__all__ = ["DIVISORS", "OMEGAS", "SearchRow", "SearchResult", "candidate_ranks", "grid_search",
           "worker_count"]

DIVISORS = (1, 2, 4, 8, 16, 32)
OMEGAS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
VALIDATION_FRACTION = 0.1


@dataclass
class SearchRow:
    s: int
    s3: int
    omega0: float
    ranks: tuple
    score: float


@dataclass
class SearchResult:
    model: object
    row: SearchRow
    table: list

    @property
    def score(self):
        return self.row.score


def candidate_ranks(dims, s, s3):
    """``(n1 // s, n2 // s, n3 // s3)``, each clamped to at least 1."""
    n1, n2, n3 = dims
    return (max(1, n1 // s), max(1, n2 // s), max(1, n3 // s3))


def worker_count():
    """Worker processes allowed by ``LRTFR_THREADS`` (default 1)."""
    raw = os.environ.get("LRTFR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ContractError(f"LRTFR_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def validation_split(mask, seed, fraction=VALIDATION_FRACTION):
    """Split the observed set into ``(train, held)`` masks; at least one entry stays in each."""
    mask = np.asarray(mask, dtype=np.float64)
    obs_idx = np.flatnonzero(mask)
    if len(obs_idx) < 2:
        raise ContractError("need at least two observed entries to hold some out")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    n_held = min(len(obs_idx) - 1, max(1, int(round(fraction * len(obs_idx)))))
    held_idx = rng.permutation(obs_idx)[:n_held]
    held = np.zeros(mask.size)
    held[held_idx] = 1.0
    held = held.reshape(mask.shape)
    return mask - held, held


def _score(task, data, mask, cfg, oracle_ref):
    """Train one candidate; returns ``(score, model)``.  Higher scores are better."""
    if task in ("inpaint", "hpo"):
        if oracle_ref is not None:
            model = fit_inpainting(data, mask, cfg)
            return psnr(complete(data, mask, model), oracle_ref), model
        train, held = validation_split(mask, cfg.seed)
        model = fit_inpainting(data, train, cfg)
        rec = model.evaluate_grid(index_grid(data.shape))
        sel = held == 1.0
        return psnr(rec[sel], data[sel]), model
    if task == "denoise":
        hist = []
        model, _ = fit_denoising(data, cfg.replace(log_path=None), history=hist)
        if oracle_ref is not None:
            return psnr(model.evaluate_grid(index_grid(data.shape)), oracle_ref), model
        return -float(hist[-1][1]), model
    if task == "pcu":
        hist = []
        model = fit_sdf(data, cfg.replace(log_path=None), history=hist)
        return -float(hist[-1][1]), model
    raise ContractError(f"unknown task {task!r}")


def _run(job):
    return _score(*job)


def grid_search(task, data, cfg, mask=None, *, s_set=DIVISORS, s3_set=DIVISORS, omega_set=OMEGAS,
                oracle_ref=None, workers=None):
    """Train every ``(s, s3, omega0)`` candidate and keep the best by validation score.

    Inpainting and HPO score by PSNR on 10% of the observed entries held out
    from training, or against ``oracle_ref`` when given; denoising and SDF
    fitting score by the negated final loss (PSNR against ``oracle_ref`` for
    denoising).  With a validation split the winning configuration is refit
    on every observed entry.  ``data`` is an ``n x 3`` point array for
    ``task == "pcu"`` and a tensor otherwise; point clouds have no tensor
    dims, so there the divisors apply to ``cfg.ranks``.  The score table follows
    configuration order regardless of completion order.
    """
    s_set, s3_set, omega_set = tuple(s_set), tuple(s3_set), tuple(omega_set)
    if not (s_set and s3_set and omega_set):
        raise ContractError("empty search set")
    if task == "pcu":
        data = np.asarray(data, dtype=np.float64)
        dims = None
    else:
        data = as_tensor(data, "observation")
        dims = data.shape
        if task in ("inpaint", "hpo"):
            mask = as_mask(np.ones(dims) if mask is None else mask, dims)
    if oracle_ref is not None:
        oracle_ref = as_tensor(oracle_ref, "reference")
    combos = []
    for s in s_set:
        for s3 in s3_set:
            for om in omega_set:
                ranks = candidate_ranks(cfg.ranks if dims is None else dims, s, s3)
                combos.append((s, s3, float(om), ranks))
    jobs = [(task, data, mask, cfg.replace(ranks=r, omega0=om, log_path=None), oracle_ref)
            for _, _, om, r in combos]
    n_workers = worker_count() if workers is None else max(1, int(workers))
    if n_workers == 1 or len(jobs) == 1:
        results = [_run(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n_workers, len(jobs))) as pool:
            results = list(pool.map(_run, jobs))
    table = [SearchRow(s, s3, om, r, float(score)) for (s, s3, om, r), (score, _) in zip(combos, results)]
    # First maximal row wins, so ties resolve in configuration order.
    best = max(range(len(table)), key=lambda i: (table[i].score, -i))
    model = results[best][1]
    if task in ("inpaint", "hpo") and oracle_ref is None:
        model = fit_inpainting(data, mask, jobs[best][3])
    return SearchResult(model, table[best], table)
