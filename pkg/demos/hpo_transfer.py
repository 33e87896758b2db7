"""Recommend hyperparameters for a new dataset from sparse evaluations on old ones.

The performance tensor is (learning rate x regularization x dataset).  Only
two grid cells of the new dataset are evaluated.  Refining the fitted
function between grid nodes lets the recommendation land off the meshgrid.

    python3 demos/hpo_transfer.py --seeds 5
"""

import argparse

import numpy as np

from lrtfr import FitConfig, fit_inpainting
from lrtfr.synthetic import hpo_mask, hpo_surface
from lrtfr.tasks import HpoGrid, hpo_complete

ap = argparse.ArgumentParser()
ap.add_argument("--seeds", type=int, default=5)
args = ap.parse_args()

grid = HpoGrid(3.0 ** np.arange(-7, 8), 2.0 ** np.arange(-7, 8), 4)
for seed in range(args.seeds):
    perf, truth = hpo_surface(15, 4, seed=seed)
    mask = hpo_mask(perf.shape, new_dataset=3, seed=seed + 100)
    cfg = FitConfig.for_task("hpo", seed=seed)
    model = fit_inpainting(perf * mask, mask, cfg)
    line = [f"seed {seed}: grid best {perf[:, :, 3].max():.4f}"]
    for scale in (1, 2, 4):
        _, rec = hpo_complete(perf * mask, mask, grid, cfg, scale=scale, new_dataset=3, model=model)
        line.append(f"x{scale} -> ({rec.axis1_value:.3g}, {rec.axis2_value:.3g}) true {truth(*rec.position, 3):.4f}")
    print(" | ".join(line))
