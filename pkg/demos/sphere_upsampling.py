"""Fit a signed distance function to 500 sphere samples and extract a dense cloud.

    python3 demos/sphere_upsampling.py --out dense.txt
"""

import argparse
import time

import numpy as np

from lrtfr import FitConfig, chamfer, f_score, fit_sdf
from lrtfr.io import save_points
from lrtfr.synthetic import sphere_points
from lrtfr.tasks import PointCloud, upsample_pointcloud

ap = argparse.ArgumentParser()
ap.add_argument("--points", type=int, default=500)
ap.add_argument("--iters", type=int, default=None)
ap.add_argument("--out")
args = ap.parse_args()

pc = PointCloud(sphere_points(args.points, seed=0))
cfg = FitConfig.for_task("pcu", **({"iters": args.iters} if args.iters else {}))
t0 = time.perf_counter()
model = fit_sdf(pc.normalized(), cfg)
dense = upsample_pointcloud(pc, cfg, model=model)
print(f"{len(pc)} input points -> {len(dense)} output points in {time.perf_counter() - t0:.1f}s")

radius = np.linalg.norm(dense.points, axis=1)
print(f"radius of output points: mean {radius.mean():.4f}, std {radius.std():.4f}")
ref = sphere_points(100_000, seed=7)
print(f"chamfer to dense reference {chamfer(dense.points, ref):.4f}, F-score {f_score(dense.points, ref):.3f}")
if args.out:
    save_points(dense.points, args.out)
    print(f"wrote {args.out}")
