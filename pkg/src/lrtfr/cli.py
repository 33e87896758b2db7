"""Command-line entry point: ``lrtfr <subcommand> ...``.

Exit codes: 0 success, 2 usage or contract error, 3 I/O or format error,
4 numerical failure (including failed verification).
"""

import argparse
import csv
import io as _io
import json
import math
import sys

import numpy as np

from . import io
from .errors import ContractError, FormatError, LrtfrError, NumericalError
from .metrics import MetricReport, chamfer, f_score, nrmse, psnr, ssim
from .model import index_grid
from .optim import FitConfig, complete, fit_denoising, fit_inpainting, fit_sdf
from .search import DIVISORS, OMEGAS, grid_search
from .tasks import HpoGrid, PointCloud, hpo_complete, upsample_pointcloud
from .verify import gradient_check, verify_lipschitz, verify_rank_bound

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4

# Flags that map one-to-one onto FitConfig fields.
_FIT_FLAGS = ("omega0", "depth", "hidden", "lr", "iters", "weight_decay", "gamma1", "gamma2",
              "seed", "mc_samples", "fd_step", "tau_init", "grid_res", "min_points")


def _positive_ints(text):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"values must be positive integers, got {text!r}")
    return vals


def _ranks(text):
    vals = _positive_ints(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"--rank needs three values, got {text!r}")
    return vals


def _floats(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or min(vals) <= 0:
        raise argparse.ArgumentTypeError(f"values must be positive, got {text!r}")
    return vals


def _add_fit_flags(p):
    g = p.add_argument_group("model and training")
    g.add_argument("--rank", type=_ranks, help="F-ranks r1,r2,r3")
    g.add_argument("--omega0", type=float)
    g.add_argument("--depth", type=int)
    g.add_argument("--hidden", type=int)
    g.add_argument("--lr", type=float)
    g.add_argument("--iters", type=int)
    g.add_argument("--weight-decay", dest="weight_decay", type=float)
    g.add_argument("--decoupled-weight-decay", dest="decoupled", action=argparse.BooleanOptionalAction,
                   default=None)
    g.add_argument("--seed", type=int)
    g.add_argument("--log", dest="log_path", help="per-iteration loss CSV")
    g.add_argument("--model-out", help="write the trained model (LRF1)")


def _add_pcu_flags(p):
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.add_argument("--fd-step", dest="fd_step", type=float)
    p.add_argument("--tau", dest="tau_init", type=float)
    p.add_argument("--grid-res", dest="grid_res", type=int)
    p.add_argument("--min-points", dest="min_points", type=int)


def _add_gamma_flags(p):
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="lrtfr", description="Low-rank tensor function toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inpaint", help="complete a partially observed tensor")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)

    p = sub.add_parser("denoise", help="remove Gaussian and sparse noise")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sparse-out", help="write the estimated sparse component")
    _add_gamma_flags(p)
    _add_fit_flags(p)

    p = sub.add_parser("hpo", help="complete a performance tensor and recommend a configuration")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--axes", required=True, help="text file with two lines of axis values")
    p.add_argument("--scale", type=int, choices=(1, 2, 4), default=1)
    p.add_argument("--new-dataset", type=int, default=-1)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)

    p = sub.add_parser("pcu", help="upsample a sparse point cloud")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_gamma_flags(p)
    _add_pcu_flags(p)
    _add_fit_flags(p)

    p = sub.add_parser("eval", help="quality metrics between a result and a reference")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--fscore-d", type=float, help="F-score threshold (default 1%% of ref diagonal)")
    p.add_argument("--jsonl", action="store_true", help="one JSON object per metric")

    p = sub.add_parser("verify", help="rank, Lipschitz and gradient checks on a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-dim", type=int, default=12)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--grad-entries", type=int, default=20, help="entries probed per parameter array")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("search", help="grid search over rank divisors and omega0")
    p.add_argument("--task", choices=("inpaint", "denoise", "hpo", "pcu"), required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mask")
    p.add_argument("--out", help="recovered tensor from the best candidate (tensor tasks)")
    p.add_argument("--s", dest="s_set", type=_positive_ints, default=DIVISORS)
    p.add_argument("--s3", dest="s3_set", type=_positive_ints, default=DIVISORS)
    p.add_argument("--omegas", dest="omega_set", type=_floats, default=OMEGAS)
    p.add_argument("--oracle-ref", help="ground truth; score by PSNR against it")
    p.add_argument("--table-out", help="CSV score table")
    _add_gamma_flags(p)
    _add_pcu_flags(p)
    _add_fit_flags(p)
    return parser


def parse_args(argv):
    return build_parser().parse_args(argv)


def build_config(args, task):
    """FitConfig from task defaults overridden by the flags actually given."""
    overrides = {f: getattr(args, f) for f in _FIT_FLAGS if getattr(args, f, None) is not None}
    if getattr(args, "rank", None) is not None:
        overrides["ranks"] = args.rank
    if getattr(args, "decoupled", None) is not None:
        overrides["decoupled_weight_decay"] = args.decoupled
    if getattr(args, "log_path", None):
        overrides["log_path"] = args.log_path
    return FitConfig.for_task(task, **overrides)


def _emit(out, text):
    out.write(text + "\n")


def _fmt(v):
    return "Inf" if isinstance(v, float) and math.isinf(v) else repr(v)


def _maybe_save_model(args, model):
    if getattr(args, "model_out", None):
        io.save_model(model, args.model_out)


def cmd_inpaint(args, out):
    obs, mask = io.load_tensor(args.input), io.load_mask(args.mask)
    model = fit_inpainting(obs, mask, build_config(args, "inpaint"))
    io.save_tensor(complete(obs, mask, model), args.out)
    _maybe_save_model(args, model)
    return EXIT_OK


def cmd_denoise(args, out):
    obs = io.load_tensor(args.input)
    model, sparse = fit_denoising(obs, build_config(args, "denoise"))
    io.save_tensor(model.evaluate_grid(index_grid(obs.shape)), args.out)
    if args.sparse_out:
        io.save_tensor(sparse, args.sparse_out)
    _maybe_save_model(args, model)
    return EXIT_OK


def cmd_hpo(args, out):
    perf, mask = io.load_tensor(args.input), io.load_mask(args.mask)
    a1, a2 = io.load_hpo_axes(args.axes)
    grid = HpoGrid(a1, a2, perf.shape[2])
    full, rec = hpo_complete(perf, mask, grid, build_config(args, "hpo"), scale=args.scale,
                             new_dataset=args.new_dataset)
    io.save_tensor(full, args.out)
    _emit(out, f"axis1={rec.axis1_value!r}")
    _emit(out, f"axis2={rec.axis2_value!r}")
    _emit(out, f"predicted_score={rec.predicted_score!r}")
    _emit(out, f"grid_scale={rec.grid_scale}")
    return EXIT_OK


def cmd_pcu(args, out):
    pc = PointCloud(io.load_points(args.input))
    cfg = build_config(args, "pcu")
    model = fit_sdf(pc.normalized(), cfg)
    dense = upsample_pointcloud(pc, cfg, model=model)
    io.save_points(dense.points, args.out)
    _maybe_save_model(args, model)
    _emit(out, f"points={len(dense)}")
    return EXIT_OK


def _is_tensor_file(path):
    with open(path, "rb") as fh:
        return fh.read(4) == io.TENSOR_MAGIC


def cmd_eval(args, out):
    if _is_tensor_file(args.pred):
        x, ref = io.load_tensor(args.pred), io.load_tensor(args.ref)
        reports = [
            MetricReport("psnr", psnr(x, ref, args.peak), {"peak": args.peak}, x.size),
            MetricReport("ssim", ssim(x, ref), {"window": 8, "k1": 0.01, "k2": 0.03}, x.size),
            MetricReport("nrmse", nrmse(x, ref), {}, x.size),
        ]
    else:
        p, q = io.load_points(args.pred), io.load_points(args.ref)
        d = args.fscore_d
        if d is None:
            d = 0.01 * float(np.linalg.norm(q.max(axis=0) - q.min(axis=0)))
        reports = [
            MetricReport("chamfer", chamfer(p, q), {}, len(p) + len(q)),
            MetricReport("fscore", f_score(p, q, d), {"d": d}, len(p) + len(q)),
        ]
    for r in reports:
        _emit(out, json.dumps(r.as_dict(), sort_keys=True) if args.jsonl else r.as_text())
    return EXIT_OK


def cmd_verify(args, out):
    model = io.load_model(args.model)
    rank = verify_rank_bound(model, args.trials, args.max_dim, seed=args.seed)
    lip = verify_lipschitz(model, args.pairs, seed=args.seed)
    grad = gradient_check(model, max_entries=args.grad_entries, seed=args.seed)
    _emit(out, f"rank_bound={','.join(map(str, rank.bound))}")
    _emit(out, f"rank_max_observed={','.join(map(str, rank.max_rank))}")
    _emit(out, f"rank_violations={len(rank.violations)}")
    _emit(out, f"lipschitz_delta={_fmt(lip.delta)}")
    _emit(out, f"lipschitz_max_ratio={','.join(repr(r) for r in lip.max_ratio)}")
    _emit(out, f"lipschitz_violations={lip.violations}")
    _emit(out, f"gradient_max_rel_error={grad.max_rel_error!r}")
    ok = rank.ok and lip.ok and grad.ok
    _emit(out, f"status={'ok' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_search(args, out):
    cfg = build_config(args, args.task)
    ref = io.load_tensor(args.oracle_ref) if args.oracle_ref else None
    if args.task == "pcu":
        pc = PointCloud(io.load_points(args.input))
        data, mask = pc.normalized(), None
    else:
        data = io.load_tensor(args.input)
        mask = io.load_mask(args.mask) if args.mask else None
    res = grid_search(args.task, data, cfg, mask, s_set=args.s_set, s3_set=args.s3_set,
                      omega_set=args.omega_set, oracle_ref=ref)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "s3", "omega0", "r1", "r2", "r3", "score"])
    for row in res.table:
        w.writerow([row.s, row.s3, repr(row.omega0), *row.ranks, repr(row.score)])
    if args.table_out:
        io.atomic_write(args.table_out, buf.getvalue())
    out.write(buf.getvalue())
    b = res.row
    _emit(out, f"best_s={b.s}")
    _emit(out, f"best_s3={b.s3}")
    _emit(out, f"best_omega0={b.omega0!r}")
    _emit(out, f"best_rank={','.join(map(str, b.ranks))}")
    _emit(out, f"best_score={_fmt(b.score)}")
    if args.out and args.task != "pcu":
        if args.task in ("inpaint", "hpo"):
            m = mask if mask is not None else np.ones(data.shape)
            result = complete(data, m, res.model)
        else:
            result = res.model.evaluate_grid(index_grid(data.shape))
        io.save_tensor(result, args.out)
    _maybe_save_model(args, res.model)
    return EXIT_OK


COMMANDS = {
    "inpaint": cmd_inpaint,
    "denoise": cmd_denoise,
    "hpo": cmd_hpo,
    "pcu": cmd_pcu,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "search": cmd_search,
}


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        err.write(f"lrtfr: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (FormatError, OSError) as exc:
        err.write(f"lrtfr: I/O error: {exc}\n")
        return EXIT_IO
    except (ContractError, LrtfrError) as exc:
        err.write(f"lrtfr: {exc}\n")
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
