"""Command line interface: ``wavedge <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .core import ScaleSchedule, load_raster, write_raster
from .filtering import CRITERIA, DecisionParams, audit, filter_links, oracle_links


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _axis(text: str):
    """``name=lo:hi:n`` or ``name=v1,v2,...``."""
    name, _, rest = text.partition("=")
    if not rest:
        raise argparse.ArgumentTypeError(f"expected name=values, got {text!r}")
    if ":" in rest:
        lo, hi, n = rest.split(":")
        return name, np.linspace(float(lo), float(hi), int(n))
    return name, np.array(_floats(rest))


def _threshold(text: str):
    if text in ("auto", "robust"):
        return text
    return float(text)


def _schedule(text: str) -> ScaleSchedule:
    return ScaleSchedule.parse(text)


def _out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", newline="")


def cmd_pattern_lab(args) -> int:
    from .patterns import _base_spec, level_curve, q_surface

    given = {k: getattr(args, k) for k in ("A", "B", "beta", "sigma") if getattr(args, k) is not None}
    spec = _base_spec(args.kind, None, **given)
    grid = dict(args.grid) if args.grid else {"A" if args.kind == 3 else "B": np.linspace(0.1, 4.0, 40)}
    w = csv.writer(_out(args.output))
    w.writerow(["kind", "alpha", "A", "B", "beta", "Q1", "Q0"])
    for alpha in args.alpha:
        surf = q_surface(args.kind, alpha, grid, args.criterion, args.scales, spec)
        names = list(surf.axes)
        for idx in np.ndindex(*surf.q1.shape):
            vals = {n: float(surf.axes[n][i]) for n, i in zip(names, idx)}
            abb = [vals.get(k, getattr(spec, k)) for k in ("A", "B", "beta")]
            w.writerow([args.kind, alpha] + [f"{v:.6g}" for v in abb + [surf.q1[idx], surf.q0[idx]]])
    if args.curve:
        cw = csv.writer(_out(args.curve_output)) if args.curve_output else w
        (x_name, xs), (y_name, ys) = args.curve
        cw.writerow(["kind", "alpha", "curve", x_name, y_name])
        for alpha in args.alpha:
            pts = level_curve(args.kind, alpha, x_name, xs, y_name, ys, args.criterion, "min", args.side, spec, args.scales)
            for x, y in pts:
                cw.writerow([args.kind, alpha, "Q=0", f"{x:.6g}", f"{y:.6g}"])
    return 0


def cmd_filter_eval(args) -> int:
    img = load_raster(args.image)
    sched = args.schedule
    src = img if img.ndim == 1 or args.row is None else img[args.row]
    mode = "1d" if src.ndim == 1 else "rows"
    truth = oracle_links(src, sched.coarsest, sched.finest, mode=mode)
    w = csv.writer(_out(args.output))
    reports = [audit(filter_links(src, sched, DecisionParams(alpha=a, criterion=args.criterion), mode), truth) for a in args.alpha]
    w.writerow(["metric"] + [f"alpha={a:g}" for a in args.alpha])
    for k, (label, _) in enumerate(reports[0].rows()):
        w.writerow([label] + [f"{r.rows()[k][1]:.2f}" for r in reports])
    return 0


def cmd_detect(args) -> int:
    from .detector import DetectorParams, detect_1d, detect_2d

    img = load_raster(args.image)
    dp = DecisionParams(alpha=args.alpha)
    fp = DetectorParams(threshold=args.threshold, fraction=args.fraction, seed=args.seed)
    if img.ndim == 1 or args.row is not None:
        src = img if img.ndim == 1 else img[args.row]
        edges = detect_1d(src, args.schedule, dp, fp)
    else:
        edges = detect_2d(img, args.schedule, dp, fp)
    if args.output:
        write_raster(edges.mask.astype(np.float64), args.output)
    w = csv.writer(_out(args.provenance))
    w.writerow(["id", "score", "accepted"])
    accepted = {i for i, _ in edges.accepted}
    for i, sc in sorted(edges.scores.items()):
        w.writerow([i, f"{sc:.6g}", int(i in accepted)])
    print(f"threshold {edges.threshold:.6g}, {len(accepted)} accepted, {edges.count} edge pixels", file=sys.stderr)
    return 0


def cmd_canny(args) -> int:
    from .detector import canny_baseline

    edges = canny_baseline(load_raster(args.image), args.scale, args.low, args.high)
    write_raster(edges.mask.astype(np.float64), args.output)
    print(f"{edges.count} edge pixels", file=sys.stderr)
    return 0


def cmd_phantom(args) -> int:
    from .evaluation import BENCHMARK_PSF, PhantomSpec, default_region_image, disk_region_image, generate_phantom

    with open(args.spec) as fh:
        cfg = json.load(fh)
    shape = tuple(cfg.get("shape", (256, 256)))
    if "region_image" in cfg:
        region = load_raster(cfg["region_image"])
    elif cfg.get("region") == "disk":
        region = disk_region_image(shape, cfg.get("radius"), cfg.get("inside", 2.0), cfg.get("outside", 1.0))
    else:
        region = default_region_image(shape)
    spec = PhantomSpec(region, tuple(cfg.get("psf", BENCHMARK_PSF)), float(cfg.get("noise_sigma", 0.05)), int(cfg.get("seed", 0)))
    img, truth = generate_phantom(spec)
    write_raster(img, args.image)
    write_raster(truth.astype(np.float64), args.truth)
    return 0


def cmd_fom(args) -> int:
    from .evaluation import FomParams, fom

    det = load_raster(args.detected) > 0.5
    tru = load_raster(args.truth) > 0.5
    print(f"{fom(det, tru, FomParams(args.gamma)):.6f}")
    return 0


def cmd_table(args) -> int:
    from .evaluation import run_table_experiment

    with open(args.config) as fh:
        cfg = json.load(fh)
    text = run_table_experiment(args.kind, cfg)
    out = _out(args.output)
    out.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavedge", description="Sparse-scale wavelet edge detection.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern-lab", help="Q1/Q0 reliability margins of a model edge pattern")
    p.add_argument("--kind", type=int, required=True, choices=[3, 4, 5, 6])
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0])
    p.add_argument("--criterion", choices=CRITERIA, default="full")
    p.add_argument("--grid", type=_axis, action="append", help="parameter axis, e.g. A=1:3:41 or beta=1.2,1.6")
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--scales", type=int, default=50, help="number of sampled scales")
    p.add_argument("--curve", type=_axis, nargs=2, metavar=("X", "Y"), help="trace the Q=0 level curve, e.g. beta=1.2:3:10 B=0.05:8:60")
    p.add_argument("--side", choices=["above", "below"], default="below")
    p.add_argument("--curve-output")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pattern_lab)

    p = sub.add_parser("filter-eval", help="audit the sparse filter against edge focusing")
    p.add_argument("image")
    p.add_argument("--alpha", type=float, nargs="+", default=[-0.5, 0.0, 0.5])
    p.add_argument("--criterion", choices=CRITERIA, default="full")
    p.add_argument("--schedule", type=_schedule, default=ScaleSchedule.parse("32,16,8,4"))
    p.add_argument("--row", type=int, help="audit a single row only")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_filter_eval)

    p = sub.add_parser("detect", help="multi-scale edge detection")
    p.add_argument("image")
    p.add_argument("--schedule", type=_schedule, default=ScaleSchedule.parse("32,16,8,4"))
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--threshold", type=_threshold, default="auto", help="number, 'auto' or 'robust'")
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--row", type=int, help="run the 1-D detector on one row")
    p.add_argument("-o", "--output", help="edge map PGM")
    p.add_argument("--provenance", help="CSV of scores (default stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("canny", help="single-scale baseline with hysteresis")
    p.add_argument("image")
    p.add_argument("--scale", type=float, default=4.0)
    p.add_argument("--low", type=float, default=0.1)
    p.add_argument("--high", type=float, default=0.3)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_canny)

    p = sub.add_parser("phantom", help="speckle phantom and its true edges")
    p.add_argument("spec", help="JSON with shape, psf, noise_sigma, seed and optional region")
    p.add_argument("image")
    p.add_argument("truth")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("fom", help="Pratt's figure of merit of an edge map")
    p.add_argument("detected")
    p.add_argument("truth")
    p.add_argument("--gamma", type=float, default=0.11)
    p.set_defaults(func=cmd_fom)

    p = sub.add_parser("table", help="false-connection or FOM experiment from a JSON config")
    p.add_argument("kind", choices=["falseconn", "fom"])
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_table)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"wavedge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
