"""Command line driver: ``fgsal run``, ``fgsal batch`` and ``fgsal eval``."""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import logging
import os
from pathlib import Path
import sys
import time

import numpy as np
from PIL import Image

from . import evaluation
from .errors import FgsalError
from .imgproc import load_image
from .optimize import render_map, to_uint8
from .pipeline import PipelineConfig, compute_saliency

log = logging.getLogger("fgsal")

IMAGE_EXTS = {".png", ".jpg", ".jpeg", ".bmp"}
SUFFIX = "_saliency"


def save_gray(values, path):
    Image.fromarray(to_uint8(values)).save(path)


def _normalized(values):
    values = np.asarray(values, dtype=np.float64)
    top = values.max() if values.size else 0.0
    return values / top if top > 0 else np.zeros_like(values)


def write_dumps(result, stem, out_dir, config):
    out_dir = Path(out_dir)
    if config.dump_superpixels:
        labels = result.segmentation.labels.astype(np.uint16)
        Image.fromarray(labels).save(out_dir / f"{stem}_superpixels.png")
    if config.dump_proposals:
        with open(out_dir / f"{stem}_proposals.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x", "y", "w", "h", "score"])
            for (x, y, w, h), s in zip(result.proposals.rects.tolist(), result.proposals.scores.tolist()):
                writer.writerow([x, y, w, h, repr(s)])
    if config.dump_objectness:
        save_gray(_normalized(result.pixel_objectness), out_dir / f"{stem}_objectness.png")
    if config.dump_weights:
        n = result.segmentation.n_regions
        fg = result.fg_connectivity if result.fg_connectivity is not None else np.full(n, np.nan)
        with open(out_dir / f"{stem}_weights.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["region", "objectness", "fg", "w_fg", "w_bg"])
            for i in range(n):
                writer.writerow([i, repr(float(result.region_objectness[i])), repr(float(fg[i])),
                                 repr(float(result.weights.foreground[i])),
                                 repr(float(result.weights.background[i]))])
        wfg = render_map(_normalized(result.weights.foreground), result.segmentation, normalize=False)
        save_gray(wfg, out_dir / f"{stem}_weights.png")


def run_single(image_path, config, out_dir, gt_path=None):
    """Compute, save and optionally score the saliency map of one image.

    Returns the pipeline result and the per-image metrics (``None`` without a
    ground-truth mask).
    """
    image_path = Path(image_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        rgb = load_image(image_path)
        result = compute_saliency(rgb, config)
    except FgsalError as exc:
        raise type(exc)(f"{image_path}: {exc}") from exc
    stem = image_path.stem
    save_gray(result.saliency, out_dir / f"{stem}{SUFFIX}.png")
    write_dumps(result, stem, out_dir, config)

    metrics = None
    if gt_path is not None:
        # score the map exactly as written to disk
        saved = evaluation.load_saliency(out_dir / f"{stem}{SUFFIX}.png")
        metrics = evaluation.evaluate_image(stem, saved, evaluation.load_mask(gt_path))
    return result, metrics


def _find_mask(mask_dir, stem):
    if mask_dir is None:
        return None
    for p in sorted(Path(mask_dir).glob(f"{stem}.*")):
        if p.suffix.lower() in IMAGE_EXTS:
            return p
    return None


def list_images(image_dir):
    return sorted(p for p in Path(image_dir).iterdir() if p.is_file() and p.suffix.lower() in IMAGE_EXTS)


def _batch_job(args):
    image_path, gt_path, out_dir, config = args
    start = time.perf_counter()
    try:
        _, metrics = run_single(image_path, config, out_dir, gt_path)
    except Exception as exc:  # one bad image must not sink the batch
        return image_path.name, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start
    return image_path.name, metrics, None, time.perf_counter() - start


def write_config(config, path):
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def run_batch(image_dir, mask_dir, out_dir, config, threads=1):
    """Process every image in ``image_dir`` and write maps plus reports.

    Returns ``(report, n_ok, n_failed)``; ``report`` is ``None`` when no
    image had a matching mask.
    """
    images = list_images(image_dir)
    if not images:
        raise FileNotFoundError(f"no images found in {image_dir}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir / "config_used.json")

    jobs = []
    for p in images:
        gt = _find_mask(mask_dir, p.stem)
        if mask_dir is not None and gt is None:
            log.warning("%s: no ground-truth mask, excluded from metrics", p.name)
        jobs.append((p, gt, out_dir, config))

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            outcomes = list(pool.map(_batch_job, jobs))
    else:
        outcomes = [_batch_job(j) for j in jobs]

    metrics, times, failed = [], [], 0
    for name, m, err, elapsed in outcomes:
        if err is not None:
            log.error("%s failed: %s", name, err)
            failed += 1
            continue
        times.append(elapsed)
        if m is not None:
            metrics.append(m)
    if times:
        log.info("processed %d image(s), mean wall time %.3f s per image", len(times), float(np.mean(times)))

    report = None
    if metrics:
        report = evaluation.aggregate(metrics)
        evaluation.write_metrics_json(report, out_dir / "metrics.json")
        if report.pr is not None:
            evaluation.write_pr_csv(report.pr, out_dir / "pr_curve.csv")
        log.info("mean MAE %.4f over %d image(s)", report.mean_mae, len(metrics))
    return report, len(times), failed


def evaluate_dir(map_dir, mask_dir, out_dir):
    """Score existing saliency maps (``<stem>.png`` or ``<stem>_saliency.png``)."""
    results = []
    for p in list_images(map_dir):
        stem = p.stem[:-len(SUFFIX)] if p.stem.endswith(SUFFIX) else p.stem
        gt = _find_mask(mask_dir, stem)
        if gt is None:
            log.warning("%s: no ground-truth mask, skipped", p.name)
            continue
        try:
            results.append(evaluation.evaluate_image(
                stem, evaluation.load_saliency(p), evaluation.load_mask(gt)))
        except FgsalError as exc:
            log.warning("%s: %s, skipped", p.name, exc)
    if not results:
        return None
    report = evaluation.aggregate(results)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.write_metrics_json(report, out_dir / "metrics.json")
    if report.pr is not None:
        evaluation.write_pr_csv(report.pr, out_dir / "pr_curve.csv")
    return report


def thread_count(flag):
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("FGSAL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _add_pipeline_flags(p):
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", type=Path, help="JSON file with PipelineConfig fields; flags override it")
    g.add_argument("--superpixels", type=int)
    g.add_argument("--compactness", type=float)
    g.add_argument("--log-sigma", type=float)
    g.add_argument("--proposals", type=int, help="windows kept after NMS")
    g.add_argument("--nms-iou", type=float)
    g.add_argument("--gaussian-spread", type=float, help="window size / gaussian sigma")
    g.add_argument("--eps", type=float)
    g.add_argument("--sigma-clr", type=float)
    g.add_argument("--sigma-b", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--max-side", type=int, help="downscale images whose long side exceeds this")
    g.add_argument("--no-area-norm", dest="area_norm", action="store_const", const=False)
    g.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
    d = p.add_argument_group("debug output")
    for name in ("superpixels", "proposals", "objectness", "weights"):
        d.add_argument(f"--dump-{name}", action="store_const", const=True)


def build_config(args):
    data = {}
    if args.config is not None:
        with open(args.config) as f:
            data.update(json.load(f))
    for key in PipelineConfig.__dataclass_fields__:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return PipelineConfig.from_dict(data)


def make_parser():
    parser = argparse.ArgumentParser(prog="fgsal", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="saliency map for one image")
    run.add_argument("image", type=Path)
    run.add_argument("--gt", type=Path, help="ground-truth mask for MAE")
    run.add_argument("--out", type=Path, default=Path("."))
    _add_pipeline_flags(run)

    batch = sub.add_parser("batch", help="saliency maps and metrics for a directory")
    batch.add_argument("imgdir", type=Path)
    batch.add_argument("--gt", type=Path, help="directory of masks matched by filename stem")
    batch.add_argument("--out", type=Path, required=True)
    batch.add_argument("--threads", type=int)
    _add_pipeline_flags(batch)

    ev = sub.add_parser("eval", help="metrics for existing saliency maps")
    ev.add_argument("mapdir", type=Path)
    ev.add_argument("maskdir", type=Path)
    ev.add_argument("--out", type=Path, help="output directory (default: mapdir)")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "eval":
        if not args.mapdir.is_dir() or not list_images(args.mapdir):
            parser.error(f"no saliency maps in {args.mapdir}")
        report = evaluate_dir(args.mapdir, args.maskdir, args.out or args.mapdir)
        if report is None:
            log.error("no map could be matched to a mask")
            return 1
        print(f"mean MAE {report.mean_mae:.4f} over {len(report.images)} image(s)")
        return 0

    try:
        config = build_config(args)
    except (FgsalError, OSError, json.JSONDecodeError, TypeError) as exc:
        parser.error(f"bad configuration: {exc}")

    if args.command == "run":
        try:
            _, metrics = run_single(args.image, config, args.out, args.gt)
        except (FgsalError, OSError) as exc:
            log.error("%s", exc)
            return 1
        if metrics is not None:
            print(f"MAE {metrics.mae:.4f}")
        return 0

    if not args.imgdir.is_dir() or not list_images(args.imgdir):
        parser.error(f"no images in {args.imgdir}")
    _, ok, failed = run_batch(args.imgdir, args.gt, args.out, config, thread_count(args.threads))
    return 1 if ok == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
