"""Command-line interface: learn-prior, augment, signature, specificity,
metrics, loss.

Option resolution is flags > --config JSON file > built-in defaults; every
command echoes its fully resolved configuration into a .meta.json next to
its primary output, and all commands are deterministic given (inputs,
config, seed). Exit codes: 0 success, 1 partial/data failure, 2 bad
configuration.

Set FPGM_LOG=debug|info|warning to control verbosity.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, augment, io_formats, metrics, prior, ssl_kernels
from .errors import EmptyTarget, FpgmError, NoUsableSamples

log = logging.getLogger("fpgm")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

COMMON_DEFAULTS = {"seed": 0, "jobs": 1, "resize": None}

DEFAULTS = {
    "learn-prior": {
        "momentum": prior.DEFAULT_MOMENTUM,
        "mode": "ema",
        "dilation_radius": prior.DEFAULT_DILATION_RADIUS,
    },
    "augment": {
        "gamma": augment.DEFAULT_GAMMA,
        "mode": "radial_broadcast",
        "clip": True,
    },
    "signature": {
        "label": "dataset",
        "subsets": False,
        "dilation_radius": prior.DEFAULT_DILATION_RADIUS,
        "plot": False,
    },
    "specificity": {
        "n_images": analysis.DEFAULT_N_IMAGES,
        "dilation_radius": prior.DEFAULT_DILATION_RADIUS,
        "plot": False,
    },
    "metrics": {},
    "loss": {
        "tau_c": ssl_kernels.DEFAULT_TAU_C,
        "lambda_unsup": 0.5,
        "lambda_freq": 0.5,
        "smooth": ssl_kernels.DEFAULT_SMOOTH,
    },
}


def _setup_logging():
    level = os.environ.get("FPGM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _resolve(args, command):
    """Fill unset options from the config file, then from defaults."""
    file_cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(_config_error(f"cannot read config {args.config}: {exc}"))
    resolved = {}
    for key, default in {**COMMON_DEFAULTS, **DEFAULTS[command]}.items():
        val = getattr(args, key, None)
        if val is None:
            val = file_cfg.get(key, default)
        setattr(args, key, val)
        resolved[key] = val
    return resolved


def _config_error(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def _load_dataset(images_dir, masks_dir, resize):
    manifest = io_formats.build_manifest(images_dir, masks_dir)
    if masks_dir is not None:
        listed = [n for n in sorted(os.listdir(images_dir)) if n.endswith(".png")]
        if len(manifest.entries) < len(listed):
            log.warning(
                "%d image(s) without a matching mask were skipped",
                len(listed) - len(manifest.entries),
            )
    for image_id, image_path, mask_path in manifest.entries:
        img = io_formats.load_image(image_path, resize=resize)
        mask = io_formats.load_mask(mask_path, resize=resize) if mask_path else None
        yield image_id, img, mask


def _write_meta(out_path, command, resolved):
    io_formats.write_json(out_path + ".meta.json", {"command": command, **resolved})


def cmd_learn_prior(args):
    resolved = _resolve(args, "learn-prior")
    dataset = ((img, mask) for _, img, mask in _load_dataset(args.images, args.masks, args.resize))
    try:
        learned = prior.learn_prior(
            dataset,
            momentum=args.momentum,
            dilation_radius=args.dilation_radius,
            mode=args.mode,
        )
    except NoUsableSamples as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    io_formats.save_prior(learned, args.out)
    _write_meta(args.out, "learn-prior", resolved)
    print(f"prior written to {args.out}: {learned.samples_seen} sample(s), "
          f"mode={learned.aggregation_mode}, r_max={len(learned.profile) - 1}")
    return EXIT_OK


def cmd_augment(args):
    resolved = _resolve(args, "augment")
    try:
        frequency_prior = io_formats.load_prior(args.prior)
    except (OSError, FpgmError) as exc:
        return _config_error(f"cannot load prior: {exc}")
    cfg = augment.AlignmentConfig(gamma=args.gamma, mode=args.mode, clip_output=args.clip)
    os.makedirs(args.out_dir, exist_ok=True)
    manifest = io_formats.build_manifest(args.images)

    def process(entry):
        image_id, image_path, _ = entry
        img = io_formats.load_image(image_path, resize=args.resize)
        out, info = augment.fpgm_augment(img, frequency_prior, cfg, return_info=True)
        io_formats.save_image(out, os.path.join(args.out_dir, image_id + ".png"))
        return {"id": image_id, **info}

    records, failures = [], 0
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for entry, result in zip(manifest.entries, pool.map(
                lambda e: _try(process, e), manifest.entries)):
            if isinstance(result, Exception):
                log.error("augment failed for %s: %s", entry[0], result)
                failures += 1
            else:
                records.append(result)
    records.sort(key=lambda r: r["id"])
    sidecar = os.path.join(args.out_dir, "augment_sidecar.jsonl")
    io_formats.write_jsonl(sidecar, records)
    _write_meta(sidecar, "augment", resolved)
    print(f"augmented {len(records)} image(s), {failures} failure(s) -> {args.out_dir}")
    return EXIT_PARTIAL if failures else EXIT_OK


def _try(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # gathered, reported per image
        return exc


def _summary_rows(summary):
    return [
        (r, repr(float(summary.mean[r])), repr(float(summary.std[r])))
        for r in range(len(summary.mean))
    ]


def cmd_signature(args):
    resolved = _resolve(args, "signature")
    dataset = [
        (img, mask) for _, img, mask in _load_dataset(args.images, args.masks, args.resize)
    ]
    try:
        if args.subsets:
            summaries = analysis.subset_consistency(
                dataset, seed=args.seed, dilation_radius=args.dilation_radius
            )
        else:
            summaries = (
                analysis.dataset_signature(
                    dataset, args.label, dilation_radius=args.dilation_radius
                ),
            )
    except NoUsableSamples as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    for summary in summaries:
        path = f"{args.out}_{summary.label}.csv"
        io_formats.write_csv(path, ("radius", "mean", "std"), _summary_rows(summary))
        print(f"wrote {path} (n={summary.n})")
    _write_meta(args.out, "signature", resolved)
    if args.plot:
        from .plotting import plot_signature_summaries

        plot_signature_summaries(summaries, args.out + ".png")
        print(f"wrote {args.out}.png")
    return EXIT_OK


def cmd_specificity(args):
    resolved = _resolve(args, "specificity")
    dataset = [
        (img, mask) for _, img, mask in _load_dataset(args.images, args.masks, args.resize)
    ]
    try:
        edge, background = analysis.specificity_study(
            dataset,
            n_images=args.n_images,
            seed=args.seed,
            dilation_radius=args.dilation_radius,
        )
    except NoUsableSamples as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    for summary in (edge, background):
        path = f"{args.out}_{summary.label}.csv"
        io_formats.write_csv(path, ("radius", "mean", "std"), _summary_rows(summary))
        print(f"wrote {path} (n={summary.n})")
    _write_meta(args.out, "specificity", resolved)
    if args.plot:
        from .plotting import plot_signature_summaries

        plot_signature_summaries((edge, background), args.out + ".png")
        print(f"wrote {args.out}.png")
    return EXIT_OK


def cmd_metrics(args):
    resolved = _resolve(args, "metrics")
    pred_manifest = io_formats.build_manifest(args.pred)
    gt_by_id = {e[0]: e[1] for e in io_formats.build_manifest(args.gt).entries}

    def load_pair(entry):
        image_id, pred_path, _ = entry
        if image_id not in gt_by_id:
            raise FpgmError(f"no ground truth for {image_id}")
        return (
            image_id,
            io_formats.load_mask(pred_path, resize=args.resize),
            io_formats.load_mask(gt_by_id[image_id], resize=args.resize),
        )

    pairs, failures = [], 0
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for entry, result in zip(pred_manifest.entries, pool.map(
                lambda e: _try(load_pair, e), pred_manifest.entries)):
            if isinstance(result, Exception):
                log.error("metrics skipped %s: %s", entry[0], result)
                failures += 1
            else:
                pairs.append(result)
    report = metrics.build_report(sorted(pairs, key=lambda p: p[0]))
    rows = [
        (r.image_id, f"{r.dice:.2f}", f"{r.jaccard:.2f}",
         f"{r.hd95:.2f}", f"{r.asd:.2f}", r.status)
        for r in report.per_image
    ]
    agg = report.aggregate
    rows.append(("aggregate", f"{agg['dice']:.2f}", f"{agg['jaccard']:.2f}",
                 f"{agg['hd95']:.2f}", f"{agg['asd']:.2f}", f"n={agg['n']}"))
    io_formats.write_csv(args.out, ("id", "dice", "jaccard", "hd95", "asd", "status"), rows)
    _write_meta(args.out, "metrics", resolved)
    print(f"wrote {args.out} ({len(report.per_image)} pair(s), {failures} failure(s))")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_loss(args):
    resolved = _resolve(args, "loss")
    probs = io_formats.read_float_grid(args.probs)
    target = io_formats.load_mask(args.mask, resize=args.resize)
    weights = ssl_kernels.LossWeights(
        lambda_unsup=args.lambda_unsup, lambda_freq=args.lambda_freq, tau_c=args.tau_c
    )
    report = {
        "ce": ssl_kernels.cross_entropy_loss(probs, target),
        "dice": ssl_kernels.soft_dice_loss(probs, target, args.smooth),
    }
    report["sup"] = 0.5 * (report["ce"] + report["dice"])
    unsup = freq = 0.0
    if args.weak_probs:
        weak = io_formats.read_float_grid(args.weak_probs)
        pl = ssl_kernels.pseudo_label(weak, args.tau_c)
        report["pseudo_valid_fraction"] = float(np.mean(pl.valid))
        for key, path in (("unsup", args.strong_probs), ("freq", args.freq_probs)):
            if path:
                view = io_formats.read_float_grid(path)
                try:
                    value = ssl_kernels.soft_dice_loss(view, pl, args.smooth)
                except EmptyTarget:
                    value = 0.0
                report[key] = value
        unsup = report.get("unsup", 0.0)
        freq = report.get("freq", 0.0)
    report["total"] = ssl_kernels.total_loss(report["sup"], unsup, freq, weights)
    report["weights"] = {"lambda_unsup": weights.lambda_unsup,
                         "lambda_freq": weights.lambda_freq, "tau_c": weights.tau_c}
    text = json.dumps(report, indent=1, sort_keys=True)
    print(text)
    if args.out:
        io_formats.write_json(args.out, report)
        _write_meta(args.out, "loss", resolved)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--seed", type=int, help="RNG seed (default: 0)")
    common.add_argument("--jobs", type=int, help="parallel workers (default: 1)")
    common.add_argument("--resize", type=int,
                        help="bilinear-resize inputs to N x N (default: off; typical choice 256)")

    parser = argparse.ArgumentParser(
        prog="fpgm", description="Frequency-prior guided augmentation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn-prior", parents=[common],
                       help="learn a radial frequency prior from (image, mask) pairs")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True, help="output prior JSON path")
    p.add_argument("--momentum", type=float, help="EMA momentum (default: 0.999)")
    p.add_argument("--mode", choices=("ema", "mean"), help="aggregation (default: ema)")
    p.add_argument("--dilation-radius", dest="dilation_radius", type=int,
                   help="edge-band dilation radius in px (default: 2)")
    p.set_defaults(func=cmd_learn_prior)

    p = sub.add_parser("augment", parents=[common],
                       help="spectral-shape-align images toward a learned prior")
    p.add_argument("--images", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--gamma", type=float, help="guidance strength (default: 0.05)")
    p.add_argument("--mode", choices=augment.MODES,
                   help="amplitude reconstruction (default: radial_broadcast)")
    p.add_argument("--no-clip", dest="clip", action="store_false", default=None,
                   help="keep raw inverse-transform values instead of clipping to [0,1]")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("signature", parents=[common],
                       help="dataset edge-signature summary (or split-half consistency)")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--label", help="dataset label (default: dataset)")
    p.add_argument("--subsets", action="store_true", default=None,
                   help="two disjoint random halves instead of the whole dataset")
    p.add_argument("--dilation-radius", dest="dilation_radius", type=int,
                   help="edge-band dilation radius in px (default: 2)")
    p.add_argument("--plot", action="store_true", default=None,
                   help="also render a PNG figure next to the CSV")
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("specificity", parents=[common],
                       help="edge vs matched-count background signature comparison")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--n-images", dest="n_images", type=int,
                   help="images to sample (default: 500)")
    p.add_argument("--dilation-radius", dest="dilation_radius", type=int,
                   help="edge-band dilation radius in px (default: 2)")
    p.add_argument("--plot", action="store_true", default=None,
                   help="also render a PNG figure next to the CSVs")
    p.set_defaults(func=cmd_specificity)

    p = sub.add_parser("metrics", parents=[common],
                       help="Dice/Jaccard/HD95/ASD over paired mask directories")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("loss", parents=[common],
                       help="loss report from probability FloatGrids and a mask")
    p.add_argument("--probs", required=True, help="labeled-branch probabilities (FloatGrid)")
    p.add_argument("--mask", required=True, help="ground-truth mask PNG")
    p.add_argument("--weak-probs", dest="weak_probs",
                   help="weak-view probabilities, enables pseudo-labeling")
    p.add_argument("--strong-probs", dest="strong_probs",
                   help="strong-view probabilities for the consistency term")
    p.add_argument("--freq-probs", dest="freq_probs",
                   help="frequency-view probabilities for the consistency term")
    p.add_argument("--tau-c", dest="tau_c", type=float,
                   help="pseudo-label confidence threshold (default: 0.95)")
    p.add_argument("--lambda-unsup", dest="lambda_unsup", type=float,
                   help="strong-view consistency weight (default: 0.5)")
    p.add_argument("--lambda-freq", dest="lambda_freq", type=float,
                   help="frequency-view consistency weight (default: 0.5)")
    p.add_argument("--smooth", type=float, help="Dice smoothing constant (default: 1.0)")
    p.add_argument("--out", help="also write the JSON report to this path")
    p.set_defaults(func=cmd_loss)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FpgmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except FileNotFoundError as exc:
        return _config_error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
