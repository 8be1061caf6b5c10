"""Command-line interface.

Subcommands: analyze, plan, mix, remap, augment, eval-det, eval-gen.
Every randomized command takes an explicit --seed (no wall-clock default),
and rerunning any command with unchanged inputs rewrites byte-identical
outputs. Single-file outputs are written atomically (temp file + rename).

Each subcommand accepts ``--config FILE``: a JSON object whose keys mirror
the long flag names (dashes as underscores); explicit flags override config
values.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from longtail import augment as aug
from longtail import eval_det, eval_gen, hybrid, sampling, stats
from longtail.dataset import (
    DatasetManifest,
    entries_by_id,
    load_manifest_file,
    save_manifest,
)
from longtail.errors import ConfigurationError, LongtailError, ValidationError
from longtail.geometry import PixelRect, remap_crop

log = logging.getLogger("longtail")


def write_atomic(path: Path | str, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _need(value, flag: str):
    if value is None:
        raise ConfigurationError(f"{flag} is required")
    return value


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _load_json_file(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None


def cmd_analyze(args) -> int:
    manifest = load_manifest_file(_need(args.manifest, "--manifest"))
    report = stats.imbalance_report(
        stats.class_distribution(manifest), manifest.class_names
    )
    write_atomic(args.out, _dumps(stats.report_to_dict(report)))
    log.info("analysis written to %s", args.out)
    if args.table:
        sys.stdout.write(stats.format_report_table(report))
    return 0


def cmd_plan(args) -> int:
    strategy = _need(args.strategy, "--strategy")
    manifest = load_manifest_file(_need(args.manifest, "--manifest"))
    batch = _need(args.batch, "--batch")
    seed = _need(args.seed, "--seed")
    if strategy == sampling.STRATEGY_BASELINE:
        plan = sampling.baseline_plan(manifest, batch, seed)
    elif strategy == sampling.STRATEGY_CAS:
        plan = sampling.cas_plan(manifest, batch, seed, args.epoch_length)
    elif strategy == sampling.STRATEGY_RFS:
        plan = sampling.rfs_plan(manifest, args.rfs_t, batch, seed, args.rfs_rounding)
    else:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    write_atomic(args.out, sampling.plan_to_json(plan))
    log.info("%s plan (%d slots) written to %s", strategy, plan.epoch_length, args.out)
    return 0


def _resolve_targets(args, real: DatasetManifest) -> hybrid.BalanceTargets:
    name_to_id = {name: i for i, name in enumerate(real.class_names)}
    given = [
        bool(args.targets),
        bool(args.match_max),
        args.fixed_per_class is not None,
    ]
    if sum(given) != 1:
        raise ConfigurationError(
            "exactly one of --targets, --match-max, --fixed-per-class is required"
        )
    dist = stats.class_distribution(real)
    if args.targets:
        table = _load_json_file(args.targets)
        if not isinstance(table, dict):
            raise ConfigurationError("--targets file must map class name to count")
        resolved = {}
        for name, count in table.items():
            if name not in name_to_id:
                raise ConfigurationError(f"--targets names unknown class {name!r}")
            resolved[name_to_id[name]] = int(count)
        return hybrid.balance_targets(dist, hybrid.Manual(resolved))
    if args.match_max:
        return hybrid.balance_targets(dist, hybrid.MatchMax())
    classes = _split_csv(_need(args.classes, "--classes"))
    ids = []
    for name in classes:
        if name not in name_to_id:
            raise ConfigurationError(f"--classes names unknown class {name!r}")
        ids.append(name_to_id[name])
    return hybrid.balance_targets(
        dist, hybrid.FixedPerClass(args.fixed_per_class, tuple(ids))
    )


def cmd_mix(args) -> int:
    real = load_manifest_file(_need(args.real, "--real"))
    synth = load_manifest_file(_need(args.synth, "--synth"))
    seed = _need(args.seed, "--seed")
    targets = _resolve_targets(args, real)
    merged = hybrid.mix(real, synth, targets, seed)
    out_dir = Path(args.out_dir)
    save_manifest(merged, out_dir)
    write_atomic(
        out_dir / "provenance_summary.json",
        _dumps(hybrid.provenance_summary(merged)),
    )
    log.info("hybrid manifest (%d entries) written to %s", len(merged.entries), out_dir)
    return 0


def cmd_remap(args) -> int:
    manifest = load_manifest_file(_need(args.manifest, "--manifest"))
    crops_doc = _load_json_file(_need(args.crops, "--crops"))
    if not isinstance(crops_doc, dict):
        raise ConfigurationError("--crops file must map image id to [x0, y0, w, h]")
    by_id = entries_by_id(manifest)
    crops: dict[str, PixelRect] = {}
    for image_id, rect in crops_doc.items():
        if image_id not in by_id:
            raise ValidationError(f"crops reference unknown image id '{image_id}'")
        if not (isinstance(rect, list) and len(rect) == 4):
            raise ConfigurationError(f"crop for '{image_id}' must be [x0, y0, w, h]")
        x0, y0, w, h = (float(v) for v in rect)
        if w != int(w) or h != int(h) or w < 1 or h < 1:
            raise ConfigurationError(
                f"crop for '{image_id}': width and height must be positive integers"
            )
        crops[image_id] = PixelRect(x0, y0, w, h)

    entries = []
    for entry in manifest.entries:
        rect = crops.get(entry.id)
        if rect is None:
            entries.append(entry)
            continue
        kept = []
        for ann in entry.annotations:
            box = remap_crop(
                ann.box, entry.width_px, entry.height_px, rect, args.min_visible
            )
            if box is not None:
                kept.append(replace(ann, box=box))
        entries.append(
            replace(
                entry,
                width_px=int(rect.w),
                height_px=int(rect.h),
                annotations=tuple(kept),
            )
        )
    out = DatasetManifest(manifest.class_names, tuple(entries))
    save_manifest(out, Path(args.out_dir))
    log.info("remapped manifest written to %s", args.out_dir)
    return 0


def _parse_center(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    parts = _split_csv(text)
    if len(parts) != 2:
        raise ConfigurationError(f"--center must be 'fx,fy', got {text!r}")
    return float(parts[0]), float(parts[1])


def cmd_augment(args) -> int:
    kind = _need(args.kind, "--kind")
    manifest = load_manifest_file(_need(args.manifest, "--manifest"))
    seed = _need(args.seed, "--seed")
    by_id = entries_by_id(manifest)
    ids = _split_csv(_need(args.ids, "--ids"))
    for image_id in ids:
        if image_id not in by_id:
            raise ValidationError(f"unknown image id '{image_id}'")
    if kind == "mosaic":
        plan = aug.mosaic_labels(
            [by_id[i] for i in ids],
            args.output_size,
            seed,
            center=_parse_center(args.center),
            min_area=args.min_area,
        )
        doc = aug.mosaic_plan_to_dict(plan)
    elif kind == "mixup":
        if len(ids) != 2:
            raise ConfigurationError(f"mixup needs exactly 2 ids, got {len(ids)}")
        lam = args.lam if args.lam is not None else aug.draw_mixup_lambda(
            seed, args.alpha
        )
        doc = aug.mixup_plan_to_dict(aug.mixup_labels(by_id[ids[0]], by_id[ids[1]], lam))
    else:
        raise ConfigurationError(f"unknown augmentation kind {kind!r}")
    write_atomic(args.out, _dumps(doc))
    log.info("%s plan written to %s", kind, args.out)
    return 0


def cmd_eval_det(args) -> int:
    gt = load_manifest_file(_need(args.gt, "--gt"))
    dets_path = Path(_need(args.dets, "--dets"))
    dets = eval_det.parse_detections_jsonl(
        dets_path.read_text(encoding="utf-8"), gt.n_classes
    )
    thresholds = (
        tuple(float(t) for t in _split_csv(args.thresholds))
        if args.thresholds
        else eval_det.DEFAULT_THRESHOLDS
    )
    report = eval_det.map_range(dets, gt, thresholds)
    doc = eval_det.report_to_dict(report, include_curves=not args.no_curves)
    write_atomic(args.out, _dumps(doc))
    log.info("detection report written to %s", args.out)
    if args.table:
        sys.stdout.write(eval_det.format_report_table(report, percent=args.percent))
    return 0


def cmd_eval_gen(args) -> int:
    doc: dict = {}
    if args.real_features or args.gen_features:
        real = eval_gen.load_matrix(_need(args.real_features, "--real-features"))
        gen = eval_gen.load_matrix(_need(args.gen_features, "--gen-features"))
        result = eval_gen.fid_details(
            eval_gen.gaussian_stats(real), eval_gen.gaussian_stats(gen)
        )
        doc["fid"] = result.score
        if result.clamped:
            doc["fid_clamped"] = True
    if args.probs:
        probs = eval_gen.load_matrix(args.probs)
        if args.splits > 1 and args.seed is None:
            raise ConfigurationError("--seed is required when --splits > 1")
        mean, std = eval_gen.inception_score(
            probs, args.splits, args.seed if args.seed is not None else 0
        )
        doc["is_mean"] = mean
        doc["is_std"] = std
    if args.img_emb or args.txt_emb:
        img = eval_gen.load_matrix(_need(args.img_emb, "--img-emb"))
        txt = eval_gen.load_matrix(_need(args.txt_emb, "--txt-emb"))
        doc["clip_score"] = eval_gen.clip_score(img, txt, args.clip_scale)
    if not doc:
        raise ConfigurationError(
            "no metric inputs given (use --real-features/--gen-features, "
            "--probs, or --img-emb/--txt-emb)"
        )
    write_atomic(args.out, _dumps(doc))
    log.info("generative metrics written to %s", args.out)
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file of defaults mirroring the flags")
    sub.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="longtail",
        description="Long-tail dataset analysis, sampling plans, and evaluation",
    )
    subparsers = parser.add_subparsers(dest="command")
    subs: dict[str, argparse.ArgumentParser] = {}

    p = subs["analyze"] = subparsers.add_parser(
        "analyze", help="class-distribution report for a manifest"
    )
    p.add_argument("--manifest")
    p.add_argument("--out", default="analysis.json")
    p.add_argument("--table", action="store_true", help="also print a text table")
    p.set_defaults(func=cmd_analyze)

    p = subs["plan"] = subparsers.add_parser(
        "plan", help="generate a seeded epoch plan"
    )
    p.add_argument("--strategy", choices=["baseline", "rfs", "cas"])
    p.add_argument("--manifest")
    p.add_argument("--batch", type=int, help="batch size")
    p.add_argument("--seed", type=int)
    p.add_argument("--epoch-length", type=int, help="slots for cas (default: dataset size)")
    p.add_argument("--rfs-t", type=float, default=sampling.DEFAULT_RFS_THRESHOLD)
    p.add_argument(
        "--rfs-rounding",
        choices=[sampling.ROUNDING_STOCHASTIC, sampling.ROUNDING_CEIL],
        default=sampling.ROUNDING_STOCHASTIC,
    )
    p.add_argument("--out", default="plan.json")
    p.set_defaults(func=cmd_plan)

    p = subs["mix"] = subparsers.add_parser(
        "mix", help="inject synthetic images into a real manifest"
    )
    p.add_argument("--real")
    p.add_argument("--synth")
    p.add_argument("--seed", type=int)
    p.add_argument("--targets", help="JSON file mapping class name to count")
    p.add_argument("--match-max", action="store_true")
    p.add_argument("--fixed-per-class", type=int)
    p.add_argument("--classes", help="comma-separated class names for --fixed-per-class")
    p.add_argument("--out-dir", default="hybrid")
    p.set_defaults(func=cmd_mix)

    p = subs["remap"] = subparsers.add_parser(
        "remap", help="crop images and remap their boxes"
    )
    p.add_argument("--manifest")
    p.add_argument("--crops", help="JSON file mapping image id to [x0, y0, w, h]")
    p.add_argument("--min-visible", type=float, default=0.25)
    p.add_argument("--out-dir", default="remapped")
    p.set_defaults(func=cmd_remap)

    p = subs["augment"] = subparsers.add_parser(
        "augment", help="emit a mosaic or mixup compositing plan"
    )
    p.add_argument("--kind", choices=["mosaic", "mixup"])
    p.add_argument("--manifest")
    p.add_argument("--ids", help="comma-separated image ids (4 for mosaic, 2 for mixup)")
    p.add_argument("--seed", type=int)
    p.add_argument("--output-size", type=int, default=640)
    p.add_argument("--center", help="mosaic center 'fx,fy' (default: seeded jitter)")
    p.add_argument("--min-area", type=float, default=aug.DEFAULT_MIN_AREA)
    p.add_argument("--lam", type=float, help="mixup lambda (default: seeded Beta draw)")
    p.add_argument("--alpha", type=float, default=aug.DEFAULT_MIXUP_ALPHA)
    p.add_argument("--out", default="augment_plan.json")
    p.set_defaults(func=cmd_augment)

    p = subs["eval-det"] = subparsers.add_parser(
        "eval-det", help="detection metrics from a manifest and detections"
    )
    p.add_argument("--gt", help="ground-truth manifest JSON")
    p.add_argument("--dets", help="detections JSONL")
    p.add_argument("--thresholds", help="comma-separated IoU thresholds")
    p.add_argument("--out", default="det_report.json")
    p.add_argument("--no-curves", action="store_true")
    p.add_argument("--table", action="store_true")
    p.add_argument("--percent", action="store_true")
    p.set_defaults(func=cmd_eval_det)

    p = subs["eval-gen"] = subparsers.add_parser(
        "eval-gen", help="FID / IS / CLIP score from matrices"
    )
    p.add_argument("--real-features")
    p.add_argument("--gen-features")
    p.add_argument("--probs")
    p.add_argument("--img-emb")
    p.add_argument("--txt-emb")
    p.add_argument("--splits", type=int, default=1)
    p.add_argument("--clip-scale", choices=sorted(eval_gen.CLIP_SCALES), default="hundred")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="gen_report.json")
    p.set_defaults(func=cmd_eval_gen)

    for sub in subs.values():
        _add_common(sub)
    return parser, subs


def _apply_config(
    argv: list[str],
    command: str,
    config_path: str,
    parser: argparse.ArgumentParser,
    subs: dict[str, argparse.ArgumentParser],
) -> argparse.Namespace:
    """Re-parse with config values installed as defaults; flags win."""
    sub = subs[command]
    config = _load_json_file(config_path)
    if not isinstance(config, dict):
        raise ConfigurationError(f"{config_path}: config must be a JSON object")
    allowed = {a.dest for a in sub._actions if a.dest != "help"}
    unknown = set(config) - allowed
    if unknown:
        raise ConfigurationError(f"{config_path}: unknown config keys {sorted(unknown)}")
    sub.set_defaults(**config)
    return parser.parse_args(argv)


def dispatch(argv: list[str]) -> int:
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.config:
            args = _apply_config(argv, args.command, args.config, parser, subs)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(message)s",
            stream=sys.stderr,
        )
        return args.func(args)
    except LongtailError as exc:
        sys.stderr.write(
            json.dumps(
                {"error": {"type": type(exc).__name__, "message": str(exc)}}
            )
            + "\n"
        )
        return 1
    except OSError as exc:
        sys.stderr.write(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}})
            + "\n"
        )
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
