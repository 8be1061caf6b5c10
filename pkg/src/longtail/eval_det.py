"""Detection evaluation: greedy matching, 101-point AP, mAP over IoU range.

Conventions (fixed so results are comparable with the common COCO-style
tooling): detections are processed in descending confidence with ties
broken by stable input order; each detection matches the unmatched ground
truth of its image with the highest IoU at or above the threshold; per-class
AP is the mean of the monotone (right-to-left max) interpolated precision
sampled at the 101 recall points 0.00, 0.01, ..., 1.00; the headline score
averages per-class AP over the IoU thresholds 0.50 to 0.95 in steps of 0.05
and then over all classes that have ground truth. Classes with neither
ground truth nor detections are reported absent and excluded from the mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from longtail import kernels
from longtail.dataset import Annotation, DatasetManifest, NormBox
from longtail.errors import (
    ConfigurationError,
    EmptyDatasetError,
    ParseError,
    ValidationError,
)

DEFAULT_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
RECALL_GRID = np.arange(101) / 100.0


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    box: NormBox
    confidence: float


@dataclass(frozen=True)
class ClassResult:
    class_id: int
    name: str
    n_gt: int
    ap_by_threshold: tuple[float, ...] | None
    ap50_95: float | None
    precision_curves: tuple[tuple[float, ...], ...] | None

    @property
    def absent(self) -> bool:
        return self.ap50_95 is None


@dataclass(frozen=True)
class DetEvalReport:
    class_names: tuple[str, ...]
    thresholds: tuple[float, ...]
    per_class: tuple[ClassResult, ...]
    map50_95: float


def parse_detections_jsonl(text: str, n_classes: int) -> list[Detection]:
    """One detection per line: {"image_id","class_id","cx","cy","w","h","conf"}."""
    out: list[Detection] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc})") from None
        try:
            det = Detection(
                image_id=str(doc["image_id"]),
                class_id=int(doc["class_id"]),
                box=NormBox(
                    float(doc["cx"]), float(doc["cy"]),
                    float(doc["w"]), float(doc["h"]),
                ),
                confidence=float(doc["conf"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"line {lineno}: missing or malformed field ({exc})") from None
        if not 0 <= det.class_id < n_classes:
            raise ValidationError(
                f"line {lineno}: class id {det.class_id} out of range"
            )
        if not 0.0 <= det.confidence <= 1.0:
            raise ValidationError(
                f"line {lineno}: confidence {det.confidence} outside [0, 1]"
            )
        out.append(det)
    return out


def _corner_rows(boxes: Iterable[NormBox]) -> np.ndarray:
    rows = [b.corners() for b in boxes]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), 4)


def match_detections(
    dets: Sequence[Detection],
    gts_by_image: Mapping[str, Sequence[Annotation]],
    class_id: int,
    iou_t: float,
) -> tuple[list[tuple[float, bool]], int]:
    """Greedy confidence-ordered matching for one class at one threshold.

    Returns ((confidence, is_tp) per detection, sorted by descending
    confidence with stable ties, and the ground-truth count). Each ground
    truth matches at most once; a detection is a true positive when some
    unmatched same-image ground truth reaches IoU >= iou_t, taking the
    highest-IoU candidate (first listed on exact ties).
    """
    if not 0.0 < iou_t <= 1.0:
        raise ConfigurationError(f"iou threshold must be in (0, 1], got {iou_t}")
    class_dets = [d for d in dets if d.class_id == class_id]
    gt_items = [
        (image_id, ann.box)
        for image_id, anns in gts_by_image.items()
        for ann in anns
        if ann.class_id == class_id
    ]
    n_gt = len(gt_items)
    if not class_dets:
        return [], n_gt

    image_ids = sorted(
        {d.image_id for d in class_dets} | {img for img, _ in gt_items}
    )
    index = {img: i for i, img in enumerate(image_ids)}

    conf = np.asarray([d.confidence for d in class_dets])
    order = np.argsort(-conf, kind="stable")
    det_img = np.asarray([index[class_dets[i].image_id] for i in order], dtype=np.int64)
    det_boxes = _corner_rows([class_dets[i].box for i in order])

    offsets = np.zeros(len(image_ids) + 1, dtype=np.int64)
    grouped: list[NormBox] = []
    for i, img in enumerate(image_ids):
        boxes = [b for g, b in gt_items if g == img]
        grouped.extend(boxes)
        offsets[i + 1] = offsets[i] + len(boxes)
    gt_boxes = _corner_rows(grouped)

    tp = kernels.match_greedy(det_img, det_boxes, offsets, gt_boxes, float(iou_t))
    flags = [(float(conf[i]), bool(t)) for i, t in zip(order, tp)]
    return flags, n_gt


def _interpolated_curve(flags: Sequence[tuple[float, bool]], n_gt: int) -> np.ndarray:
    """Monotone interpolated precision sampled on RECALL_GRID."""
    if not flags:
        return np.zeros(len(RECALL_GRID))
    conf = np.asarray([c for c, _ in flags])
    order = np.argsort(-conf, kind="stable")
    tp_flags = np.asarray([flags[i][1] for i in order], dtype=np.float64)
    tp = np.cumsum(tp_flags)
    fp = np.cumsum(1.0 - tp_flags)
    recall = tp / n_gt
    precision = tp / (tp + fp)
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_GRID, side="left")
    curve = np.zeros(len(RECALL_GRID))
    hit = idx < len(recall)
    curve[hit] = interp[idx[hit]]
    return curve


def average_precision(
    flags: Sequence[tuple[float, bool]], n_gt: int
) -> float | None:
    """AP from (confidence, is_tp) pairs.

    0.0 when nothing was detected for existing ground truth, or when
    detections exist with no ground truth; None ("absent") when there is
    neither ground truth nor any detection.
    """
    if n_gt < 0:
        raise ConfigurationError(f"n_gt must be >= 0, got {n_gt}")
    if n_gt == 0:
        return 0.0 if flags else None
    return float(_interpolated_curve(flags, n_gt).mean())


def map_range(
    dets: Sequence[Detection],
    gt: DatasetManifest,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> DetEvalReport:
    """Per-class AP at every threshold plus the cross-class mean."""
    if not thresholds:
        raise ConfigurationError("thresholds must be non-empty")
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ConfigurationError(f"iou threshold must be in (0, 1], got {t}")
    for d in dets:
        if not 0 <= d.class_id < gt.n_classes:
            raise ValidationError(f"detection class id {d.class_id} out of range")

    gts_by_image: dict[str, list[Annotation]] = {
        e.id: list(e.annotations) for e in gt.entries
    }
    if not any(gts_by_image.values()):
        raise EmptyDatasetError("ground truth contains no annotations")

    results: list[ClassResult] = []
    with_gt: list[float] = []
    for c in range(gt.n_classes):
        has_dets = any(d.class_id == c for d in dets)
        n_gt = sum(
            1 for anns in gts_by_image.values() for a in anns if a.class_id == c
        )
        if n_gt == 0 and not has_dets:
            results.append(ClassResult(c, gt.class_names[c], 0, None, None, None))
            continue
        aps: list[float] = []
        curves: list[tuple[float, ...]] = []
        for t in thresholds:
            flags, _ = match_detections(dets, gts_by_image, c, t)
            if n_gt == 0:
                aps.append(0.0)
                curves.append(tuple(np.zeros(len(RECALL_GRID))))
            else:
                curve = _interpolated_curve(flags, n_gt)
                aps.append(float(curve.mean()))
                curves.append(tuple(curve))
        ap50_95 = float(np.mean(aps))
        results.append(
            ClassResult(
                c, gt.class_names[c], n_gt, tuple(aps), ap50_95, tuple(curves)
            )
        )
        if n_gt > 0:
            with_gt.append(ap50_95)

    return DetEvalReport(
        class_names=gt.class_names,
        thresholds=tuple(float(t) for t in thresholds),
        per_class=tuple(results),
        map50_95=float(np.mean(with_gt)),
    )


def report_to_dict(report: DetEvalReport, include_curves: bool = True) -> dict:
    classes = []
    for r in report.per_class:
        item = {
            "class_id": r.class_id,
            "name": r.name,
            "n_gt": r.n_gt,
            "ap_by_threshold": list(r.ap_by_threshold) if r.ap_by_threshold else None,
            "ap50_95": r.ap50_95,
        }
        if include_curves:
            item["precision_curves"] = (
                [list(c) for c in r.precision_curves] if r.precision_curves else None
            )
        classes.append(item)
    doc = {
        "thresholds": list(report.thresholds),
        "map50_95": report.map50_95,
        "classes": classes,
    }
    if include_curves:
        doc["recall_grid"] = list(RECALL_GRID)
    return doc


def _fmt(value: float | None, percent: bool) -> str:
    if value is None:
        return "-"
    if percent:
        text = f"{value * 100:.1f}"
        return text[:-2] if text.endswith(".0") else text
    return f"{value:.4f}"


def format_report_table(report: DetEvalReport, percent: bool = False) -> str:
    """Aligned table: one row per class plus an all-classes row."""
    thresholds = report.thresholds
    cols = ["class"]
    extra_idx: list[int] = []
    for wanted in (0.50, 0.75):
        if wanted in thresholds:
            extra_idx.append(thresholds.index(wanted))
            cols.append(f"AP{int(wanted * 100)}")
    cols.append("AP50-95")

    def row_values(aps: tuple[float, ...] | None, mean: float | None) -> list[str]:
        vals = []
        for i in extra_idx:
            vals.append(_fmt(aps[i] if aps else None, percent))
        vals.append(_fmt(mean, percent))
        return vals

    # all-classes per-threshold means cover the same classes as map50_95
    scored = [r for r in report.per_class if r.n_gt > 0 and r.ap_by_threshold]
    mean_aps = (
        tuple(
            float(np.mean([r.ap_by_threshold[i] for r in scored]))
            for i in range(len(thresholds))
        )
        if scored
        else None
    )
    rows = [["All classes", *row_values(mean_aps, report.map50_95)]]
    for r in report.per_class:
        rows.append([r.name, *row_values(r.ap_by_threshold, r.ap50_95)])

    widths = [max(len(cols[i]), *(len(row[i]) for row in rows)) for i in range(len(cols))]
    lines = ["  ".join(c.ljust(widths[i]) for i, c in enumerate(cols))]
    for row in rows:
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(row)))
    return "\n".join(lines) + "\n"
