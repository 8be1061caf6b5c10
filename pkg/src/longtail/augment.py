"""Label-space mosaic and mixup: compositing plans plus merged annotations.

Pixel blending is deliberately not performed here. A plan records where each
source image goes (placement rects and scale factors) and what the merged
label set is; any image tool can execute the pixel side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from scipy.special import betaincinv

from longtail.dataset import Annotation, ImageEntry, NormBox
from longtail.errors import ConfigurationError
from longtail.geometry import PixelRect
from longtail.rng import SplitMix64

CENTER_JITTER_LO = 0.25
CENTER_JITTER_HI = 0.75
DEFAULT_MIN_AREA = 0.10
DEFAULT_MIXUP_ALPHA = 32.0


@dataclass(frozen=True)
class Placement:
    source_id: str
    target: PixelRect
    scale_x: float
    scale_y: float


@dataclass(frozen=True)
class MosaicPlan:
    output_size: int
    center: tuple[float, float]
    placements: tuple[Placement, ...]
    annotations: tuple[Annotation, ...]


@dataclass(frozen=True)
class WeightedAnnotation:
    annotation: Annotation
    weight: float


@dataclass(frozen=True)
class MixupPlan:
    source_ids: tuple[str, str]
    lam: float
    annotations: tuple[WeightedAnnotation, ...]


def mosaic_labels(
    entries: Sequence[ImageEntry],
    output_size: int,
    seed: int,
    center: tuple[float, float] | None = None,
    min_area: float = DEFAULT_MIN_AREA,
) -> MosaicPlan:
    """Tile four images into one output and merge their annotations.

    The output square is split at ``center`` (fractions of output_size,
    drawn uniformly from [0.25, 0.75]^2 when not given: x first, then y);
    the four sources are affinely scaled to fill top-left, top-right,
    bottom-left, bottom-right in entry order. Each box is mapped by the
    same scale+offset, clipped to its quadrant, and dropped when the
    remaining fraction of its mapped area is below ``min_area`` (boxes
    retaining zero area are always dropped).
    """
    if len(entries) != 4:
        raise ConfigurationError(f"mosaic needs exactly 4 entries, got {len(entries)}")
    if output_size < 1:
        raise ConfigurationError(f"output_size must be >= 1, got {output_size}")
    if not 0.0 <= min_area < 1.0:
        raise ConfigurationError(f"min_area must be in [0, 1), got {min_area}")
    if center is None:
        rng = SplitMix64(seed)
        span = CENTER_JITTER_HI - CENTER_JITTER_LO
        fx = CENTER_JITTER_LO + span * rng.next_float()
        fy = CENTER_JITTER_LO + span * rng.next_float()
    else:
        fx, fy = center
        if not (
            CENTER_JITTER_LO <= fx <= CENTER_JITTER_HI
            and CENTER_JITTER_LO <= fy <= CENTER_JITTER_HI
        ):
            raise ConfigurationError(
                f"center {center} outside [{CENTER_JITTER_LO}, {CENTER_JITTER_HI}]^2"
            )

    s = float(output_size)
    cx_px, cy_px = fx * s, fy * s
    quadrants = (
        PixelRect(0.0, 0.0, cx_px, cy_px),
        PixelRect(cx_px, 0.0, s - cx_px, cy_px),
        PixelRect(0.0, cy_px, cx_px, s - cy_px),
        PixelRect(cx_px, cy_px, s - cx_px, s - cy_px),
    )
    for q in quadrants:
        if q.w <= 0.0 or q.h <= 0.0:
            raise ConfigurationError(f"degenerate quadrant {q}")

    placements = tuple(
        Placement(
            source_id=e.id,
            target=q,
            scale_x=q.w / e.width_px,
            scale_y=q.h / e.height_px,
        )
        for e, q in zip(entries, quadrants)
    )

    merged: list[Annotation] = []
    for entry, q in zip(entries, quadrants):
        # quadrant bounds in output-normalized coordinates, clamped so a
        # division ulp can never push a clipped box outside [0, 1]
        qx0, qx1 = max(q.x0 / s, 0.0), min(q.x1 / s, 1.0)
        qy0, qy1 = max(q.y0 / s, 0.0), min(q.y1 / s, 1.0)
        for ann in entry.annotations:
            x0, y0, x1, y1 = ann.box.corners()
            # source-normalized -> output-normalized (scale into quadrant, offset)
            ox0 = qx0 + x0 * (q.w / s)
            ox1 = qx0 + x1 * (q.w / s)
            oy0 = qy0 + y0 * (q.h / s)
            oy1 = qy0 + y1 * (q.h / s)
            full = (ox1 - ox0) * (oy1 - oy0)
            kx0, kx1 = max(ox0, qx0), min(ox1, qx1)
            ky0, ky1 = max(oy0, qy0), min(oy1, qy1)
            if kx1 <= kx0 or ky1 <= ky0:
                continue
            kept = (kx1 - kx0) * (ky1 - ky0)
            if kept / full < min_area:
                continue
            merged.append(
                Annotation(
                    ann.class_id,
                    NormBox(
                        cx=(kx0 + kx1) / 2,
                        cy=(ky0 + ky1) / 2,
                        w=kx1 - kx0,
                        h=ky1 - ky0,
                    ),
                )
            )
    return MosaicPlan(output_size, (fx, fy), placements, tuple(merged))


def mixup_labels(a: ImageEntry, b: ImageEntry, lam: float) -> MixupPlan:
    """Union both label sets; a's boxes weigh lam, b's weigh 1 - lam."""
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"lambda must be in [0, 1], got {lam}")
    weighted = tuple(
        [WeightedAnnotation(ann, lam) for ann in a.annotations]
        + [WeightedAnnotation(ann, 1.0 - lam) for ann in b.annotations]
    )
    return MixupPlan((a.id, b.id), lam, weighted)


def draw_mixup_lambda(seed: int, alpha: float = DEFAULT_MIXUP_ALPHA) -> float:
    """Seeded draw from the symmetric Beta(alpha, alpha) via its inverse CDF
    applied to one splitmix64 uniform."""
    if alpha <= 0.0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    u = SplitMix64(seed).next_float()
    return float(betaincinv(alpha, alpha, u))


def mosaic_plan_to_dict(plan: MosaicPlan) -> dict:
    return {
        "kind": "mosaic",
        "output_size": plan.output_size,
        "center": list(plan.center),
        "placements": [
            {
                "source_id": p.source_id,
                "target": [p.target.x0, p.target.y0, p.target.w, p.target.h],
                "scale_x": p.scale_x,
                "scale_y": p.scale_y,
            }
            for p in plan.placements
        ],
        "annotations": [
            {
                "class_id": a.class_id,
                "cx": a.box.cx,
                "cy": a.box.cy,
                "w": a.box.w,
                "h": a.box.h,
            }
            for a in plan.annotations
        ],
    }


def mixup_plan_to_dict(plan: MixupPlan) -> dict:
    return {
        "kind": "mixup",
        "source_ids": list(plan.source_ids),
        "lambda": plan.lam,
        "annotations": [
            {
                "class_id": wa.annotation.class_id,
                "cx": wa.annotation.box.cx,
                "cy": wa.annotation.box.cy,
                "w": wa.annotation.box.w,
                "h": wa.annotation.box.h,
                "weight": wa.weight,
            }
            for wa in plan.annotations
        ],
    }
