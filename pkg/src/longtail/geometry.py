"""Box arithmetic: IoU, crop remapping, resize bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

from longtail.dataset import NormBox
from longtail.errors import ConfigurationError

DEFAULT_MIN_VISIBLE = 0.25


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned rectangle in pixel coordinates, (x0, y0) top-left."""

    x0: float
    y0: float
    w: float
    h: float

    @property
    def x1(self) -> float:
        return self.x0 + self.w

    @property
    def y1(self) -> float:
        return self.y0 + self.h


def iou(a: NormBox, b: NormBox) -> float:
    """Intersection over union. Both boxes must share one image frame."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    if iw <= 0.0:
        return 0.0
    ih = min(ay1, by1) - max(ay0, by0)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        # degenerate clipped inputs only; unreachable for valid boxes
        return 0.0
    return inter / union


def remap_crop(
    box: NormBox,
    src_w: float,
    src_h: float,
    crop: PixelRect,
    min_visible: float = DEFAULT_MIN_VISIBLE,
) -> NormBox | None:
    """Re-express a box relative to a crop window of its source image.

    The box is converted to pixels, intersected with the crop, and
    renormalized to the crop's dimensions. Returns None ("dropped") when the
    visible fraction of the original box area falls below ``min_visible`` or
    the intersection is degenerate (zero visibility always drops).
    """
    if crop.w <= 0 or crop.h <= 0:
        raise ConfigurationError(f"crop has non-positive size {crop.w}x{crop.h}")
    if crop.x0 < 0 or crop.y0 < 0 or crop.x1 > src_w or crop.y1 > src_h:
        raise ConfigurationError(
            f"crop ({crop.x0}, {crop.y0}, {crop.w}, {crop.h}) lies outside "
            f"the {src_w}x{src_h} source image"
        )
    if not 0.0 <= min_visible <= 1.0:
        raise ConfigurationError(f"min_visible must be in [0, 1], got {min_visible}")

    nx0, ny0, nx1, ny1 = box.corners()
    bx0, bx1 = nx0 * src_w, nx1 * src_w
    by0, by1 = ny0 * src_h, ny1 * src_h

    ix0, ix1 = max(bx0, crop.x0), min(bx1, crop.x1)
    iy0, iy1 = max(by0, crop.y0), min(by1, crop.y1)
    if ix1 <= ix0 or iy1 <= iy0:
        return None
    visible = ((ix1 - ix0) * (iy1 - iy0)) / ((bx1 - bx0) * (by1 - by0))
    if visible < min_visible:
        return None
    # division may overshoot [0, 1] by an ulp; clamp so outputs always
    # satisfy the box invariants
    nx0 = min(max((ix0 - crop.x0) / crop.w, 0.0), 1.0)
    nx1 = min(max((ix1 - crop.x0) / crop.w, 0.0), 1.0)
    ny0 = min(max((iy0 - crop.y0) / crop.h, 0.0), 1.0)
    ny1 = min(max((iy1 - crop.y0) / crop.h, 0.0), 1.0)
    if nx1 <= nx0 or ny1 <= ny0:
        return None
    return NormBox(
        cx=(nx0 + nx1) / 2,
        cy=(ny0 + ny1) / 2,
        w=nx1 - nx0,
        h=ny1 - ny0,
    )


def resize_invariance_check(box: NormBox) -> NormBox:
    """Documented no-op: normalized coordinates are invariant under uniform
    resize, so a resize step needs no box change. Pipelines call this where
    the resize happens so the step is visible in audit trails."""
    return box
