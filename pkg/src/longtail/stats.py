"""Class-distribution counting and the long-tail imbalance report."""

from __future__ import annotations

from dataclasses import dataclass

from longtail.dataset import DatasetManifest
from longtail.errors import EmptyDatasetError


@dataclass(frozen=True)
class ClassDistribution:
    """Per-class instance and image counts over one manifest.

    instance_counts[c] is the number of annotations of class c;
    image_counts[c] the number of images containing at least one such
    annotation (so image_counts[c] <= instance_counts[c]).
    """

    instance_counts: tuple[int, ...]
    image_counts: tuple[int, ...]
    total_images: int
    total_instances: int

    @property
    def n_classes(self) -> int:
        return len(self.instance_counts)

    def image_frequency(self, class_id: int) -> float:
        """Fraction of images containing class_id."""
        if self.total_images == 0:
            raise EmptyDatasetError("manifest has no images")
        return self.image_counts[class_id] / self.total_images


@dataclass(frozen=True)
class ClassImbalanceRow:
    class_id: int
    class_name: str
    instance_count: int
    image_count: int
    image_frequency: float


@dataclass(frozen=True)
class ImbalanceReport:
    """Rows sorted by descending instance count (ties by class id)."""

    rows: tuple[ClassImbalanceRow, ...]
    imbalance_ratio: float
    total_images: int
    total_instances: int


def class_distribution(manifest: DatasetManifest) -> ClassDistribution:
    """Exact counts; classes never seen get count 0. Order independent."""
    n = manifest.n_classes
    instances = [0] * n
    images = [0] * n
    total_instances = 0
    for entry in manifest.entries:
        for ann in entry.annotations:
            instances[ann.class_id] += 1
            total_instances += 1
        for c in entry.class_ids():
            images[c] += 1
    return ClassDistribution(
        instance_counts=tuple(instances),
        image_counts=tuple(images),
        total_images=len(manifest.entries),
        total_instances=total_instances,
    )


def imbalance_report(
    dist: ClassDistribution, class_names: tuple[str, ...] | None = None
) -> ImbalanceReport:
    """Summarize the long tail: per-class frequency and the max/min ratio.

    The imbalance ratio divides the largest instance count by the smallest
    nonzero one. Raises EmptyDatasetError when no class has any instance.
    """
    nonzero = [c for c in dist.instance_counts if c > 0]
    if not nonzero:
        raise EmptyDatasetError("distribution has no annotated instances")
    names = class_names or tuple(f"class_{i}" for i in range(dist.n_classes))
    order = sorted(
        range(dist.n_classes), key=lambda c: (-dist.instance_counts[c], c)
    )
    rows = tuple(
        ClassImbalanceRow(
            class_id=c,
            class_name=names[c],
            instance_count=dist.instance_counts[c],
            image_count=dist.image_counts[c],
            image_frequency=dist.image_counts[c] / dist.total_images,
        )
        for c in order
    )
    return ImbalanceReport(
        rows=rows,
        imbalance_ratio=max(nonzero) / min(nonzero),
        total_images=dist.total_images,
        total_instances=dist.total_instances,
    )


def report_to_dict(report: ImbalanceReport) -> dict:
    return {
        "total_images": report.total_images,
        "total_instances": report.total_instances,
        "imbalance_ratio": report.imbalance_ratio,
        "classes": [
            {
                "class_id": r.class_id,
                "name": r.class_name,
                "instance_count": r.instance_count,
                "image_count": r.image_count,
                "image_frequency": r.image_frequency,
            }
            for r in report.rows
        ],
    }


def format_report_table(report: ImbalanceReport) -> str:
    """Aligned-column text rendering of the imbalance report."""
    header = ("class", "instances", "images", "frequency")
    body = [
        (r.class_name, str(r.instance_count), str(r.image_count),
         f"{r.image_frequency:.4f}")
        for r in report.rows
    ]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in body)) for i in range(4)
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for row in body:
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(row)))
    lines.append(f"imbalance ratio: {report.imbalance_ratio:g}")
    return "\n".join(lines) + "\n"
