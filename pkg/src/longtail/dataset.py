"""Dataset model: label-file parsing, manifest I/O, validation.

Label files follow the Darknet text convention: one object per line,
``class_id cx cy w h``, whitespace separated, coordinates normalized to the
image frame with ``(cx, cy)`` the box center. Blank lines and lines whose
first non-blank character is ``#`` are skipped.

The manifest descriptor is JSON::

    {
      "class_names": ["...", ...],
      "entries": [
        {"id": str, "width_px": int, "height_px": int,
         "provenance": "real" | "synthetic", "label_file": str},
        ...
      ]
    }

``label_file`` paths are resolved relative to the descriptor's directory.
All parsed types are immutable; parsing is a pure function of its input
(``float()`` / ``int()`` are used directly, so the decimal separator is
always ``.`` regardless of locale).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from longtail.errors import ParseError, ValidationError

PROVENANCE_REAL = "real"
PROVENANCE_SYNTHETIC = "synthetic"
_PROVENANCE_VALUES = (PROVENANCE_REAL, PROVENANCE_SYNTHETIC)

_LABEL_FIELDS = 5


@dataclass(frozen=True)
class NormBox:
    """Center-format box, coordinates as fractions of the image frame.

    Invariants (checked by parsers and ``validate_manifest``, not by the
    constructor, so that violating fixtures can still be built and reported):
    0 <= cx <= 1, 0 <= cy <= 1, 0 < w <= 1, 0 < h <= 1. Corners cx +- w/2,
    cy +- h/2 may fall outside [0, 1] and are stored unclipped.
    """

    cx: float
    cy: float
    w: float
    h: float

    def corners(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1), unclipped."""
        return (
            self.cx - self.w / 2,
            self.cy - self.h / 2,
            self.cx + self.w / 2,
            self.cy + self.h / 2,
        )

    def area(self) -> float:
        x0, y0, x1, y1 = self.corners()
        return (x1 - x0) * (y1 - y0)

    def violations(self) -> list[str]:
        out = []
        if not 0.0 <= self.cx <= 1.0:
            out.append(f"cx={self.cx!r} outside [0, 1]")
        if not 0.0 <= self.cy <= 1.0:
            out.append(f"cy={self.cy!r} outside [0, 1]")
        if not 0.0 < self.w <= 1.0:
            out.append(f"w={self.w!r} outside (0, 1]")
        if not 0.0 < self.h <= 1.0:
            out.append(f"h={self.h!r} outside (0, 1]")
        return out

    def is_valid(self) -> bool:
        return not self.violations()


@dataclass(frozen=True)
class Annotation:
    class_id: int
    box: NormBox


@dataclass(frozen=True)
class ImageEntry:
    id: str
    width_px: int
    height_px: int
    provenance: str
    annotations: tuple[Annotation, ...]

    def class_ids(self) -> frozenset[int]:
        return frozenset(a.class_id for a in self.annotations)


@dataclass(frozen=True)
class DatasetManifest:
    class_names: tuple[str, ...]
    entries: tuple[ImageEntry, ...]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def entry_ids(self) -> list[str]:
        return [e.id for e in self.entries]


@dataclass(frozen=True)
class Violation:
    entry_id: str | None
    annotation_index: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def parse_label_file(text: str, n_classes: int) -> list[Annotation]:
    """Parse one label file's text into annotations, in file order.

    Raises ParseError (with a 1-based line number) for malformed lines and
    ValidationError for out-of-range class ids or coordinates.
    """
    if n_classes < 1:
        raise ValidationError(f"n_classes must be >= 1, got {n_classes}")
    annotations: list[Annotation] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != _LABEL_FIELDS:
            raise ParseError(
                f"line {lineno}: expected {_LABEL_FIELDS} fields, got {len(fields)}"
            )
        try:
            class_id = int(fields[0])
        except ValueError:
            raise ParseError(
                f"line {lineno}: class id {fields[0]!r} is not an integer"
            ) from None
        try:
            cx, cy, w, h = (float(tok) for tok in fields[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-numeric coordinate ({exc})") from None
        if not 0 <= class_id < n_classes:
            raise ValidationError(
                f"line {lineno}: class id {class_id} out of range "
                f"for {n_classes} classes"
            )
        box = NormBox(cx, cy, w, h)
        problems = box.violations()
        if problems:
            raise ValidationError(f"line {lineno}: {'; '.join(problems)}")
        annotations.append(Annotation(class_id, box))
    return annotations


def format_label_file(annotations: Iterable[Annotation]) -> str:
    """Inverse of parse_label_file; floats use shortest exact round-trip repr."""
    lines = [
        f"{a.class_id} {a.box.cx!r} {a.box.cy!r} {a.box.w!r} {a.box.h!r}"
        for a in annotations
    ]
    return "".join(line + "\n" for line in lines)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def load_manifest(text: str, base_dir: Path | str) -> DatasetManifest:
    """Parse a manifest descriptor and every label file it references."""
    base = Path(base_dir)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), "manifest root must be a JSON object")
    class_names = doc.get("class_names")
    _require(
        isinstance(class_names, list)
        and len(class_names) > 0
        and all(isinstance(c, str) for c in class_names),
        "class_names must be a non-empty list of strings",
    )
    raw_entries = doc.get("entries")
    _require(isinstance(raw_entries, list), "entries must be a list")

    n_classes = len(class_names)
    seen: set[str] = set()
    entries: list[ImageEntry] = []
    for i, item in enumerate(raw_entries):
        _require(isinstance(item, dict), f"entry #{i} must be an object")
        entry_id = item.get("id")
        _require(
            isinstance(entry_id, str) and entry_id != "",
            f"entry #{i}: id must be a non-empty string",
        )
        if entry_id in seen:
            raise ValidationError(f"duplicate entry id '{entry_id}'")
        seen.add(entry_id)
        width = item.get("width_px")
        height = item.get("height_px")
        _require(
            isinstance(width, int) and not isinstance(width, bool) and width >= 1,
            f"entry '{entry_id}': width_px must be a positive integer",
        )
        _require(
            isinstance(height, int) and not isinstance(height, bool) and height >= 1,
            f"entry '{entry_id}': height_px must be a positive integer",
        )
        provenance = item.get("provenance")
        _require(
            provenance in _PROVENANCE_VALUES,
            f"entry '{entry_id}': provenance must be one of {_PROVENANCE_VALUES}",
        )
        label_file = item.get("label_file")
        _require(
            isinstance(label_file, str) and label_file != "",
            f"entry '{entry_id}': label_file must be a non-empty string",
        )
        label_path = base / label_file
        if not label_path.is_file():
            raise ValidationError(
                f"entry '{entry_id}': label file not found: {label_path}"
            )
        try:
            annotations = parse_label_file(
                label_path.read_text(encoding="utf-8"), n_classes
            )
        except (ParseError, ValidationError) as exc:
            raise type(exc)(f"entry '{entry_id}' ({label_file}): {exc}") from None
        entries.append(
            ImageEntry(entry_id, width, height, provenance, tuple(annotations))
        )
    return DatasetManifest(tuple(class_names), tuple(entries))


def load_manifest_file(path: Path | str) -> DatasetManifest:
    p = Path(path)
    return load_manifest(p.read_text(encoding="utf-8"), p.parent)


_SAFE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


def save_manifest(
    manifest: DatasetManifest,
    out_dir: Path | str,
    descriptor_name: str = "manifest.json",
    labels_dirname: str = "labels",
) -> Path:
    """Write a manifest as descriptor JSON plus one label file per entry.

    Label filenames are sanitized entry ids (de-duplicated with a numeric
    suffix when sanitizing collides); the descriptor records the actual
    relative path, so loading it back reproduces the manifest exactly.
    Returns the descriptor path.
    """
    out = Path(out_dir)
    labels_dir = out / labels_dirname
    labels_dir.mkdir(parents=True, exist_ok=True)
    used: set[str] = set()
    items = []
    for entry in manifest.entries:
        stem = _SAFE_CHARS.sub("_", entry.id) or "entry"
        name = f"{stem}.txt"
        k = 2
        while name in used:
            name = f"{stem}-{k}.txt"
            k += 1
        used.add(name)
        rel = f"{labels_dirname}/{name}"
        (labels_dir / name).write_text(
            format_label_file(entry.annotations), encoding="utf-8"
        )
        items.append(
            {
                "id": entry.id,
                "width_px": entry.width_px,
                "height_px": entry.height_px,
                "provenance": entry.provenance,
                "label_file": rel,
            }
        )
    descriptor = {"class_names": list(manifest.class_names), "entries": items}
    path = out / descriptor_name
    path.write_text(json.dumps(descriptor, indent=2) + "\n", encoding="utf-8")
    return path


def validate_manifest(manifest: DatasetManifest) -> ValidationReport:
    """Collect invariant violations as data; never raises."""
    violations: list[Violation] = []
    if not manifest.class_names:
        violations.append(Violation(None, None, "class_names is empty"))
    seen: set[str] = set()
    for entry in manifest.entries:
        if entry.id in seen:
            violations.append(Violation(entry.id, None, "duplicate entry id"))
        seen.add(entry.id)
        if entry.width_px < 1 or entry.height_px < 1:
            violations.append(
                Violation(
                    entry.id,
                    None,
                    f"non-positive dimensions {entry.width_px}x{entry.height_px}",
                )
            )
        if entry.provenance not in _PROVENANCE_VALUES:
            violations.append(
                Violation(entry.id, None, f"unknown provenance {entry.provenance!r}")
            )
        for idx, ann in enumerate(entry.annotations):
            if not 0 <= ann.class_id < max(len(manifest.class_names), 1):
                violations.append(
                    Violation(entry.id, idx, f"class id {ann.class_id} out of range")
                )
            for problem in ann.box.violations():
                violations.append(Violation(entry.id, idx, problem))
            if any(
                not math.isfinite(v)
                for v in (ann.box.cx, ann.box.cy, ann.box.w, ann.box.h)
            ):
                violations.append(Violation(entry.id, idx, "non-finite coordinate"))
    return ValidationReport(tuple(violations))


def entries_by_id(manifest: DatasetManifest) -> Mapping[str, ImageEntry]:
    return {e.id: e for e in manifest.entries}


def annotations_by_image(
    manifest: DatasetManifest, class_id: int | None = None
) -> dict[str, list[Annotation]]:
    """Image id -> annotations, optionally restricted to one class."""
    out: dict[str, list[Annotation]] = {}
    for entry in manifest.entries:
        anns: Sequence[Annotation] = entry.annotations
        if class_id is not None:
            anns = [a for a in anns if a.class_id == class_id]
        out[entry.id] = list(anns)
    return out
