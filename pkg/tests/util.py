"""Shared fixture builders for the test suite."""

from __future__ import annotations

from longtail.dataset import Annotation, DatasetManifest, ImageEntry, NormBox


def box(cx, cy, w, h) -> NormBox:
    return NormBox(float(cx), float(cy), float(w), float(h))


def ann(class_id, cx, cy, w, h) -> Annotation:
    return Annotation(class_id, box(cx, cy, w, h))


def entry(entry_id, annotations=(), w=640, h=480, provenance="real") -> ImageEntry:
    return ImageEntry(entry_id, w, h, provenance, tuple(annotations))


def manifest(class_names, entries) -> DatasetManifest:
    return DatasetManifest(tuple(class_names), tuple(entries))


def single_class_entries(prefix, n, class_id, provenance="real"):
    """n entries, each holding one centered annotation of class_id."""
    return [
        entry(f"{prefix}{i}", [ann(class_id, 0.5, 0.5, 0.2, 0.2)], provenance=provenance)
        for i in range(n)
    ]


def skewed_manifest(counts, class_names=None) -> DatasetManifest:
    """One image per instance; counts[c] images contain exactly class c."""
    names = class_names or [f"class_{c}" for c in range(len(counts))]
    entries = []
    for c, n in enumerate(counts):
        entries.extend(single_class_entries(f"c{c}_", n, c))
    return manifest(names, entries)
