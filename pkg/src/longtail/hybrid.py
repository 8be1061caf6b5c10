"""Hybrid real+synthetic manifest construction for class balancing."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from longtail.dataset import (
    PROVENANCE_SYNTHETIC,
    DatasetManifest,
    ImageEntry,
)
from longtail.errors import ConfigurationError, ShortfallError, ValidationError
from longtail.rng import SplitMix64
from longtail.stats import ClassDistribution

SYNTHETIC_ID_PREFIX = "syn_"


@dataclass(frozen=True)
class BalanceTargets:
    """synth_counts[c] = synthetic images to inject for class c."""

    synth_counts: tuple[int, ...]


@dataclass(frozen=True)
class FixedPerClass:
    """Give each listed class the same fixed number of synthetic images."""

    count: int
    class_ids: tuple[int, ...]


@dataclass(frozen=True)
class MatchMax:
    """Raise every class's instance count up to the current maximum."""


@dataclass(frozen=True)
class Manual:
    """Explicit class id -> count table; listed classes only."""

    table: Mapping[int, int]


def balance_targets(
    dist: ClassDistribution, strategy: FixedPerClass | MatchMax | Manual
) -> BalanceTargets:
    n = dist.n_classes
    counts = [0] * n
    if isinstance(strategy, FixedPerClass):
        if strategy.count < 0:
            raise ConfigurationError(f"count must be >= 0, got {strategy.count}")
        for c in strategy.class_ids:
            if not 0 <= c < n:
                raise ConfigurationError(f"unknown class id {c}")
            counts[c] = strategy.count
    elif isinstance(strategy, MatchMax):
        top = max(dist.instance_counts, default=0)
        counts = [top - dist.instance_counts[c] for c in range(n)]
    elif isinstance(strategy, Manual):
        for c, v in strategy.table.items():
            if not 0 <= c < n:
                raise ConfigurationError(f"unknown class id {c}")
            if v < 0:
                raise ConfigurationError(f"negative target {v} for class {c}")
            counts[c] = v
    else:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    return BalanceTargets(tuple(counts))


def mix(
    real: DatasetManifest,
    synth: DatasetManifest,
    targets: BalanceTargets,
    seed: int,
    id_prefix: str = SYNTHETIC_ID_PREFIX,
) -> DatasetManifest:
    """All real entries plus a seeded per-class sample of synthetic ones.

    For each class (ascending id) with a nonzero target, the candidate pool
    is every synthetic entry containing that class, in manifest order; the
    sample is drawn without replacement from one splitmix64 stream. An entry
    picked for several classes is included once. Synthetic ids get
    ``id_prefix`` so the union stays collision free.
    """
    if real.class_names != synth.class_names:
        raise ConfigurationError(
            "class name lists differ between real and synthetic manifests"
        )
    if len(targets.synth_counts) != real.n_classes:
        raise ConfigurationError(
            f"targets cover {len(targets.synth_counts)} classes, "
            f"manifest has {real.n_classes}"
        )
    for entry in synth.entries:
        if entry.provenance != PROVENANCE_SYNTHETIC:
            raise ValidationError(
                f"entry '{entry.id}' in the synthetic manifest has "
                f"provenance {entry.provenance!r}"
            )

    rng = SplitMix64(seed)
    chosen: dict[str, ImageEntry] = {}
    for c, want in enumerate(targets.synth_counts):
        if want == 0:
            continue
        pool = [e for e in synth.entries if c in e.class_ids()]
        if want > len(pool):
            raise ShortfallError(real.class_names[c], want, len(pool))
        for entry in rng.sample(pool, want):
            chosen.setdefault(entry.id, entry)

    out = list(real.entries)
    taken = {e.id for e in real.entries}
    for entry in synth.entries:  # manifest order, not selection order
        if entry.id not in chosen:
            continue
        new_id = id_prefix + entry.id
        if new_id in taken:
            raise ValidationError(f"prefixed synthetic id '{new_id}' already exists")
        taken.add(new_id)
        out.append(replace(entry, id=new_id))
    return DatasetManifest(real.class_names, tuple(out))


def provenance_summary(manifest: DatasetManifest) -> dict:
    """Image counts per provenance plus per-class instance counts split by
    provenance; the shape of the `mix` command's summary JSON."""
    images: dict[str, int] = {}
    instances: dict[str, dict[str, int]] = {}
    for entry in manifest.entries:
        images[entry.provenance] = images.get(entry.provenance, 0) + 1
        per = instances.setdefault(entry.provenance, {})
        for ann in entry.annotations:
            name = manifest.class_names[ann.class_id]
            per[name] = per.get(name, 0) + 1
    return {"images": images, "instances_per_class": instances}
