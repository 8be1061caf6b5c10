"""Seeded epoch-plan generators: baseline shuffle, repeat-factor, class-aware.

All three planners are pure functions of (manifest, parameters, seed); the
same inputs always give byte-identical plans. Randomness comes from the
splitmix64 generator documented in :mod:`longtail.rng`, with one stream per
plan and a fixed draw order per strategy:

  baseline   Fisher-Yates over the entry list (one draw per swap, from the
             top index down).
  cas        per slot: one draw for the class, one draw for an image from
             that class's list (uniform, with replacement). Class lists are
             the manifest's entry order filtered per class.
  rfs        stochastic rounding mode: one uniform per entry, in manifest
             order, deciding the extra copy; then Fisher-Yates over the
             replicated list with the same stream. Ceiling mode skips the
             per-entry draws.

Slots are grouped into batches of ``batch_size`` in stream order; only the
final batch may be short. Class-draw order inside a batch is kept as drawn.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from longtail import kernels
from longtail.dataset import DatasetManifest
from longtail.errors import ConfigurationError, ParseError, ValidationError
from longtail.stats import class_distribution

STRATEGY_BASELINE = "baseline"
STRATEGY_RFS = "rfs"
STRATEGY_CAS = "cas"

DEFAULT_RFS_THRESHOLD = 0.01

ROUNDING_STOCHASTIC = "stochastic"
ROUNDING_CEIL = "ceil"


@dataclass(frozen=True)
class EpochPlan:
    strategy: str
    seed: int
    batch_size: int
    batches: tuple[tuple[str, ...], ...]

    @property
    def epoch_length(self) -> int:
        return sum(len(b) for b in self.batches)

    def image_ids(self) -> list[str]:
        return [i for batch in self.batches for i in batch]


@dataclass(frozen=True)
class RepeatFactorTable:
    """r(c) per class and r(I) per entry; both are >= 1.

    Classes present in no image get factor 1.0 (they cannot influence any
    entry). An entry's factor is the max over the classes it contains, 1.0
    when it has no annotations.
    """

    class_factors: tuple[float, ...]
    image_factors: tuple[float, ...]


def repeat_factor(f_c: float, t: float) -> float:
    """max(1, sqrt(t / f_c)) for an image frequency f_c and threshold t."""
    if f_c <= 0.0:
        raise ConfigurationError(
            f"repeat factor undefined for frequency {f_c!r} (class has no images?)"
        )
    if not 0.0 < f_c <= 1.0:
        raise ConfigurationError(f"frequency must be in (0, 1], got {f_c!r}")
    if not 0.0 < t <= 1.0:
        raise ConfigurationError(f"threshold must be in (0, 1], got {t!r}")
    return max(1.0, math.sqrt(t / f_c))


def repeat_factor_table(manifest: DatasetManifest, t: float) -> RepeatFactorTable:
    dist = class_distribution(manifest)
    if dist.total_images == 0:
        raise ConfigurationError("cannot build repeat factors for an empty manifest")
    class_factors = tuple(
        repeat_factor(dist.image_counts[c] / dist.total_images, t)
        if dist.image_counts[c] > 0
        else 1.0
        for c in range(dist.n_classes)
    )
    image_factors = tuple(
        max((class_factors[c] for c in entry.class_ids()), default=1.0)
        for entry in manifest.entries
    )
    return RepeatFactorTable(class_factors, image_factors)


def _chunk(ids: Sequence[str], batch_size: int) -> tuple[tuple[str, ...], ...]:
    return tuple(
        tuple(ids[i : i + batch_size]) for i in range(0, len(ids), batch_size)
    )


def _check_batch_size(batch_size: int) -> None:
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")


def baseline_plan(
    manifest: DatasetManifest, batch_size: int, seed: int
) -> EpochPlan:
    """Seeded uniform permutation of all entry ids, chunked into batches."""
    _check_batch_size(batch_size)
    if not manifest.entries:
        raise ConfigurationError("cannot plan over an empty manifest")
    order = kernels.permutation(kernels.as_seed(seed), len(manifest.entries))
    ids = [manifest.entries[i].id for i in order]
    return EpochPlan(STRATEGY_BASELINE, seed, batch_size, _chunk(ids, batch_size))


def cas_plan(
    manifest: DatasetManifest,
    batch_size: int,
    seed: int,
    epoch_length: int | None = None,
) -> EpochPlan:
    """Class-aware plan: every slot draws a class uniformly, then an image
    containing that class, so each class gets the same expected share of
    slots regardless of its prevalence.

    epoch_length defaults to the manifest size. A class present in no image
    makes uniform class exposure impossible and is a configuration error.
    """
    _check_batch_size(batch_size)
    if epoch_length is None:
        epoch_length = len(manifest.entries)
    if epoch_length < 1:
        raise ConfigurationError(f"epoch_length must be >= 1, got {epoch_length}")

    members: list[list[int]] = [[] for _ in range(manifest.n_classes)]
    for i, entry in enumerate(manifest.entries):
        for c in sorted(entry.class_ids()):
            members[c].append(i)
    for c, imgs in enumerate(members):
        if not imgs:
            raise ConfigurationError(
                f"class '{manifest.class_names[c]}' has no images; "
                "class-aware sampling cannot give it equal opportunity"
            )

    offsets = np.zeros(manifest.n_classes + 1, dtype=np.int64)
    for c, imgs in enumerate(members):
        offsets[c + 1] = offsets[c] + len(imgs)
    flat = np.fromiter(
        (i for imgs in members for i in imgs), dtype=np.int64, count=int(offsets[-1])
    )
    slots = kernels.cas_slots(kernels.as_seed(seed), epoch_length, offsets, flat)
    ids = [manifest.entries[i].id for i in slots]
    return EpochPlan(STRATEGY_CAS, seed, batch_size, _chunk(ids, batch_size))


def rfs_plan(
    manifest: DatasetManifest,
    t: float,
    batch_size: int,
    seed: int,
    rounding: str = ROUNDING_STOCHASTIC,
) -> EpochPlan:
    """Repeat-factor plan: every image is replicated by its factor
    r(I) = max over contained classes of max(1, sqrt(t / f(c))), fractional
    parts resolved by seeded stochastic rounding (or always up in ceiling
    mode), then the replicated list is shuffled and chunked.

    With t <= min_c f(c) every factor clamps to 1 and the plan is a
    permutation of the manifest.
    """
    _check_batch_size(batch_size)
    if rounding not in (ROUNDING_STOCHASTIC, ROUNDING_CEIL):
        raise ConfigurationError(f"unknown rounding mode {rounding!r}")
    if not manifest.entries:
        raise ConfigurationError("cannot plan over an empty manifest")
    table = repeat_factor_table(manifest, t)
    factors = np.asarray(table.image_factors, dtype=np.float64)
    order = kernels.rfs_replicate(
        kernels.as_seed(seed), factors, rounding == ROUNDING_CEIL
    )
    ids = [manifest.entries[i].id for i in order]
    return EpochPlan(STRATEGY_RFS, seed, batch_size, _chunk(ids, batch_size))


def plan_to_json(plan: EpochPlan) -> str:
    """Serialize to the shareable plan-file schema."""
    doc = {
        "strategy": plan.strategy,
        "seed": plan.seed,
        "batch_size": plan.batch_size,
        "batches": [list(batch) for batch in plan.batches],
    }
    return json.dumps(doc, indent=2) + "\n"


def plan_from_json(text: str) -> EpochPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"plan is not valid JSON: {exc}") from None
    try:
        return EpochPlan(
            strategy=str(doc["strategy"]),
            seed=int(doc["seed"]),
            batch_size=int(doc["batch_size"]),
            batches=tuple(tuple(str(i) for i in b) for b in doc["batches"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"plan file missing or malformed field: {exc}") from None
