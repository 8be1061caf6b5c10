"""Pure-numpy kernel backend.

Streams are vectorized where the draws are independent (splitmix64 state
after k draws is just seed + k * GAMMA mod 2^64, so any suffix of a stream
can be regenerated from an offset seed). Sequential swap loops remain plain
Python over precomputed draws. Results are bit-identical to the numba
backend and to :class:`longtail.rng.SplitMix64`.
"""

from __future__ import annotations

import numpy as np

from longtail.rng import GAMMA, MASK64, MIX1, MIX2

_U = np.uint64
_TWO_NEG53 = 2.0**-53


def _stream(seed: int, n: int) -> np.ndarray:
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = _U(seed & MASK64) + idx * _U(GAMMA)
    z = (z ^ (z >> _U(30))) * _U(MIX1)
    z = (z ^ (z >> _U(27))) * _U(MIX2)
    return z ^ (z >> _U(31))


def _advance(seed: int, k: int) -> int:
    """Seed equivalent to having consumed k draws already."""
    return (seed + k * GAMMA) & MASK64


def splitmix64_stream(seed, n: int) -> np.ndarray:
    return _stream(int(seed), int(n))


def permutation(seed, n: int) -> np.ndarray:
    n = int(n)
    out = np.arange(n, dtype=np.int64)
    if n < 2:
        return out
    draws = _stream(int(seed), n - 1)
    for k, i in enumerate(range(n - 1, 0, -1)):
        j = int(draws[k]) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def cas_slots(seed, n_slots: int, offsets: np.ndarray, members: np.ndarray) -> np.ndarray:
    n_slots = int(n_slots)
    n_classes = len(offsets) - 1
    draws = _stream(int(seed), 2 * n_slots)
    cls = (draws[0::2] % _U(n_classes)).astype(np.int64)
    spans = (offsets[cls + 1] - offsets[cls]).astype(np.uint64)
    picks = (draws[1::2] % spans).astype(np.int64)
    return members[offsets[cls] + picks]


def rfs_replicate(seed, factors: np.ndarray, ceil_mode: bool) -> np.ndarray:
    seed = int(seed)
    n = len(factors)
    base = np.floor(factors).astype(np.int64)
    frac = factors - base
    if ceil_mode:
        reps = base + (frac > 0.0)
        consumed = 0
    else:
        u = (_stream(seed, n) >> _U(11)).astype(np.float64) * _TWO_NEG53
        reps = base + (u < frac)
        consumed = n
    out = np.repeat(np.arange(n, dtype=np.int64), reps)
    total = len(out)
    if total >= 2:
        draws = _stream(_advance(seed, consumed), total - 1)
        for k, i in enumerate(range(total - 1, 0, -1)):
            j = int(draws[k]) % (i + 1)
            out[i], out[j] = out[j], out[i]
    return out


def _iou_one_to_many(box: np.ndarray, others: np.ndarray) -> np.ndarray:
    iw = np.minimum(box[2], others[:, 2]) - np.maximum(box[0], others[:, 0])
    ih = np.minimum(box[3], others[:, 3]) - np.maximum(box[1], others[:, 1])
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    area = (box[2] - box[0]) * (box[3] - box[1])
    areas = (others[:, 2] - others[:, 0]) * (others[:, 3] - others[:, 1])
    union = area + areas - inter
    out = np.zeros(len(others))
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def match_greedy(
    det_img: np.ndarray,
    det_boxes: np.ndarray,
    gt_offsets: np.ndarray,
    gt_boxes: np.ndarray,
    iou_thr: float,
) -> np.ndarray:
    n = len(det_img)
    tp = np.zeros(n, dtype=np.uint8)
    matched = np.zeros(len(gt_boxes), dtype=bool)
    for d in range(n):
        lo = int(gt_offsets[det_img[d]])
        hi = int(gt_offsets[det_img[d] + 1])
        if lo == hi:
            continue
        ious = _iou_one_to_many(det_boxes[d], gt_boxes[lo:hi])
        ious[matched[lo:hi]] = -1.0
        g = int(np.argmax(ious))
        if ious[g] >= iou_thr:
            matched[lo + g] = True
            tp[d] = 1
    return tp


def iou_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    iw = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    ih = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    areas_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    areas_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = areas_a + areas_b - inter
    out = np.zeros(len(a))
    np.divide(inter, union, out=out, where=union > 0.0)
    return out
