"""Numba-jitted kernel backend.

Every kernel keeps the splitmix64 state internal to the compiled function;
uint64 state must never round-trip through the Python boundary, where mixed
int/uint promotion would silently degrade it to float64.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_NEG53 = 2.0**-53


@njit(cache=True)
def _next_u64(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return state, z ^ (z >> _S31)


@njit(cache=True)
def splitmix64_stream(seed, n):
    out = np.empty(n, dtype=np.uint64)
    state = seed
    for i in range(n):
        state, z = _next_u64(state)
        out[i] = z
    return out


@njit(cache=True)
def permutation(seed, n):
    out = np.arange(n)
    state = seed
    for i in range(n - 1, 0, -1):
        state, z = _next_u64(state)
        j = np.int64(z % np.uint64(i + 1))
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp
    return out


@njit(cache=True)
def cas_slots(seed, n_slots, offsets, members):
    out = np.empty(n_slots, dtype=np.int64)
    n_classes = np.uint64(len(offsets) - 1)
    state = seed
    for k in range(n_slots):
        state, z = _next_u64(state)
        c = np.int64(z % n_classes)
        span = offsets[c + 1] - offsets[c]
        state, z = _next_u64(state)
        m = np.int64(z % np.uint64(span))
        out[k] = members[offsets[c] + m]
    return out


@njit(cache=True)
def rfs_replicate(seed, factors, ceil_mode):
    n = len(factors)
    reps = np.empty(n, dtype=np.int64)
    state = seed
    if ceil_mode:
        for i in range(n):
            base = np.int64(factors[i])
            if factors[i] - base > 0.0:
                base += 1
            reps[i] = base
    else:
        for i in range(n):
            state, z = _next_u64(state)
            u = np.float64(z >> _S11) * _TWO_NEG53
            base = np.int64(factors[i])
            frac = factors[i] - base
            if u < frac:
                base += 1
            reps[i] = base
    total = np.int64(0)
    for i in range(n):
        total += reps[i]
    out = np.empty(total, dtype=np.int64)
    pos = 0
    for i in range(n):
        for _ in range(reps[i]):
            out[pos] = i
            pos += 1
    for i in range(total - 1, 0, -1):
        state, z = _next_u64(state)
        j = np.int64(z % np.uint64(i + 1))
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp
    return out


@njit(cache=True)
def _iou_corners(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1):
    iw = min(ax1, bx1) - max(ax0, bx0)
    if iw <= 0.0:
        return 0.0
    ih = min(ay1, by1) - max(ay0, by0)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@njit(cache=True)
def match_greedy(det_img, det_boxes, gt_offsets, gt_boxes, iou_thr):
    n = len(det_img)
    tp = np.zeros(n, dtype=np.uint8)
    matched = np.zeros(len(gt_boxes), dtype=np.uint8)
    for d in range(n):
        lo = gt_offsets[det_img[d]]
        hi = gt_offsets[det_img[d] + 1]
        best = np.int64(-1)
        best_iou = -1.0
        for g in range(lo, hi):
            if matched[g]:
                continue
            iou = _iou_corners(
                det_boxes[d, 0], det_boxes[d, 1], det_boxes[d, 2], det_boxes[d, 3],
                gt_boxes[g, 0], gt_boxes[g, 1], gt_boxes[g, 2], gt_boxes[g, 3],
            )
            if iou >= iou_thr and iou > best_iou:
                best = g
                best_iou = iou
        if best >= 0:
            matched[best] = 1
            tp[d] = 1
    return tp


@njit(cache=True)
def iou_pairs(a, b):
    n = len(a)
    out = np.empty(n)
    for i in range(n):
        out[i] = _iou_corners(
            a[i, 0], a[i, 1], a[i, 2], a[i, 3],
            b[i, 0], b[i, 1], b[i, 2], b[i, 3],
        )
    return out
