"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the ``LONGTAIL_BACKEND``
environment variable:

  * ``auto`` (default): numba when importable, numpy otherwise
  * ``numba``: require the jitted backend, fail loudly if numba is missing
  * ``numpy``: force the pure-numpy fallback

Both backends implement the same splitmix64 streams bit for bit, so every
emitted plan is identical regardless of backend. ``BACKEND`` names the one
in use; ``benchmarks/bench_kernels.py`` times the two side by side.

Kernel surface (identical signatures in both backends):

  splitmix64_stream(seed, n)            raw uint64 outputs
  permutation(seed, n)                  Fisher-Yates permutation of 0..n-1
  cas_slots(seed, n_slots, offsets, members)
                                        class-then-member slot draws
  rfs_replicate(seed, factors, ceil_mode)
                                        per-item replication + shuffle
  match_greedy(det_img, det_boxes, gt_offsets, gt_boxes, iou_thr)
                                        confidence-ordered greedy matching
  iou_pairs(a, b)                       elementwise IoU of corner boxes
"""

import os

import numpy as np

from longtail.rng import MASK64

_CHOICE = os.environ.get("LONGTAIL_BACKEND", "auto").strip().lower()

if _CHOICE == "numpy":
    from longtail.kernels import numpy_backend as _impl

    BACKEND = "numpy"
elif _CHOICE == "numba":
    from longtail.kernels import numba_backend as _impl

    BACKEND = "numba"
elif _CHOICE == "auto":
    try:
        from longtail.kernels import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        from longtail.kernels import numpy_backend as _impl

        BACKEND = "numpy"
else:
    raise RuntimeError(
        f"LONGTAIL_BACKEND={_CHOICE!r} is not one of 'auto', 'numba', 'numpy'"
    )


def as_seed(seed: int) -> np.uint64:
    """Reduce an arbitrary Python int seed to the uint64 kernels expect."""
    return np.uint64(int(seed) & MASK64)


splitmix64_stream = _impl.splitmix64_stream
permutation = _impl.permutation
cas_slots = _impl.cas_slots
rfs_replicate = _impl.rfs_replicate
match_greedy = _impl.match_greedy
iou_pairs = _impl.iou_pairs

__all__ = [
    "BACKEND",
    "as_seed",
    "splitmix64_stream",
    "permutation",
    "cas_slots",
    "rfs_replicate",
    "match_greedy",
    "iou_pairs",
]
