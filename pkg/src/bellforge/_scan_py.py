"""Pure-numpy twin of the compiled scan kernel.

Scores whole blocks of second-party assignments at once via gather-and-sum.
Positions are plain strategy indices here; any enumeration order gives the
same result because the reduction (max score, lowest index on ties) is
order-free over a full partition.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 1 << 14


def scan_range(tensor: np.ndarray, start: int, stop: int):
    """Same contract as the compiled kernel; works on int64 or object arrays."""
    sA, sB, kA, kB = tensor.shape
    if stop <= start:
        return None
    exact_object = tensor.dtype == object
    if exact_object:
        powers = np.array([kB**y for y in range(sB)], dtype=object)
    else:
        powers = kB ** np.arange(sB, dtype=np.int64)
    slabs = [tensor[:, y, :, :].transpose(2, 0, 1) for y in range(sB)]

    best = None
    best_idx = -1
    for lo in range(start, stop, _BLOCK):
        hi = min(lo + _BLOCK, stop)
        positions = np.arange(lo, hi, dtype=object if exact_object else np.int64)
        assignments = (positions[:, None] // powers) % kB
        scores = None
        for y in range(sB):
            part = slabs[y][assignments[:, y].astype(np.int64)]
            scores = part if scores is None else scores + part
        block_scores = scores.max(axis=2).sum(axis=1)
        pos = int(np.argmax(block_scores))
        value = block_scores[pos]
        if best is None or value > best or (value == best and lo + pos < best_idx):
            best = value
            best_idx = lo + pos
    return int(best), int(best_idx), stop - start
