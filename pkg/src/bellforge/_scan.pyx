# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled strategy-scan kernel.

Enumerates assignments of the second party in reflected mixed-radix order,
so each step changes one input's output by one and the per-input response
table updates incrementally.  Scores are integer numerators on a common
denominator; the caller guarantees they cannot overflow 64 bits.
"""

from libc.stdlib cimport free, malloc


def scan_range(long long[:, :, :, ::1] tensor, long long start, long long stop):
    """Best score over enumeration positions [start, stop).

    Returns (best_score, best_strategy_index, scanned); the strategy index
    is sum_y f[y] * kB**y and ties prefer the lowest index, so the result
    does not depend on how the range is chunked.
    """
    cdef Py_ssize_t sA = tensor.shape[0]
    cdef Py_ssize_t sB = tensor.shape[1]
    cdef Py_ssize_t kA = tensor.shape[2]
    cdef Py_ssize_t kB = tensor.shape[3]
    if stop <= start:
        return None
    cdef long long* mb = <long long*> malloc(sA * kA * sizeof(long long))
    cdef long long* pow_kb = <long long*> malloc(sB * sizeof(long long))
    cdef long long* digits = <long long*> malloc(sB * sizeof(long long))
    cdef int* direction = <int*> malloc(sB * sizeof(int))
    if mb == NULL or pow_kb == NULL or digits == NULL or direction == NULL:
        free(mb); free(pow_kb); free(digits); free(direction)
        raise MemoryError()

    cdef long long best = 0, best_idx = -1, idx = 0, count = 0
    cdef long long c, score, row_max, v, t, suffix, nv
    cdef Py_ssize_t x, y, a, j
    cdef bint initialised = 0

    with nogil:
        pow_kb[0] = 1
        for y in range(1, sB):
            pow_kb[y] = pow_kb[y - 1] * kB
        # Reflected decode of the start position: digit y of the plain
        # counter is flipped when the more-significant digits sum to odd.
        suffix = 0
        for y in range(sB - 1, -1, -1):
            t = (start / pow_kb[y]) % kB
            if suffix % 2 == 0:
                digits[y] = t
                direction[y] = 1
            else:
                digits[y] = kB - 1 - t
                direction[y] = -1
            suffix += t
        idx = 0
        for y in range(sB):
            idx += digits[y] * pow_kb[y]
        for x in range(sA):
            for a in range(kA):
                v = 0
                for y in range(sB):
                    v += tensor[x, y, a, digits[y]]
                mb[x * kA + a] = v

        for c in range(start, stop):
            score = 0
            for x in range(sA):
                row_max = mb[x * kA]
                for a in range(1, kA):
                    if mb[x * kA + a] > row_max:
                        row_max = mb[x * kA + a]
                score += row_max
            if (not initialised) or score > best or (score == best and idx < best_idx):
                best = score
                best_idx = idx
                initialised = 1
            count += 1
            if c + 1 < stop:
                j = 0
                while True:
                    nv = digits[j] + direction[j]
                    if 0 <= nv < kB:
                        for x in range(sA):
                            for a in range(kA):
                                mb[x * kA + a] += (
                                    tensor[x, j, a, nv] - tensor[x, j, a, digits[j]]
                                )
                        idx += (nv - digits[j]) * pow_kb[j]
                        digits[j] = nv
                        break
                    direction[j] = -direction[j]
                    j += 1

    free(mb); free(pow_kb); free(digits); free(direction)
    return int(best), int(best_idx), int(count)
