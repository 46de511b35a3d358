"""Small dense exact-rational linear algebra used by several modules."""

from __future__ import annotations

from fractions import Fraction


def solve_square(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve A x = b by Gaussian elimination; return None when A is singular."""
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        if pivot != col:
            aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def rank(columns: list[list[Fraction]]) -> int:
    """Exact rank of a list of column vectors."""
    if not columns:
        return 0
    rows = len(columns[0])
    work = [list(col) for col in columns]
    r = 0
    for row in range(rows):
        pivot = next((c for c in range(r, len(work)) if work[c][row] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        lead = work[r][row]
        for c in range(r + 1, len(work)):
            if work[c][row] != 0:
                factor = work[c][row] / lead
                work[c] = [v - factor * w for v, w in zip(work[c], work[r])]
        r += 1
        if r == len(work):
            break
    return r
