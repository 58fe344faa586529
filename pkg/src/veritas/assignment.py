"""Optimal one-to-one assignment for small dense matrices.

Shortest-augmenting-path solver with dual potentials, O(n^3) on the padded
square matrix. Rectangular inputs are padded with zero-cost dummy rows or
columns, which forces exactly min(rows, cols) real pairs. Ties between
optimal assignments are broken lexicographically by (row, column) via a
greedy refinement pass, so matrices a few dozen wide are the intended use.
"""
from __future__ import annotations

import math

from .errors import ValidationError

_REL_TOL = 1e-9


def _lap_square(a: list[list[float]]) -> tuple[float, list[int]]:
    """Minimum-cost perfect matching on a square matrix; returns (total, col_of_row)."""
    n = len(a)
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j] = 1-based row matched to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = a[i0 - 1]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    total = 0.0
    for i in range(n):
        total += a[i][col_of_row[i]]
    return total, col_of_row


def _validate(cost: list[list[float]]) -> tuple[int, int]:
    if not cost or not cost[0]:
        raise ValidationError("cost matrix must be at least 1x1")
    cols = len(cost[0])
    for r, row in enumerate(cost):
        if len(row) != cols:
            raise ValidationError(f"ragged cost matrix: row {r} has {len(row)} columns, expected {cols}")
        for value in row:
            if not math.isfinite(value):
                raise ValidationError("cost matrix entries must be finite")
    return len(cost), cols


def hungarian(cost: list[list[float]], maximize: bool = False) -> list[tuple[int, int]]:
    """Optimal assignment as (row, col) pairs sorted by row.

    Exactly min(rows, cols) pairs are returned. Among equally good totals the
    lexicographically smallest pair list wins: each row in turn is fixed to
    the smallest column that still permits an optimal completion (within
    1e-9 relative tolerance).
    """
    rows, cols = _validate(cost)
    n = max(rows, cols)
    sign = -1.0 if maximize else 1.0
    a = [
        [sign * cost[i][j] if i < rows and j < cols else 0.0 for j in range(n)]
        for i in range(n)
    ]
    best_total, _ = _lap_square(a)
    tol = _REL_TOL * max(1.0, abs(best_total))

    # Greedy column fixing: rows in order take the smallest column whose
    # completion stays optimal. Dummy columns sit at the high indices, so
    # real columns are preferred automatically.
    used_cols: set[int] = set()
    chosen: list[int] = []
    fixed = 0.0
    for r in range(n):
        free_cols = [c for c in range(n) if c not in used_cols]
        picked = None
        for c in free_cols:
            rest_cols = [x for x in free_cols if x != c]
            if r + 1 < n:
                sub = [[a[i][x] for x in rest_cols] for i in range(r + 1, n)]
                rest, _ = _lap_square(sub)
            else:
                rest = 0.0
            if fixed + a[r][c] + rest <= best_total + tol:
                picked = c
                break
        assert picked is not None
        used_cols.add(picked)
        chosen.append(picked)
        fixed += a[r][picked]

    return [(r, c) for r, c in enumerate(chosen) if r < rows and c < cols]


def assignment_total(cost: list[list[float]], pairs: list[tuple[int, int]]) -> float:
    """Sum the assigned entries in ascending row order."""
    total = 0.0
    for r, c in pairs:
        total += cost[r][c]
    return total
