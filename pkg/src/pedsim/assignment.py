"""Minimum-cost bipartite assignment (Hungarian method, shortest augmenting paths)."""

from __future__ import annotations

import numpy as np


def _solve_square(c: np.ndarray) -> np.ndarray:
    """Row -> column assignment for a finite square matrix. O(n^3)."""
    n = c.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)  # p[j]: 1-based row matched to column j, 0 = free
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = c[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))  # lowest column index wins ties
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    rows = np.empty(n, dtype=int)
    rows[p[1:] - 1] = np.arange(n)
    return rows


def _components(admissible: np.ndarray) -> list[tuple[list[int], list[int]]]:
    """Connected components of the bipartite graph of admissible pairs, skipping isolated nodes."""
    n_rows, n_cols = admissible.shape
    row_seen = np.zeros(n_rows, dtype=bool)
    out = []
    for start in range(n_rows):
        if row_seen[start] or not admissible[start].any():
            continue
        rows, cols = {start}, set()
        row_seen[start] = True
        frontier = [start]
        while frontier:
            new_cols = set(np.flatnonzero(admissible[frontier].any(axis=0)).tolist()) - cols
            cols |= new_cols
            if not new_cols:
                break
            nxt = np.flatnonzero(admissible[:, sorted(new_cols)].any(axis=1) & ~row_seen).tolist()
            row_seen[nxt] = True
            rows.update(nxt)
            frontier = nxt
        out.append((sorted(rows), sorted(cols)))
    return out


def _solve_dense(cost: np.ndarray, finite: np.ndarray) -> list[tuple[int, int]]:
    n_rows, n_cols = cost.shape
    work = cost.copy()
    if not finite.all():
        span = np.abs(cost[finite]).max() if finite.any() else 0.0
        # exceeds any admissible total, so forbidden pairs are used only when unavoidable
        work[~finite] = (span + 1.0) * (max(n_rows, n_cols) + 1)
    if finite.any() and cost[finite].min() < 0:
        work -= cost[finite].min()
    n = max(n_rows, n_cols)
    square = np.zeros((n, n))
    square[:n_rows, :n_cols] = work
    rows = _solve_square(square)
    return [(i, int(rows[i])) for i in range(n_rows) if rows[i] < n_cols and finite[i, rows[i]]]


def hungarian(cost) -> list[tuple[int, int]]:
    """Optimal assignment for an ``n x m`` cost matrix.

    Entries may be ``inf`` to forbid a pair. Rectangular inputs are padded with
    zero-cost dummies. The result maximizes the number of admissible pairs and,
    among those, minimizes total cost. Returns ``(row, col)`` pairs sorted by row;
    forbidden pairs and dummy matches are dropped.

    Sparse (gated) inputs are split into independent connected components of
    admissible pairs, which keeps tracker-sized problems small.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n_rows, n_cols = cost.shape
    if n_rows == 0 or n_cols == 0:
        return []
    if np.isnan(cost).any() or (cost == -np.inf).any():
        raise ValueError("cost entries must be finite or +inf")
    finite = np.isfinite(cost)
    if finite.all():
        return _solve_dense(cost, finite)
    pairs = []
    for rows, cols in _components(finite):
        if len(rows) == 1 or len(cols) == 1:
            # star component: the single best admissible entry, lowest index on ties
            sub = cost[np.ix_(rows, cols)]
            k = int(np.argmin(sub))
            pairs.append((rows[k // len(cols)], cols[k % len(cols)]))
            continue
        sub_pairs = _solve_dense(cost[np.ix_(rows, cols)], finite[np.ix_(rows, cols)])
        pairs += [(rows[i], cols[j]) for i, j in sub_pairs]
    return sorted(pairs)


def assignment_cost(cost, pairs) -> float:
    cost = np.asarray(cost, dtype=float)
    return float(sum(cost[i, j] for i, j in pairs))
