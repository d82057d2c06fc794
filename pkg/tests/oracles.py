"""Definition-level oracles the test suite checks the library against.

Everything here is deliberately naive: power-set sweeps, quantifier loops,
and exhaustive enumeration. Slow but obviously correct on small inputs.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def derive_objects_oracle(dense: np.ndarray, rows: set[int]) -> set[int]:
    """Attributes every listed object has (empty set -> all attributes)."""
    n_attr = dense.shape[1]
    return {j for j in range(n_attr) if all(dense[i, j] for i in rows)}


def derive_attributes_oracle(dense: np.ndarray, cols: set[int]) -> set[int]:
    """Objects having every listed attribute (empty set -> all objects)."""
    n_obj = dense.shape[0]
    return {i for i in range(n_obj) if all(dense[i, j] for j in cols)}


def closure_oracle(dense: np.ndarray, cols: set[int]) -> set[int]:
    return derive_objects_oracle(dense, derive_attributes_oracle(dense, cols))


def concepts_oracle(dense: np.ndarray) -> set[tuple[frozenset, frozenset]]:
    """All formal concepts by closing every attribute subset and deduplicating."""
    n_attr = dense.shape[1]
    found = set()
    for r in range(n_attr + 1):
        for combo in itertools.combinations(range(n_attr), r):
            intent = closure_oracle(dense, set(combo))
            extent = derive_attributes_oracle(dense, intent)
            found.add((frozenset(extent), frozenset(intent)))
    return found


def covers_oracle(extents: list[frozenset]) -> set[tuple[int, int]]:
    """Transitive reduction of strict extent inclusion: (lower, upper) pairs."""
    edges = set()
    for a, ea in enumerate(extents):
        for b, eb in enumerate(extents):
            if ea < eb:
                between = any(
                    ea < extents[c] < eb for c in range(len(extents)) if c not in (a, b)
                )
                if not between:
                    edges.add((a, b))
    return edges


def meet_irreducibles_oracle(extents: list[frozenset], all_objects: frozenset) -> set[int]:
    """Concepts whose extent is not an intersection of strictly larger extents.

    The empty intersection counts as the full object set, so the top concept
    is never meet-irreducible.
    """
    out = set()
    for a, ea in enumerate(extents):
        meet = all_objects
        for b, eb in enumerate(extents):
            if ea < eb:
                meet = meet & eb
        if meet != ea:
            out.add(a)
    return out


def shared_counts_oracle(
    extents: list[frozenset], g_a: int, g_b: int
) -> int:
    return sum(1 for e in extents if g_a in e and g_b in e)


def nn_oracle(obj_rows: np.ndarray, cls_rows: np.ndarray, dist) -> list[int]:
    """Per object, the lowest class index attaining the minimal distance."""
    winners = []
    for o in obj_rows:
        best_j, best_d = 0, math.inf
        for j, c in enumerate(cls_rows):
            d = dist(o, c)
            if d < best_d:
                best_j, best_d = j, d
        winners.append(best_j)
    return winners


def euclidean_scalar(x, y) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))


def cosine_distance_scalar(x, y) -> float:
    nx = math.sqrt(sum(a * a for a in x))
    ny = math.sqrt(sum(b * b for b in y))
    if nx == 0.0 or ny == 0.0:
        return 1.0
    return 1.0 - sum(a * b for a, b in zip(x, y)) / (nx * ny)


def jaccard_scalar(a: set, b: set) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def gw_objective(dx: np.ndarray, dy: np.ndarray, coupling: np.ndarray) -> float:
    """The squared-loss GW objective evaluated by its four-index definition."""
    n, m = coupling.shape
    total = 0.0
    for i in range(n):
        for j in range(m):
            if coupling[i, j] == 0.0:
                continue
            for k in range(n):
                for l in range(m):
                    total += (dx[i, k] - dy[j, l]) ** 2 * coupling[i, j] * coupling[k, l]
    return total


def gw_permutation_optimum(dx: np.ndarray, dy: np.ndarray) -> float:
    """Best GW objective over all permutation couplings of two uniform spaces."""
    n = dx.shape[0]
    assert dy.shape[0] == n
    best = math.inf
    for perm in itertools.permutations(range(n)):
        coupling = np.zeros((n, n))
        for i, j in enumerate(perm):
            coupling[i, j] = 1.0 / n
        best = min(best, gw_objective(dx, dy, coupling))
    return best


def wracc_oracle(dense: np.ndarray, cover: np.ndarray, target: np.ndarray) -> float:
    n_total = dense.shape[0]
    size = int(cover.sum())
    if size == 0:
        return 0.0
    positives = int((cover & target).sum())
    p0 = float(target.sum()) / n_total
    return (size / n_total) * (positives / size - p0)


def best_subgroups_oracle(
    dense: np.ndarray, target_col: int, max_depth: int = 2
) -> tuple[float, list]:
    """Exhaustive search over conjunctions of present/absent literals.

    Literals over the target column are excluded; conjunctions with empty
    cover are skipped; the empty conjunction (quality 0) participates.
    Returns the best quality and every conjunction attaining it.
    """
    n_total, n_attr = dense.shape
    target = dense[:, target_col].astype(bool)
    literals = []
    for j in range(n_attr):
        if j == target_col:
            continue
        literals.append((j, True))
        literals.append((j, False))
    best_q = 0.0
    best: list = [()]
    for depth in range(1, max_depth + 1):
        for combo in itertools.combinations(literals, depth):
            cols = [j for j, _ in combo]
            if len(set(cols)) != len(cols):
                continue
            cover = np.ones(n_total, dtype=bool)
            for j, present in combo:
                col = dense[:, j].astype(bool)
                cover &= col if present else ~col
            if not cover.any():
                continue
            q = wracc_oracle(dense, cover, target)
            if q > best_q + 1e-12:
                best_q, best = q, [combo]
            elif abs(q - best_q) <= 1e-12:
                best.append(combo)
    return best_q, best
