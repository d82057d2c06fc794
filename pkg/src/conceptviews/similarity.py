"""Model comparison via Gromov-Wasserstein distance on view-derived spaces.

Each model contributes a finite metric-measure space (pairwise distances
among sampled view rows, uniform measure). The squared-loss GW objective is
minimized by conditional-gradient (Frank-Wolfe) iteration whose linear
subproblem is solved exactly, so small instances can be checked against an
exhaustive permutation oracle. A pairwise-fidelity matrix serves as the
cheap baseline comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import csr_matrix
from scipy.spatial.distance import squareform

from .errors import ConfigError, ResourceBudgetError
from .view import ManyValuedView, Metric, fidelity, pairwise_distances

DEFAULT_SEED = 7
DEFAULT_MAX_GW_POINTS = 2000

# largest space for which every permutation coupling is tried as a start
PERMUTATION_SWEEP_LIMIT = 7


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MetricMeasureSpace:
    """A finite metric space with a probability measure on its points."""

    labels: tuple[str, ...]
    distances: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        distances = _frozen(self.distances)
        measure = _frozen(self.measure)
        n = len(self.labels)
        if distances.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}, got {distances.shape}")
        if measure.shape != (n,):
            raise ValueError("measure length must match label count")
        if not np.all(np.isfinite(distances)):
            raise ValueError("distances must be finite")
        if np.any(distances < 0):
            raise ValueError("distances must be nonnegative")
        if not np.allclose(distances, distances.T, atol=1e-9):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(distances) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(measure < 0):
            raise ValueError("measure must be nonnegative")
        if abs(float(measure.sum()) - 1.0) > 1e-12:
            raise ValueError("measure must sum to 1 within 1e-12")
        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "measure", measure)

    @property
    def size(self) -> int:
        return len(self.labels)


def uniform_space(labels: Sequence[str], distances: np.ndarray) -> MetricMeasureSpace:
    n = len(labels)
    return MetricMeasureSpace(tuple(labels), distances, np.full(n, 1.0 / n))


def space_from_view(
    view: ManyValuedView,
    side: str,
    metric: Metric,
    subsample_fraction: float = 1.0,
    seed: int = DEFAULT_SEED,
) -> MetricMeasureSpace:
    """Pairwise distances among (sub)sampled view rows, uniform measure.

    Subsampling draws uniformly without replacement, deterministically per
    seed; the chosen rows keep their original order.
    """
    if side == "object":
        ids, matrix = view.object_ids, view.object_view
    elif side == "class":
        ids, matrix = view.class_ids, view.class_view
    else:
        raise ConfigError(f"side must be 'object' or 'class', got {side!r}")
    if not 0.0 < subsample_fraction <= 1.0:
        raise ConfigError("subsample fraction must be in (0, 1]")
    n = len(ids)
    if subsample_fraction < 1.0:
        k = int(round(n * subsample_fraction))
        if k < 2:
            raise ConfigError(
                f"subsample of {k} from {n} rows is too small; at least 2 points needed"
            )
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(n, size=k, replace=False))
        ids = [ids[i] for i in keep]
        matrix = matrix[keep]
    if len(ids) < 2:
        raise ConfigError("a metric-measure space needs at least 2 points")
    distances = pairwise_distances(matrix, matrix, metric)
    # float dust from the vectorized kernels must not break symmetry
    distances = 0.5 * (distances + distances.T)
    np.fill_diagonal(distances, 0.0)
    return uniform_space(ids, distances)


@dataclass(frozen=True)
class GwConfig:
    """Conditional-gradient solver knobs."""

    max_iterations: int = 1000
    tolerance: float = 1e-9
    extra_starts: int = 4
    seed: int = DEFAULT_SEED
    max_points: int = DEFAULT_MAX_GW_POINTS


@dataclass(frozen=True)
class GwResult:
    """A GW solve: distance (sqrt of objective), coupling, and iteration record."""

    distance: float
    coupling: np.ndarray
    iterations: int
    converged: bool
    objective_trace: tuple[float, ...]

    @property
    def objective(self) -> float:
        return self.distance**2


def _solve_ot(cost: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Exact linear OT: minimize <cost, T> subject to marginals p, q."""
    n, m = cost.shape
    if n == m and np.allclose(p, 1.0 / n) and np.allclose(q, 1.0 / m):
        # uniform square case: vertices are permutations, assignment is exact
        rows, cols = linear_sum_assignment(cost)
        coupling = np.zeros((n, m))
        coupling[rows, cols] = 1.0 / n
        return coupling
    row_idx = np.repeat(np.arange(n), m)
    col_idx = np.tile(np.arange(m), n) + n
    data = np.ones(2 * n * m)
    indices = np.concatenate([row_idx, col_idx])
    var_idx = np.tile(np.arange(n * m), 2)
    a_eq = csr_matrix((data, (indices, var_idx)), shape=(n + m, n * m))
    b_eq = np.concatenate([p, q])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport subproblem failed: {res.message}")
    return res.x.reshape(n, m)


def _northwest_corner(p: np.ndarray, q: np.ndarray, row_order, col_order) -> np.ndarray:
    """A feasible transport-polytope vertex built greedily in the given orders."""
    remaining_p = p[row_order].copy()
    remaining_q = q[col_order].copy()
    coupling = np.zeros((len(p), len(q)))
    i = j = 0
    while i < len(p) and j < len(q):
        amount = min(remaining_p[i], remaining_q[j])
        coupling[row_order[i], col_order[j]] = amount
        remaining_p[i] -= amount
        remaining_q[j] -= amount
        if remaining_p[i] <= remaining_q[j]:
            i += 1
        else:
            j += 1
    return coupling


def _best_permutation_coupling(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """The best uniform permutation coupling of two equal-size spaces.

    The objective at a permutation coupling is const - (2/n^2) * sum of
    dx * dy[perm][:, perm], so maximizing that correlation minimizes the
    objective over all permutation vertices.
    """
    import itertools

    n = dx.shape[0]
    best_perm = None
    best_cross = -np.inf
    for perm in itertools.permutations(range(n)):
        idx = np.asarray(perm)
        cross = float(np.sum(dx * dy[np.ix_(idx, idx)]))
        if cross > best_cross:
            best_cross = cross
            best_perm = idx
    coupling = np.zeros((n, n))
    coupling[np.arange(n), best_perm] = 1.0 / n
    return coupling


def _gw_objective_parts(dx: np.ndarray, dy: np.ndarray, p: np.ndarray, q: np.ndarray):
    const = float(p @ (dx**2) @ p + q @ (dy**2) @ q)

    def objective(coupling: np.ndarray) -> float:
        return const - 2.0 * float(np.sum(coupling * (dx @ coupling @ dy)))

    return const, objective


def _frank_wolfe(
    dx: np.ndarray,
    dy: np.ndarray,
    p: np.ndarray,
    q: np.ndarray,
    start: np.ndarray,
    cfg: GwConfig,
) -> tuple[np.ndarray, float, int, bool, list[float]]:
    const_xy = (dx**2) @ p
    const_yx = (dy**2) @ q
    const_c = const_xy[:, None] + const_yx[None, :]
    _, objective = _gw_objective_parts(dx, dy, p, q)
    coupling = start
    value = objective(coupling)
    trace = [value]
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        grad = const_c - 2.0 * (dx @ coupling @ dy)
        target = _solve_ot(grad, p, q)
        delta = target - coupling
        # J(T + t*delta) = J(T) + b*t + a*t^2 on t in [0, 1]
        b = -4.0 * float(np.sum(delta * (dx @ coupling @ dy)))
        a = -2.0 * float(np.sum(delta * (dx @ delta @ dy)))
        if a > 0:
            step = min(1.0, max(0.0, -b / (2.0 * a)))
        else:
            step = 0.0 if a + b >= 0 else 1.0
        if a * step**2 + b * step >= 0:
            step = 0.0
        candidate = coupling + step * delta
        new_value = objective(candidate)
        if new_value > value:
            # numerical stall: the predicted descent is below float resolution
            converged = True
            break
        coupling = candidate
        trace.append(new_value)
        scale = max(abs(value), 1.0)
        if value - new_value <= cfg.tolerance * scale:
            value = new_value
            converged = True
            break
        value = new_value
    return coupling, max(value, 0.0), iterations, converged, trace


def _orientation_key(space: MetricMeasureSpace) -> tuple:
    return (space.size, space.distances.tobytes(), space.measure.tobytes())


def _canonical_order(space: MetricMeasureSpace) -> np.ndarray:
    """A point order determined by the geometry alone, not the input labeling."""
    keys = [
        (float(space.measure[i]), tuple(np.sort(space.distances[i]).tolist()))
        for i in range(space.size)
    ]
    return np.array(sorted(range(space.size), key=keys.__getitem__), dtype=int)


def _reordered(space: MetricMeasureSpace, order: np.ndarray) -> MetricMeasureSpace:
    return MetricMeasureSpace(
        labels=tuple(space.labels[i] for i in order),
        distances=space.distances[np.ix_(order, order)],
        measure=space.measure[order],
    )


def gw_distance(x: MetricMeasureSpace, y: MetricMeasureSpace, cfg: GwConfig | None = None) -> GwResult:
    """Squared-loss Gromov-Wasserstein distance between two metric-measure spaces.

    Multiple deterministic starts (uniform product coupling, a permutation
    sweep on tiny instances, and seeded feasible vertices) guard against the
    objective's non-convexity; the best final coupling wins. The returned
    distance is the square root of the objective, an upper bound on the true
    GW-2 value. Both spaces are put into a canonical point order and a
    canonical argument orientation before solving, which makes the estimate
    exactly symmetric and independent of how the input points were labeled.
    """
    cfg = cfg or GwConfig()
    if x.size > cfg.max_points or y.size > cfg.max_points:
        raise ResourceBudgetError(
            f"space size {max(x.size, y.size)} exceeds the {cfg.max_points}-point GW budget"
        )
    order_x, order_y = _canonical_order(x), _canonical_order(y)
    left, right = _reordered(x, order_x), _reordered(y, order_y)
    transposed = _orientation_key(right) < _orientation_key(left)
    if transposed:
        left, right = right, left
    dx, dy = left.distances, right.distances
    p, q = left.measure, right.measure
    starts = [np.outer(p, q)]
    uniform = np.allclose(p, 1.0 / left.size) and np.allclose(q, 1.0 / right.size)
    if left.size == right.size and left.size <= PERMUTATION_SWEEP_LIMIT and uniform:
        # tiny instances: scanning every permutation vertex makes the result
        # provably no worse than the best permutation coupling
        starts.append(_best_permutation_coupling(dx, dy))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.extra_starts):
        row_order = rng.permutation(left.size)
        col_order = rng.permutation(right.size)
        starts.append(_northwest_corner(p, q, row_order, col_order))
    best = None
    for start in starts:
        coupling, value, iterations, converged, trace = _frank_wolfe(dx, dy, p, q, start, cfg)
        if best is None or value < best[1] - 1e-15:
            best = (coupling, value, iterations, converged, trace)
    coupling, value, iterations, converged, trace = best
    row_err = float(np.abs(coupling.sum(axis=1) - p).max())
    col_err = float(np.abs(coupling.sum(axis=0) - q).max())
    if row_err > 1e-8 or col_err > 1e-8:
        raise RuntimeError("coupling violates its marginal constraints beyond 1e-8")
    if transposed:
        coupling = coupling.T
    # rows/columns are in canonical order here; put them back in input order
    coupling = coupling[np.ix_(np.argsort(order_x), np.argsort(order_y))]
    return GwResult(
        distance=float(np.sqrt(value)),
        coupling=coupling,
        iterations=iterations,
        converged=converged,
        objective_trace=tuple(trace),
    )


def pairwise_fidelity_matrix(predictions: Sequence[Mapping[str, str]]) -> np.ndarray:
    """Fidelity between every pair of prediction maps; diagonal is 1."""
    k = len(predictions)
    out = np.ones((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            out[a, b] = out[b, a] = fidelity(predictions[a], predictions[b])
    return out


@dataclass(frozen=True)
class ModelComparison:
    """Pairwise GW distances over model spaces plus their average-linkage tree."""

    labels: tuple[str, ...]
    distances: np.ndarray
    converged: np.ndarray
    dendrogram: dict


def _linkage_to_nested(link: np.ndarray, labels: Sequence[str]) -> dict:
    n = len(labels)
    nodes: dict[int, dict] = {i: {"name": labels[i]} for i in range(n)}
    for step, (left, right, height, _count) in enumerate(link):
        nodes[n + step] = {
            "height": float(height),
            "children": [nodes[int(left)], nodes[int(right)]],
        }
    return nodes[n + len(link) - 1] if len(link) else nodes[0]


def distance_matrix_over_models(
    spaces: Sequence[MetricMeasureSpace],
    labels: Sequence[str],
    cfg: GwConfig | None = None,
    threads: int = 1,
) -> ModelComparison:
    """All pairwise GW distances plus an average-linkage merge tree.

    Pairs are independent solves, so they may run on a thread pool; the
    assembled matrix does not depend on scheduling.
    """
    if len(spaces) < 2:
        raise ConfigError("model comparison needs at least 2 spaces")
    if len(labels) != len(spaces):
        raise ConfigError("one label per space is required")
    k = len(spaces)
    pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
    distances = np.zeros((k, k))
    converged = np.ones((k, k), dtype=bool)
    if threads > 1 and len(pairs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ab: gw_distance(spaces[ab[0]], spaces[ab[1]], cfg), pairs))
    else:
        results = [gw_distance(spaces[a], spaces[b], cfg) for a, b in pairs]
    for (a, b), result in zip(pairs, results):
        distances[a, b] = distances[b, a] = result.distance
        converged[a, b] = converged[b, a] = result.converged
    link = linkage(squareform(distances, checks=False), method="average")
    dendrogram = _linkage_to_nested(link, list(labels))
    return ModelComparison(
        labels=tuple(labels),
        distances=distances,
        converged=converged,
        dendrogram=dendrogram,
    )
