"""Dichotomic scaling of many-valued views into symbolic views.

Each neuron column n_j splits into a positive attribute (value > delta) and
its complement not_n_j (value <= delta), so every scaled row carries exactly
h incidences. Ablation statistics (value splits, class separation, symbolic
1-NN) operate on the scaled contexts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError
from .fca import FormalContext, negated_attribute
from .view import ManyValuedView, Metric, neuron_names, pairwise_distances

ThresholdValue = Union[float, np.ndarray]

THRESHOLD_STRATEGIES = ("zero", "mean", "median", "median-per-neuron")


def _check_threshold(value: ThresholdValue, name: str) -> ThresholdValue:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if arr.ndim == 0:
        return float(arr)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a scalar or a per-neuron vector")
    return arr


@dataclass(frozen=True)
class Thresholds:
    """Scaling cut values for the object matrix and the class matrix.

    Scalars cover the common case; a length-h vector applies one cut per
    neuron column (the median-per-neuron strategy needs this).
    """

    delta_object: ThresholdValue = 0.0
    delta_class: ThresholdValue = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delta_object", _check_threshold(self.delta_object, "delta_object"))
        object.__setattr__(self, "delta_class", _check_threshold(self.delta_class, "delta_class"))


def compute_thresholds(view: ManyValuedView, strategy: str) -> Thresholds:
    """Derive thresholds from the view's value distributions.

    zero: 0 for both matrices. mean/median: one scalar per matrix over all
    its entries. median-per-neuron: a length-h vector of column medians per
    matrix.
    """
    if strategy == "zero":
        return Thresholds(0.0, 0.0)
    if strategy == "mean":
        return Thresholds(float(view.object_view.mean()), float(view.class_view.mean()))
    if strategy == "median":
        return Thresholds(float(np.median(view.object_view)), float(np.median(view.class_view)))
    if strategy == "median-per-neuron":
        return Thresholds(
            np.median(view.object_view, axis=0),
            np.median(view.class_view, axis=0),
        )
    raise ConfigError(
        f"unknown threshold strategy {strategy!r}; expected one of {', '.join(THRESHOLD_STRATEGIES)}"
    )


def _scaled_attributes(h: int) -> tuple[str, ...]:
    names = neuron_names(h)
    return names + tuple(negated_attribute(n) for n in names)


def _scale_matrix(ids, matrix: np.ndarray, delta: ThresholdValue, h: int) -> FormalContext:
    positive = matrix > delta
    if positive.shape != matrix.shape:
        raise ValueError("threshold vector length does not match neuron count")
    incidence = np.concatenate([positive, ~positive], axis=1)
    return FormalContext(ids, _scaled_attributes(h), incidence)


@dataclass(frozen=True)
class SymbolicView:
    """Two complement-paired formal contexts: scaled objects and scaled classes."""

    object_context: FormalContext
    class_context: FormalContext

    def __post_init__(self):
        if self.object_context.attributes != self.class_context.attributes:
            raise ValueError("object and class contexts must share one attribute list")
        attributes = self.object_context.attributes
        if len(attributes) % 2 != 0:
            raise ValueError("attribute count must be even (positive plus negated)")
        h = len(attributes) // 2
        for j in range(h):
            if attributes[h + j] != negated_attribute(attributes[j]):
                raise ValueError(
                    f"attribute layout violated: column {h + j} is {attributes[h + j]!r}, "
                    f"expected {negated_attribute(attributes[j])!r}"
                )
        half = (1 << h) - 1
        for ctx in (self.object_context, self.class_context):
            for i, name in enumerate(ctx.objects):
                row = ctx.row_mask(i)
                pos = row & half
                neg = row >> h
                if pos & neg or (pos ^ neg) != half:
                    raise ValueError(
                        f"complementarity violated for row {name!r}: "
                        "each neuron needs exactly one of its two attributes"
                    )

    @property
    def neuron_count(self) -> int:
        return self.object_context.attribute_count // 2


def scale(view: ManyValuedView, t: Thresholds) -> SymbolicView:
    """Dichotomic scaling: strict > for positive attributes, <= for barred ones."""
    h = view.neuron_count
    return SymbolicView(
        object_context=_scale_matrix(view.object_ids, view.object_view, t.delta_object, h),
        class_context=_scale_matrix(view.class_ids, view.class_view, t.delta_class, h),
    )


def _split(matrix: np.ndarray, delta: ThresholdValue) -> tuple[float, float]:
    above = 100.0 * float(np.count_nonzero(matrix > delta)) / matrix.size
    return above, 100.0 - above


def split_statistics(view: ManyValuedView, t: Thresholds) -> tuple[tuple[float, float], tuple[float, float]]:
    """Percent of entries above/at-or-below threshold, per matrix.

    Returns ((object_above, object_below), (class_above, class_below)); each
    pair sums to 100 exactly.
    """
    return _split(view.object_view, t.delta_object), _split(view.class_view, t.delta_class)


def class_separation(sv: SymbolicView) -> float:
    """Fraction of classes whose scaled attribute row is unique."""
    rows = [sv.class_context.row_mask(i) for i in range(sv.class_context.object_count)]
    if not rows:
        raise ConfigError("class separation of an empty class context is undefined")
    counts: dict[int, int] = {}
    for row in rows:
        counts[row] = counts.get(row, 0) + 1
    unique = sum(1 for row in rows if counts[row] == 1)
    return unique / len(rows)


def symbolic_nn_classify(sv: SymbolicView, metric: Metric) -> dict[str, str]:
    """1-NN over the 0/1 rows of the scaled contexts; ties pick the lowest class index.

    Every row has exactly h ones, so all rows share one norm and euclidean
    and cosine orderings coincide.
    """
    class_ids = sv.class_context.objects
    if len(class_ids) < 1:
        raise ConfigError("1-NN classification needs at least one class")
    obj = sv.object_context.to_dense().astype(float)
    cls = sv.class_context.to_dense().astype(float)
    distances = pairwise_distances(obj, cls, metric)
    winners = np.argmin(distances, axis=1)
    return {g: class_ids[int(j)] for g, j in zip(sv.object_context.objects, winners)}
