"""Many-valued conceptual views and the pseudo-metric surrogate classifier.

A view pairs the last-hidden-layer activations of a classifier (one row per
object) with its output-layer weights (one row per class). Objects and
classes then live in the same h-dimensional space, where 1-NN against the
class rows acts as a surrogate for the model itself.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, FormatError, KeyMismatchError, UnknownIdError


class Metric(enum.Enum):
    """Distance used between object and class rows.

    Cosine similarity is turned into the distance 1 - cos so a single argmin
    convention serves both metrics; pairs involving a zero vector get cosine
    distance 1 (finite, maximally dissimilar).
    """

    EUCLIDEAN = "euclidean"
    COSINE_DISTANCE = "cosine"

    @classmethod
    def from_name(cls, name: str) -> "Metric":
        key = name.strip().lower()
        if key in ("euclidean", "l2"):
            return cls.EUCLIDEAN
        if key in ("cosine", "cosine_distance", "cos"):
            return cls.COSINE_DISTANCE
        raise ConfigError(f"unknown metric {name!r}; expected 'euclidean' or 'cosine'")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ManyValuedView:
    """Activations per object and weights per class over a shared neuron axis."""

    object_ids: tuple[str, ...]
    class_ids: tuple[str, ...]
    object_view: np.ndarray
    class_view: np.ndarray
    bias: np.ndarray | None = None
    model_predictions: dict[str, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "object_ids", tuple(self.object_ids))
        object.__setattr__(self, "class_ids", tuple(self.class_ids))
        object.__setattr__(self, "object_view", _frozen(self.object_view))
        object.__setattr__(self, "class_view", _frozen(self.class_view))
        if self.object_view.ndim != 2 or self.class_view.ndim != 2:
            raise ValueError("object_view and class_view must be 2-d matrices")
        if self.object_view.shape[1] != self.class_view.shape[1]:
            raise ValueError(
                f"neuron counts differ: object view has {self.object_view.shape[1]}, "
                f"class view has {self.class_view.shape[1]}"
            )
        if self.object_view.shape[0] != len(self.object_ids):
            raise ValueError("object_view row count does not match object_ids")
        if self.class_view.shape[0] != len(self.class_ids):
            raise ValueError("class_view row count does not match class_ids")
        if len(set(self.object_ids)) != len(self.object_ids):
            raise ValueError("duplicate object ids")
        if len(set(self.class_ids)) != len(self.class_ids):
            raise ValueError("duplicate class ids")
        if self.bias is not None:
            bias = _frozen(self.bias)
            if bias.shape != (len(self.class_ids),):
                raise ValueError("bias length does not match class count")
            object.__setattr__(self, "bias", bias)
        if self.model_predictions is not None:
            objects = set(self.object_ids)
            classes = set(self.class_ids)
            for g, c in self.model_predictions.items():
                if g not in objects:
                    raise UnknownIdError("object", g)
                if c not in classes:
                    raise UnknownIdError("class", c)

    @property
    def neuron_count(self) -> int:
        return self.object_view.shape[1]

    def object_index(self, g: str) -> int:
        try:
            return self.object_ids.index(g)
        except ValueError:
            raise UnknownIdError("object", g) from None

    def class_index(self, c: str) -> int:
        try:
            return self.class_ids.index(c)
        except ValueError:
            raise UnknownIdError("class", c) from None


def object_vector(view: ManyValuedView, g: str) -> np.ndarray:
    """The activation row of one object."""
    return view.object_view[view.object_index(g)]


def class_vector(view: ManyValuedView, c: str) -> np.ndarray:
    """The weight row of one class."""
    return view.class_view[view.class_index(c)]


@dataclass(frozen=True)
class LogitBreakdown:
    """A logit and its equivalent norm/cosine factorization."""

    value: float
    dot: float
    norm_product: float
    cosine: float
    bias: float
    bias_missing: bool

    @property
    def factored_value(self) -> float:
        return self.norm_product * self.cosine + self.bias


def logit_breakdown(view: ManyValuedView, g: str, c: str) -> LogitBreakdown:
    """Logit of class c for object g, with the |O||W|cos factorization.

    A missing bias is treated as 0 and flagged. For nonzero rows the two
    forms agree to ~1e-9 relative error; a zero row makes the cosine factor
    0 by convention (the product is 0 either way).
    """
    o = object_vector(view, g)
    w = class_vector(view, c)
    bias_missing = view.bias is None
    b = 0.0 if bias_missing else float(view.bias[view.class_index(c)])
    dot = float(o @ w)
    norm_product = float(np.linalg.norm(o) * np.linalg.norm(w))
    cosine = dot / norm_product if norm_product > 0 else 0.0
    return LogitBreakdown(
        value=dot + b,
        dot=dot,
        norm_product=norm_product,
        cosine=cosine,
        bias=b,
        bias_missing=bias_missing,
    )


def logit(view: ManyValuedView, g: str, c: str) -> float:
    return logit_breakdown(view, g, c).value


def logit_matrix(view: ManyValuedView) -> np.ndarray:
    """All logits at once: objects x classes."""
    out = view.object_view @ view.class_view.T
    if view.bias is not None:
        out = out + view.bias[None, :]
    return out


def pairwise_distances(left: np.ndarray, right: np.ndarray, metric: Metric) -> np.ndarray:
    """Row-by-row distance matrix between two point sets of equal dimension."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if metric is Metric.EUCLIDEAN:
        diff2 = (
            np.sum(left**2, axis=1)[:, None]
            + np.sum(right**2, axis=1)[None, :]
            - 2.0 * (left @ right.T)
        )
        return np.sqrt(np.maximum(diff2, 0.0))
    norms_l = np.linalg.norm(left, axis=1)
    norms_r = np.linalg.norm(right, axis=1)
    denom = np.outer(norms_l, norms_r)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(denom > 0, (left @ right.T) / np.where(denom > 0, denom, 1.0), 0.0)
    dist = 1.0 - cos
    # zero vectors: maximally dissimilar but finite
    zero = (norms_l == 0)[:, None] | (norms_r == 0)[None, :]
    dist[zero] = 1.0
    return dist


def object_class_distances(view: ManyValuedView, metric: Metric) -> np.ndarray:
    """The object-class distance map as an |G| x |C| matrix."""
    return pairwise_distances(view.object_view, view.class_view, metric)


def nn_classify(view: ManyValuedView, metric: Metric) -> dict[str, str]:
    """Map every object to its nearest class row; ties pick the lowest class index."""
    if len(view.class_ids) < 1:
        raise ConfigError("1-NN classification needs at least one class")
    distances = object_class_distances(view, metric)
    winners = np.argmin(distances, axis=1)
    return {g: view.class_ids[int(j)] for g, j in zip(view.object_ids, winners)}


def fidelity(surrogate: Mapping[str, str], reference: Mapping[str, str]) -> float:
    """Fraction of keys on which two prediction maps agree."""
    left, right = set(surrogate), set(reference)
    if left != right:
        raise KeyMismatchError(left - right, right - left)
    if not surrogate:
        raise ConfigError("fidelity of empty prediction maps is undefined")
    hits = sum(1 for g in surrogate if surrogate[g] == reference[g])
    return hits / len(surrogate)


# -- view directory format -----------------------------------------------------

MANIFEST_NAME = "view.json"


def neuron_names(h: int) -> tuple[str, ...]:
    return tuple(f"n_{j + 1}" for j in range(h))


def _write_matrix_csv(path: Path, ids: Sequence[str], matrix: np.ndarray) -> None:
    h = matrix.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *neuron_names(h)])
        for name, row in zip(ids, matrix):
            writer.writerow([name, *(repr(float(x)) for x in row)])


def _read_matrix_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(path, "empty file") from None
        if len(header) < 2 or header[0] != "id":
            raise FormatError(path, f"header must be id,n_1,...,n_h; got {header[:3]!r}...")
        h = len(header) - 1
        if list(header[1:]) != list(neuron_names(h)):
            raise FormatError(path, "neuron columns must be named n_1,...,n_h in order")
        ids: list[str] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != h + 1:
                raise FormatError(path, f"line {line_no}: expected {h + 1} fields, got {len(row)}")
            ids.append(row[0])
            try:
                rows.append([float(x) for x in row[1:]])
            except ValueError:
                raise FormatError(path, f"line {line_no}: non-numeric activation value") from None
    if not ids:
        raise FormatError(path, "no data rows")
    return ids, np.asarray(rows, dtype=float)


def save_view(
    view: ManyValuedView,
    directory,
    activation: str = "unknown",
    source_model: str = "unknown",
) -> None:
    """Write the four-file view directory plus its manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_matrix_csv(directory / "objects.csv", view.object_ids, view.object_view)
    _write_matrix_csv(directory / "classes.csv", view.class_ids, view.class_view)
    manifest = {
        "objects": "objects.csv",
        "classes": "classes.csv",
        "bias": None,
        "predictions": None,
        "neuron_count": view.neuron_count,
        "activation": activation,
        "source_model": source_model,
    }
    if view.bias is not None:
        manifest["bias"] = "bias.csv"
        with open(directory / "bias.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "bias"])
            for name, b in zip(view.class_ids, view.bias):
                writer.writerow([name, repr(float(b))])
    if view.model_predictions is not None:
        manifest["predictions"] = "predictions.csv"
        with open(directory / "predictions.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "class"])
            for g in view.object_ids:
                if g in view.model_predictions:
                    writer.writerow([g, view.model_predictions[g]])
    with open(directory / MANIFEST_NAME, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(directory) -> dict:
    path = Path(directory) / MANIFEST_NAME
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}") from exc
    for key in ("objects", "classes", "neuron_count"):
        if key not in manifest:
            raise FormatError(path, f"manifest is missing {key!r}")
    return manifest


def load_view(directory) -> ManyValuedView:
    """Load a view directory written in the objects/classes/bias/predictions format."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    object_ids, object_view = _read_matrix_csv(directory / manifest["objects"])
    class_ids, class_view = _read_matrix_csv(directory / manifest["classes"])
    if object_view.shape[1] != manifest["neuron_count"]:
        raise FormatError(
            directory / MANIFEST_NAME,
            f"manifest neuron_count {manifest['neuron_count']} does not match "
            f"objects.csv ({object_view.shape[1]} columns)",
        )
    bias = None
    if manifest.get("bias"):
        bias_path = directory / manifest["bias"]
        with open(bias_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["id", "bias"]:
                raise FormatError(bias_path, f"header must be id,bias; got {header!r}")
            by_class = {}
            for row in reader:
                if not row:
                    continue
                if len(row) != 2:
                    raise FormatError(bias_path, "each row must be id,bias")
                try:
                    by_class[row[0]] = float(row[1])
                except ValueError:
                    raise FormatError(bias_path, f"non-numeric bias for {row[0]!r}") from None
        missing = [c for c in class_ids if c not in by_class]
        if missing:
            raise FormatError(bias_path, f"missing bias for classes: {missing!r}")
        bias = np.array([by_class[c] for c in class_ids])
    predictions = None
    if manifest.get("predictions"):
        pred_path = directory / manifest["predictions"]
        with open(pred_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["id", "class"]:
                raise FormatError(pred_path, f"header must be id,class; got {header!r}")
            predictions = {}
            for row in reader:
                if not row:
                    continue
                if len(row) != 2:
                    raise FormatError(pred_path, "each row must be id,class")
                predictions[row[0]] = row[1]
    try:
        return ManyValuedView(
            object_ids=tuple(object_ids),
            class_ids=tuple(class_ids),
            object_view=object_view,
            class_view=class_view,
            bias=bias,
            model_predictions=predictions,
        )
    except (ValueError, UnknownIdError) as exc:
        raise FormatError(directory, str(exc)) from exc
