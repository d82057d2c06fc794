"""Abductive interpretation of symbolic views against background knowledge.

Neurons are related to human-interpretable features by comparing, per pair,
the classes that activate the neuron with the classes that carry the
feature. Subgroup discovery over the joined class context then reads off
conjunction rules such as "these neurons firing means the class has this
feature", scored by weighted relative accuracy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, FormatError, KeyMismatchError, UnknownIdError
from .fca import FormalContext, read_cxt
from .scaling import SymbolicView


@dataclass(frozen=True)
class BackgroundKnowledge:
    """A formal context relating classes to interpretable features."""

    context: FormalContext

    @property
    def classes(self) -> tuple[str, ...]:
        return self.context.objects

    @property
    def features(self) -> tuple[str, ...]:
        return self.context.attributes

    def check_alignment(self, class_ids: Sequence[str]) -> None:
        left, right = set(self.classes), set(class_ids)
        if left != right:
            raise KeyMismatchError(left - right, right - left)


def load_background(path, class_ids: Sequence[str] | None = None) -> BackgroundKnowledge:
    """Load background knowledge from a ``.cxt`` file or a 0/1 CSV table.

    The CSV layout is one row per class under a header ``class,feature1,...``.
    When class_ids is given, the loaded class set must match it exactly.
    """
    path = Path(path)
    if path.suffix.lower() == ".cxt":
        context = read_cxt(path)
    else:
        context = _read_background_csv(path)
    bk = BackgroundKnowledge(context)
    if class_ids is not None:
        bk.check_alignment(class_ids)
    return bk


def _read_background_csv(path: Path) -> FormalContext:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "class" or len(header) < 2:
            raise FormatError(path, f"header must be class,feature1,...; got {header!r}")
        features = header[1:]
        classes: list[str] = []
        rows: list[list[bool]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(
                    path, f"line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            classes.append(row[0])
            cells = []
            for cell in row[1:]:
                if cell not in ("0", "1"):
                    raise FormatError(path, f"line {line_no}: cells must be 0 or 1, got {cell!r}")
                cells.append(cell == "1")
            rows.append(cells)
    if not classes:
        raise FormatError(path, "no data rows")
    try:
        return FormalContext(classes, features, np.asarray(rows, dtype=bool))
    except ValueError as exc:
        raise FormatError(path, str(exc)) from exc


SIMILARITY_KINDS = ("jaccard", "overlap-coefficient")


@dataclass(frozen=True)
class SimilaritySpec:
    """A thresholded set-similarity defining the neuron-feature relation.

    Both scores are symmetric and give identical sets the value 1, so the
    induced relation is reflexive and symmetric for any threshold.
    """

    kind: str = "jaccard"
    threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in SIMILARITY_KINDS:
            raise ConfigError(
                f"unknown similarity {self.kind!r}; expected one of {', '.join(SIMILARITY_KINDS)}"
            )
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("similarity threshold must lie in [0, 1]")

    def score(self, a: frozenset, b: frozenset) -> float:
        if self.kind == "jaccard":
            union = len(a | b)
            return 1.0 if union == 0 else len(a & b) / union
        # overlap coefficient: |A & B| / min(|A|, |B|)
        if not a and not b:
            return 1.0
        if not a or not b:
            return 0.0
        return len(a & b) / min(len(a), len(b))

    def related(self, a: frozenset, b: frozenset) -> bool:
        return self.score(a, b) >= self.threshold


def symbolic_interpretation(
    sv: SymbolicView, bk: BackgroundKnowledge, sim: SimilaritySpec
) -> FormalContext:
    """The neuron-feature relation: n relates to S_m iff the class sets
    activating n and carrying S_m are similar enough.

    Only positive neuron attributes participate; barred attributes surface
    through selector polarity in subgroup discovery instead.
    """
    bk.check_alignment(sv.class_context.objects)
    h = sv.neuron_count
    neurons = sv.class_context.attributes[:h]
    neuron_classes = [frozenset(sv.class_context.derive_attributes([n])) for n in neurons]
    feature_classes = [frozenset(bk.context.derive_attributes([s])) for s in bk.features]
    incidence = np.zeros((len(neurons), len(bk.features)), dtype=bool)
    for i, cn in enumerate(neuron_classes):
        for j, cf in enumerate(feature_classes):
            incidence[i, j] = sim.related(cn, cf)
    return FormalContext(neurons, bk.features, incidence)


def neuron_features(interp: FormalContext, neuron: str) -> tuple[str, ...]:
    """All features related to one neuron in an interpretation context."""
    return interp.derive_objects([neuron])


# -- subgroup discovery --------------------------------------------------------


@dataclass(frozen=True, order=True)
class Selector:
    """One literal: an attribute required present or absent."""

    attribute: str
    present: bool = True

    def __str__(self) -> str:
        return self.attribute if self.present else f"!{self.attribute}"


@dataclass(frozen=True)
class Subgroup:
    """A conjunction of selectors with its quality and coverage statistics."""

    selectors: tuple[Selector, ...]
    quality: float
    size: int
    positives: int
    target_share: float

    def __post_init__(self):
        if self.size < self.positives:
            raise ValueError("subgroup size cannot be below its positive count")
        if len(set(self.selectors)) != len(self.selectors):
            raise ValueError("duplicate selectors in one subgroup")

    @property
    def description(self) -> str:
        if not self.selectors:
            return "true"
        return " and ".join(str(s) for s in self.selectors)


def _selector_cover(data: FormalContext, selector: Selector, full: int) -> int:
    mask = data.column_mask(data.attribute_index(selector.attribute))
    return mask if selector.present else full & ~mask


def wracc(n_total: int, p0: float, size: int, positives: int) -> float:
    if size == 0:
        return 0.0
    return (size / n_total) * (positives / size - p0)


def subgroup_discovery(
    data: FormalContext,
    target: Selector,
    beam_width: int = 20,
    max_depth: int = 3,
    top_k: int = 10,
    quality: str = "wracc",
    candidate_attributes: Sequence[str] | None = None,
) -> list[Subgroup]:
    """Beam search for attribute conjunctions that concentrate the target.

    Quality is WRAcc, (n_s/N)(p_s - p_0). Candidates span present and absent
    literals over every attribute except the target's own; conjunctions with
    empty cover are dropped. Ranking is quality descending, then fewer
    selectors, then selector order, so results are deterministic. The empty
    conjunction (the whole population, quality exactly 0) competes as well.
    """
    if beam_width < 1 or max_depth < 1 or top_k < 1:
        raise ConfigError("beam_width, max_depth and top_k must all be >= 1")
    if quality != "wracc":
        raise ConfigError(f"unknown quality function {quality!r}; only 'wracc' is available")
    n_total = data.object_count
    if n_total == 0:
        raise ConfigError("subgroup discovery needs a nonempty context")
    full = data.all_objects_mask
    target_cover = _selector_cover(data, target, full)
    positives_total = target_cover.bit_count()
    if positives_total == 0:
        raise ConfigError(f"target {target} covers no objects; no lift is defined")
    p0 = positives_total / n_total

    if candidate_attributes is None:
        pool_names = [m for m in data.attributes if m != target.attribute]
    else:
        pool_names = []
        for m in candidate_attributes:
            data.attribute_index(m)
            if m != target.attribute:
                pool_names.append(m)
    selector_pool: list[tuple[tuple[int, int], Selector, int]] = []
    for m in pool_names:
        j = data.attribute_index(m)
        for present in (True, False):
            selector = Selector(m, present)
            cover = _selector_cover(data, selector, full)
            selector_pool.append(((j, 0 if present else 1), selector, cover))
    selector_pool.sort(key=lambda item: item[0])

    def make_subgroup(selectors: tuple[Selector, ...], cover: int) -> Subgroup:
        size = cover.bit_count()
        positives = (cover & target_cover).bit_count()
        share = positives / size if size else 0.0
        return Subgroup(
            selectors=selectors,
            quality=wracc(n_total, p0, size, positives),
            size=size,
            positives=positives,
            target_share=share,
        )

    def sort_key(entry):
        subgroup, keys = entry
        return (-subgroup.quality, len(subgroup.selectors), keys)

    root = (make_subgroup((), full), ())
    pool: list[tuple[Subgroup, tuple]] = [root]
    beam: list[tuple[Subgroup, tuple, int, int]] = [(root[0], (), full, -1)]
    for _depth in range(max_depth):
        expansions: list[tuple[Subgroup, tuple, int, int]] = []
        for subgroup, keys, cover, last_rank in beam:
            for rank in range(last_rank + 1, len(selector_pool)):
                key, selector, sel_cover = selector_pool[rank]
                new_cover = cover & sel_cover
                if new_cover == 0:
                    continue
                refined = make_subgroup(subgroup.selectors + (selector,), new_cover)
                expansions.append((refined, keys + (key,), new_cover, rank))
        if not expansions:
            break
        expansions.sort(key=lambda entry: sort_key((entry[0], entry[1])))
        beam = expansions[:beam_width]
        pool.extend((subgroup, keys) for subgroup, keys, _cover, _rank in expansions)

    pool.sort(key=sort_key)
    return [subgroup for subgroup, _keys in pool[:top_k]]


# -- taxon explanation over the joined context ---------------------------------


@dataclass(frozen=True)
class ExplainParams:
    """Knobs for explain_taxon; level picks class rows or object rows."""

    beam_width: int = 20
    max_depth: int = 3
    top_k: int = 10
    level: str = "class"
    object_classes: Mapping[str, str] | None = None

    def __post_init__(self):
        if self.level not in ("class", "object"):
            raise ConfigError("level must be 'class' or 'object'")


DIRECTIONS = ("neurons_for_feature", "features_for_neuron")


def joined_context(
    sv: SymbolicView,
    bk: BackgroundKnowledge,
    level: str = "class",
    object_classes: Mapping[str, str] | None = None,
) -> FormalContext:
    """Rows with both neuron attributes and features, at class or object level.

    At object level every object inherits the features of its class, given
    by the object_classes map (for example the model's own predictions).
    """
    bk.check_alignment(sv.class_context.objects)
    if level == "class":
        base = sv.class_context
        feature_rows = [
            frozenset(bk.context.derive_objects([c])) for c in base.objects
        ]
    else:
        if object_classes is None:
            raise ConfigError("object-level explanation needs an object-to-class map")
        base = sv.object_context
        class_features = {
            c: frozenset(bk.context.derive_objects([c])) for c in bk.classes
        }
        feature_rows = []
        for g in base.objects:
            if g not in object_classes:
                raise UnknownIdError("object", g)
            c = object_classes[g]
            if c not in class_features:
                raise UnknownIdError("class", c)
            feature_rows.append(class_features[c])
    neuron_part = base.to_dense()
    feature_part = np.zeros((base.object_count, len(bk.features)), dtype=bool)
    for i, row in enumerate(feature_rows):
        for j, s in enumerate(bk.features):
            feature_part[i, j] = s in row
    attributes = base.attributes + bk.features
    return FormalContext(base.objects, attributes, np.concatenate([neuron_part, feature_part], axis=1))


def explain_taxon(
    sv: SymbolicView,
    bk: BackgroundKnowledge,
    taxon: str,
    direction: str = "neurons_for_feature",
    params: ExplainParams | None = None,
) -> list[Subgroup]:
    """Rules tying neurons to a feature (or features to a neuron).

    Builds the joined context, sets the target to the taxon on one side and
    searches conjunctions over the other side only.
    """
    params = params or ExplainParams()
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {', '.join(DIRECTIONS)}")
    ctx = joined_context(sv, bk, params.level, params.object_classes)
    neuron_attrs = sv.class_context.attributes
    if direction == "neurons_for_feature":
        if taxon not in bk.features:
            raise UnknownIdError("feature", taxon)
        search_space: Sequence[str] = neuron_attrs
    else:
        if taxon not in neuron_attrs:
            raise UnknownIdError("neuron attribute", taxon)
        search_space = bk.features
    return subgroup_discovery(
        ctx,
        Selector(taxon, True),
        beam_width=params.beam_width,
        max_depth=params.max_depth,
        top_k=params.top_k,
        candidate_attributes=search_space,
    )
