"""Formal concept analysis core.

Contexts store their incidence relation as per-object and per-attribute
bitsets (Python ints), so derivations are word-parallel intersections and
concept enumeration (Next Closure, lectic order over attribute intents)
stays usable for the attribute counts this toolkit produces (2h columns
for symbolic views).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import FormatError, ResourceBudgetError, UnknownIdError

DEFAULT_CONCEPT_BUDGET = 10_000_000
DEFAULT_DOT_EXPORT_LIMIT = 5000

# Negated (dichotomic) attributes are named by prefixing their positive twin.
NEGATION_PREFIX = "not_"


def negated_attribute(name: str) -> str:
    return NEGATION_PREFIX + name


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        # int() guards against numpy integers, which would cap the mask at 64 bits
        mask |= 1 << int(i)
    return mask


def lectic_less(intent_a: int, intent_b: int) -> bool:
    """Lectic order on intents: the smallest differing attribute decides."""
    diff = intent_a ^ intent_b
    if diff == 0:
        return False
    low = diff & -diff
    return bool(intent_b & low)


class FormalContext:
    """A formal context: objects, attributes, and a binary incidence relation."""

    __slots__ = ("objects", "attributes", "_rows", "_cols", "_object_index", "_attribute_index")

    def __init__(self, objects: Sequence[str], attributes: Sequence[str], incidence):
        self.objects = tuple(objects)
        self.attributes = tuple(attributes)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object names")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("duplicate attribute names")
        dense = np.asarray(incidence, dtype=bool)
        if dense.shape != (len(self.objects), len(self.attributes)):
            raise ValueError(
                f"incidence shape {dense.shape} does not match "
                f"{len(self.objects)} objects x {len(self.attributes)} attributes"
            )
        self._rows = tuple(mask_of(np.flatnonzero(dense[i])) for i in range(dense.shape[0]))
        self._cols = tuple(mask_of(np.flatnonzero(dense[:, j])) for j in range(dense.shape[1]))
        self._object_index = {g: i for i, g in enumerate(self.objects)}
        self._attribute_index = {m: j for j, m in enumerate(self.attributes)}

    # -- basic geometry -----------------------------------------------------

    @property
    def object_count(self) -> int:
        return len(self.objects)

    @property
    def attribute_count(self) -> int:
        return len(self.attributes)

    @property
    def all_objects_mask(self) -> int:
        return (1 << len(self.objects)) - 1

    @property
    def all_attributes_mask(self) -> int:
        return (1 << len(self.attributes)) - 1

    def object_index(self, name: str) -> int:
        try:
            return self._object_index[name]
        except KeyError:
            raise UnknownIdError("object", name) from None

    def attribute_index(self, name: str) -> int:
        try:
            return self._attribute_index[name]
        except KeyError:
            raise UnknownIdError("attribute", name) from None

    def row_mask(self, i: int) -> int:
        return self._rows[i]

    def column_mask(self, j: int) -> int:
        return self._cols[j]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((len(self.objects), len(self.attributes)), dtype=bool)
        for i, row in enumerate(self._rows):
            for j in iter_bits(row):
                dense[i, j] = True
        return dense

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FormalContext)
            and self.objects == other.objects
            and self.attributes == other.attributes
            and self._rows == other._rows
        )

    def __hash__(self):
        return hash((self.objects, self.attributes, self._rows))

    def __repr__(self) -> str:
        return f"FormalContext({len(self.objects)} objects, {len(self.attributes)} attributes)"

    # -- derivation operators ------------------------------------------------

    def intent_of(self, extent_mask: int) -> int:
        """Attributes common to all objects in the extent; empty extent -> all."""
        intent = self.all_attributes_mask
        for i in iter_bits(extent_mask):
            intent &= self._rows[i]
            if intent == 0:
                break
        return intent

    def extent_of(self, intent_mask: int) -> int:
        """Objects having all attributes in the intent; empty intent -> all."""
        extent = self.all_objects_mask
        for j in iter_bits(intent_mask):
            extent &= self._cols[j]
            if extent == 0:
                break
        return extent

    def derive_objects(self, names: Iterable[str]) -> tuple[str, ...]:
        mask = mask_of(self.object_index(g) for g in names)
        return tuple(self.attributes[j] for j in iter_bits(self.intent_of(mask)))

    def derive_attributes(self, names: Iterable[str]) -> tuple[str, ...]:
        mask = mask_of(self.attribute_index(m) for m in names)
        return tuple(self.objects[i] for i in iter_bits(self.extent_of(mask)))

    def closure_mask(self, intent_mask: int) -> tuple[int, int]:
        """Return (extent, closed intent) for an attribute set."""
        extent = self.extent_of(intent_mask)
        return extent, self.intent_of(extent)

    def closure(self, names: Iterable[str]) -> tuple[str, ...]:
        mask = mask_of(self.attribute_index(m) for m in names)
        _, closed = self.closure_mask(mask)
        return tuple(self.attributes[j] for j in iter_bits(closed))


@dataclass(frozen=True)
class FormalConcept:
    """An (extent, intent) bitset pair. Use ``concept_of`` to build a checked one."""

    extent: int
    intent: int

    def extent_names(self, ctx: FormalContext) -> tuple[str, ...]:
        return tuple(ctx.objects[i] for i in iter_bits(self.extent))

    def intent_names(self, ctx: FormalContext) -> tuple[str, ...]:
        return tuple(ctx.attributes[j] for j in iter_bits(self.intent))


def concept_of(ctx: FormalContext, objects: Iterable[str], attributes: Iterable[str]) -> FormalConcept:
    """Build a FormalConcept, checking the closure property A^I = B, B^I = A."""
    extent = mask_of(ctx.object_index(g) for g in objects)
    intent = mask_of(ctx.attribute_index(m) for m in attributes)
    if ctx.intent_of(extent) != intent or ctx.extent_of(intent) != extent:
        raise ValueError("extent/intent pair is not closed")
    return FormalConcept(extent, intent)


def iter_concepts(ctx: FormalContext, max_concepts: int = DEFAULT_CONCEPT_BUDGET) -> Iterator[FormalConcept]:
    """All formal concepts in lectic order of intents (Next Closure)."""
    m = ctx.attribute_count
    full = ctx.all_attributes_mask
    extent, intent = ctx.closure_mask(0)
    yield FormalConcept(extent, intent)
    count = 1
    current = intent
    while current != full:
        found = False
        for i in reversed(range(m)):
            bit = 1 << i
            if current & bit:
                continue
            candidate = (current & (bit - 1)) | bit
            ext, closed = ctx.closure_mask(candidate)
            # Lectic successor test: the closure must add nothing below i.
            if (closed & ~candidate) & (bit - 1) == 0:
                count += 1
                if count > max_concepts:
                    raise ResourceBudgetError(
                        f"concept budget of {max_concepts} exceeded"
                    )
                yield FormalConcept(ext, closed)
                current = closed
                found = True
                break
        if not found:  # pragma: no cover - full intent is always reached
            break


def enumerate_concepts(ctx: FormalContext, max_concepts: int = DEFAULT_CONCEPT_BUDGET) -> list[FormalConcept]:
    return list(iter_concepts(ctx, max_concepts=max_concepts))


def count_concepts(ctx: FormalContext, max_concepts: int = DEFAULT_CONCEPT_BUDGET) -> int:
    n = 0
    for _ in iter_concepts(ctx, max_concepts=max_concepts):
        n += 1
    return n


def _pack_extents(concepts: Sequence[FormalConcept], object_count: int) -> np.ndarray:
    """Extents as a (n_concepts, words) uint64 matrix for vectorized subset tests."""
    words = max(1, (object_count + 63) // 64)
    packed = np.zeros((len(concepts), words), dtype=np.uint64)
    word_mask = (1 << 64) - 1
    for idx, c in enumerate(concepts):
        e = c.extent
        w = 0
        while e:
            packed[idx, w] = e & word_mask
            e >>= 64
            w += 1
    return packed


class ConceptLattice:
    """All concepts of a context ordered by extent inclusion, with cover edges.

    ``covers[i]`` lists the indices of the upper covers of concept ``i``
    (strictly larger extents with nothing in between).
    """

    __slots__ = ("context", "concepts", "covers", "_extent_index")

    def __init__(self, context: FormalContext, concepts: Sequence[FormalConcept], covers: Sequence[tuple[int, ...]]):
        self.context = context
        self.concepts = tuple(concepts)
        self.covers = tuple(tuple(c) for c in covers)
        self._extent_index = {c.extent: i for i, c in enumerate(self.concepts)}
        if len(self._extent_index) != len(self.concepts):
            raise ValueError("concepts are not pairwise distinct")

    def __len__(self) -> int:
        return len(self.concepts)

    def index_of_extent(self, extent_mask: int) -> int:
        return self._extent_index[extent_mask]


def build_lattice(
    ctx: FormalContext,
    concepts: Sequence[FormalConcept] | None = None,
    max_concepts: int = DEFAULT_CONCEPT_BUDGET,
) -> ConceptLattice:
    """Compute the cover relation of the concept set (enumerated if not given)."""
    if concepts is None:
        concepts = enumerate_concepts(ctx, max_concepts=max_concepts)
    concepts = list(concepts)
    n = len(concepts)
    if n == 0:
        raise ValueError("a concept lattice needs at least one concept")

    sizes = np.array([c.extent.bit_count() for c in concepts])
    order = np.argsort(sizes, kind="stable")
    packed = _pack_extents(concepts, ctx.object_count)

    covers: list[tuple[int, ...]] = [()] * n
    for i in range(n):
        ei = packed[i]
        # j is a strict superset of i iff extent_i & ~extent_j == 0 and sizes differ.
        not_superset = np.bitwise_and(ei[None, :], ~packed).any(axis=1)
        uppers: list[int] = []
        for j in order:
            j = int(j)
            if sizes[j] <= sizes[i] or not_superset[j]:
                continue
            ej_words = packed[j]
            dominated = False
            for k in uppers:
                # skip j if an already-kept cover sits strictly below it
                if not np.bitwise_and(packed[k], ~ej_words).any():
                    dominated = True
                    break
            if not dominated:
                uppers.append(j)
        covers[i] = tuple(sorted(uppers))

    lattice = ConceptLattice(ctx, concepts, covers)
    _check_bounds(lattice)
    return lattice


def _check_bounds(lattice: ConceptLattice) -> None:
    tops = [i for i, uppers in enumerate(lattice.covers) if not uppers]
    if len(tops) != 1:
        raise ValueError("concept set has no unique top; it is not a complete lattice")
    if len(lattice) == 1:
        return
    has_lower = {j for uppers in lattice.covers for j in uppers}
    bottoms = [i for i in range(len(lattice)) if i not in has_lower]
    if len(bottoms) != 1:
        raise ValueError("concept set has no unique bottom; it is not a complete lattice")


def meet_irreducibles(lattice: ConceptLattice) -> list[FormalConcept]:
    """Concepts with exactly one upper cover; never more than |attributes| many."""
    return [c for c, uppers in zip(lattice.concepts, lattice.covers) if len(uppers) == 1]


def concepts_containing(lattice: ConceptLattice, obj: str) -> list[FormalConcept]:
    """All concepts whose extent contains the object, in lectic order."""
    bit = 1 << lattice.context.object_index(obj)
    return [c for c in lattice.concepts if c.extent & bit]


@dataclass(frozen=True)
class SharedConceptCounts:
    """Pairwise shared-concept counts; fractions are row count / row diagonal."""

    objects: tuple[str, ...]
    counts: np.ndarray
    fractions: np.ndarray


def shared_concept_counts(lattice: ConceptLattice, objs: Sequence[str]) -> SharedConceptCounts:
    indices = [lattice.context.object_index(g) for g in objs]
    membership = np.zeros((len(indices), len(lattice.concepts)), dtype=bool)
    for row, gi in enumerate(indices):
        bit = 1 << gi
        for col, c in enumerate(lattice.concepts):
            if c.extent & bit:
                membership[row, col] = True
    counts = membership.astype(np.int64) @ membership.astype(np.int64).T
    diag = np.diagonal(counts).astype(float)
    safe = np.where(diag == 0, 1.0, diag)
    fractions = counts / safe[:, None]
    return SharedConceptCounts(tuple(objs), counts, fractions)


def restrict_to_positive(symbolic_view) -> tuple[FormalContext, FormalContext]:
    """Drop the negated attribute columns of both contexts of a symbolic view."""
    return (
        drop_negated_attributes(symbolic_view.object_context),
        drop_negated_attributes(symbolic_view.class_context),
    )


def drop_negated_attributes(ctx: FormalContext) -> FormalContext:
    m = ctx.attribute_count
    if m % 2 != 0:
        raise ValueError("attribute count is odd; not a dichotomically scaled context")
    h = m // 2
    for j in range(h):
        if ctx.attributes[h + j] != negated_attribute(ctx.attributes[j]):
            raise ValueError(
                f"attribute layout violated: column {h + j} is {ctx.attributes[h + j]!r}, "
                f"expected {negated_attribute(ctx.attributes[j])!r}"
            )
    dense = ctx.to_dense()[:, :h]
    return FormalContext(ctx.objects, ctx.attributes[:h], dense)


# -- DOT export ---------------------------------------------------------------


def _dot_quote(name: str) -> str:
    return name.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(lattice: ConceptLattice, max_size: int = DEFAULT_DOT_EXPORT_LIMIT) -> str:
    """Hasse diagram as a DOT digraph with reduced labeling.

    Each attribute is shown at the concept where it is introduced (its
    attribute concept), each object at its object concept; edges point from a
    concept to its upper covers.
    """
    if len(lattice) > max_size:
        raise ResourceBudgetError(
            f"lattice has {len(lattice)} concepts, above the export limit of {max_size}"
        )
    ctx = lattice.context
    attr_intro: dict[int, list[str]] = {}
    for j, name in enumerate(ctx.attributes):
        extent = ctx.extent_of(1 << j)
        attr_intro.setdefault(lattice.index_of_extent(extent), []).append(name)
    obj_intro: dict[int, list[str]] = {}
    for i, name in enumerate(ctx.objects):
        extent = ctx.extent_of(ctx.row_mask(i))
        obj_intro.setdefault(lattice.index_of_extent(extent), []).append(name)

    lines = ["digraph lattice {", "  node [shape=box];"]
    for idx in range(len(lattice)):
        attrs = ", ".join(attr_intro.get(idx, []))
        objs = ", ".join(obj_intro.get(idx, []))
        label = _dot_quote(attrs) + ("\\n" + _dot_quote(objs) if objs else "")
        lines.append(f'  c{idx} [label="{label}"];')
    for idx, uppers in enumerate(lattice.covers):
        for j in uppers:
            lines.append(f"  c{idx} -> c{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_EDGE = re.compile(r"^\s*c(\d+) -> c(\d+);$")


def parse_dot_edges(text: str) -> set[tuple[int, int]]:
    """Edge set of a DOT export, for round-trip checks."""
    edges = set()
    for line in text.splitlines():
        m = _DOT_EDGE.match(line)
        if m:
            edges.add((int(m.group(1)), int(m.group(2))))
    return edges


# -- Burmeister .cxt files ------------------------------------------------------


def read_cxt(path) -> FormalContext:
    """Read a Burmeister .cxt file (strict about the documented layout)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            raw = fh.read()
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    lines = raw.split("\n")
    if len(lines) < 5:
        raise FormatError(path, "truncated header")
    if lines[0] != "B":
        raise FormatError(path, f"first line must be 'B', got {lines[0]!r}")
    if lines[1] != "":
        raise FormatError(path, "second line must be blank")
    try:
        n_objects = int(lines[2])
        n_attributes = int(lines[3])
    except ValueError:
        raise FormatError(path, "lines 3 and 4 must be the object and attribute counts") from None
    if lines[4] != "":
        raise FormatError(path, "fifth line must be blank")
    body = lines[5:]
    needed = n_objects + n_attributes + n_objects
    if len(body) < needed:
        raise FormatError(path, f"expected {needed} content lines, found {len(body)}")
    objects = body[:n_objects]
    attributes = body[n_objects:n_objects + n_attributes]
    rows = body[n_objects + n_attributes:needed]
    trailing = [line for line in body[needed:] if line != ""]
    if trailing:
        raise FormatError(path, f"unexpected trailing content: {trailing[0]!r}")
    dense = np.zeros((n_objects, n_attributes), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != n_attributes or set(row) - {"X", "."}:
            raise FormatError(path, f"incidence row {i + 1} must be {n_attributes} 'X'/'.' characters")
        dense[i] = [ch == "X" for ch in row]
    try:
        return FormalContext(objects, attributes, dense)
    except ValueError as exc:
        raise FormatError(path, str(exc)) from exc


def write_cxt(ctx: FormalContext, path) -> None:
    dense = ctx.to_dense()
    lines = ["B", "", str(ctx.object_count), str(ctx.attribute_count), ""]
    lines.extend(ctx.objects)
    lines.extend(ctx.attributes)
    for i in range(ctx.object_count):
        lines.append("".join("X" if dense[i, j] else "." for j in range(ctx.attribute_count)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
