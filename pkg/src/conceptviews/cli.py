"""Command-line entry point: file-driven, reproducible analysis runs.

Every subcommand reads views or contexts from disk, writes plain CSV, JSON,
CXT, or DOT artifacts into the output directory, and records a manifest with
the echoed configuration, the tool version, and SHA-256 digests of all
inputs. Identical inputs and configuration produce byte-identical analytical
outputs; there are no timestamps.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConceptViewsError, ConfigError, FormatError, ResourceBudgetError
from .fca import (
    DEFAULT_CONCEPT_BUDGET,
    ConceptLattice,
    build_lattice,
    drop_negated_attributes,
    enumerate_concepts,
    export_dot,
    meet_irreducibles,
    read_cxt,
    shared_concept_counts,
    write_cxt,
)
from .interpretation import (
    ExplainParams,
    SimilaritySpec,
    explain_taxon,
    load_background,
    symbolic_interpretation,
)
from .scaling import (
    THRESHOLD_STRATEGIES,
    SymbolicView,
    Thresholds,
    class_separation,
    compute_thresholds,
    scale,
    split_statistics,
    symbolic_nn_classify,
)
from .similarity import (
    DEFAULT_MAX_GW_POINTS,
    DEFAULT_SEED,
    GwConfig,
    distance_matrix_over_models,
    pairwise_fidelity_matrix,
    space_from_view,
)
from .view import (
    ManyValuedView,
    Metric,
    fidelity,
    load_view,
    nn_classify,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_BUDGET = 4


# -- manifest and output helpers ------------------------------------------------


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _input_digests(paths) -> dict[str, str]:
    digests: dict[str, str] = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for child in sorted(p.rglob("*")):
                if child.is_file():
                    digests[child.as_posix()] = _sha256(child)
        elif p.is_file():
            digests[p.as_posix()] = _sha256(p)
        else:
            raise ConfigError(f"input path does not exist: {p}")
    return digests


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "inputs"}
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, Path):
            value = value.as_posix()
        elif isinstance(value, (list, tuple)):
            value = [v.as_posix() if isinstance(v, Path) else v for v in value]
        echo[key] = value
    return echo


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, args: argparse.Namespace, input_paths) -> None:
    manifest = {
        "command": args.command,
        "config": _config_echo(args),
        "version": __version__,
        "inputs": _input_digests(input_paths),
    }
    _write_json(out_dir / "manifest.json", manifest)


def _open_out(args: argparse.Namespace) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _say(args: argparse.Namespace, message: str) -> None:
    if not args.quiet:
        print(message)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_symbolic_dir(directory) -> SymbolicView:
    directory = Path(directory)
    objects_path = directory / "objects.cxt"
    classes_path = directory / "classes.cxt"
    for p in (objects_path, classes_path):
        if not p.is_file():
            raise ConfigError(f"symbolic view directory is missing {p.name}: {directory}")
    object_context = read_cxt(objects_path)
    class_context = read_cxt(classes_path)
    try:
        return SymbolicView(object_context=object_context, class_context=class_context)
    except ValueError as exc:
        raise FormatError(directory, str(exc)) from exc


def _require_predictions(view: ManyValuedView, where) -> dict[str, str]:
    if not view.model_predictions:
        raise ConfigError(f"view at {where} has no predictions.csv; fidelity needs one")
    missing = [g for g in view.object_ids if g not in view.model_predictions]
    if missing:
        raise ConfigError(
            f"predictions at {where} do not cover all objects (first missing: {missing[0]!r})"
        )
    return dict(view.model_predictions)


def _thresholds_from_args(args: argparse.Namespace, view: ManyValuedView) -> Thresholds:
    explicit = args.delta_o is not None or args.delta_w is not None
    if args.strategy is not None:
        if explicit:
            raise ConfigError("give either --strategy or explicit --delta-o/--delta-w, not both")
        return compute_thresholds(view, args.strategy)
    return Thresholds(
        args.delta_o if args.delta_o is not None else 0.0,
        args.delta_w if args.delta_w is not None else 0.0,
    )


def _threshold_payload(t: Thresholds) -> dict:
    def one(v):
        return [float(x) for x in v] if isinstance(v, np.ndarray) else float(v)

    return {"delta_object": one(t.delta_object), "delta_class": one(t.delta_class)}


# -- subcommands -----------------------------------------------------------------


def _cmd_stats(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    view = load_view(args.view)
    rows = []
    for name, matrix in (("object_view", view.object_view), ("class_view", view.class_view)):
        rows.append(
            [
                name,
                matrix.shape[0],
                matrix.shape[1],
                _fmt(matrix.mean()),
                _fmt(matrix.std()),
                _fmt(matrix.min()),
                _fmt(matrix.max()),
            ]
        )
        _say(
            args,
            f"{name}: {matrix.shape[0]}x{matrix.shape[1]} "
            f"mean={matrix.mean():.6f} std={matrix.std():.6f}",
        )
    _write_csv(out_dir / "stats.csv", ["matrix", "rows", "cols", "mean", "std", "min", "max"], rows)
    _write_manifest(out_dir, args, [args.view])
    return EXIT_OK


def _cmd_fidelity(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    view = load_view(args.view)
    reference = _require_predictions(view, args.view)
    metric = Metric.from_name(args.metric)
    surrogate = nn_classify(view, metric)
    score = fidelity(surrogate, reference)
    _write_csv(
        out_dir / "surrogate_predictions.csv",
        ["id", "class"],
        [[g, surrogate[g]] for g in view.object_ids],
    )
    agreements = sum(1 for g in surrogate if surrogate[g] == reference[g])
    _write_csv(
        out_dir / "fidelity.csv",
        ["metric", "objects", "agreements", "fidelity"],
        [[metric.value, len(surrogate), agreements, _fmt(score)]],
    )
    _say(args, f"view fidelity ({metric.value}): {score:.4f} on {len(surrogate)} objects")
    _write_manifest(out_dir, args, [args.view])
    return EXIT_OK


def _write_splits(out_dir: Path, view, thresholds, args) -> None:
    (o_above, o_below), (w_above, w_below) = split_statistics(view, thresholds)
    _write_csv(
        out_dir / "splits.csv",
        ["matrix", "above_percent", "below_percent"],
        [
            ["object_view", _fmt(o_above), _fmt(o_below)],
            ["class_view", _fmt(w_above), _fmt(w_below)],
        ],
    )
    _say(args, f"object split {o_above:.1f}/{o_below:.1f}, class split {w_above:.1f}/{w_below:.1f}")


def _cmd_scale(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    view = load_view(args.view)
    thresholds = _thresholds_from_args(args, view)
    sv = scale(view, thresholds)
    write_cxt(sv.object_context, out_dir / "objects.cxt")
    write_cxt(sv.class_context, out_dir / "classes.cxt")
    _write_json(out_dir / "thresholds.json", _threshold_payload(thresholds))
    _write_splits(out_dir, view, thresholds, args)
    _say(args, f"scaled {len(view.object_ids)} objects, {len(view.class_ids)} classes")
    _write_manifest(out_dir, args, [args.view])
    return EXIT_OK


def _cmd_symbolic_fidelity(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    view = load_view(args.view)
    reference = _require_predictions(view, args.view)
    thresholds = _thresholds_from_args(args, view)
    metric = Metric.from_name(args.metric)
    sv = scale(view, thresholds)
    surrogate = symbolic_nn_classify(sv, metric)
    score = fidelity(surrogate, reference)
    separation = class_separation(sv)
    (o_above, o_below), (w_above, w_below) = split_statistics(view, thresholds)
    _write_csv(
        out_dir / "symbolic_predictions.csv",
        ["id", "class"],
        [[g, surrogate[g]] for g in view.object_ids],
    )
    _write_csv(
        out_dir / "symbolic_fidelity.csv",
        [
            "metric",
            "object_above",
            "object_below",
            "class_above",
            "class_below",
            "fidelity",
            "class_separation",
        ],
        [
            [
                metric.value,
                _fmt(o_above),
                _fmt(o_below),
                _fmt(w_above),
                _fmt(w_below),
                _fmt(score),
                _fmt(separation),
            ]
        ],
    )
    _write_json(out_dir / "thresholds.json", _threshold_payload(thresholds))
    _say(
        args,
        f"symbolic fidelity ({metric.value}): {score:.4f}; class separation {separation:.3f}; "
        f"split {o_above:.1f}/{o_below:.1f}",
    )
    _write_manifest(out_dir, args, [args.view])
    return EXIT_OK


def _concept_names(ctx, concept) -> tuple[str, str]:
    extent = "|".join(concept.extent_names(ctx))
    intent = "|".join(concept.intent_names(ctx))
    return extent, intent


def _cmd_lattice(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    ctx = read_cxt(args.context)
    if args.positive_only:
        try:
            ctx = drop_negated_attributes(ctx)
        except ValueError as exc:
            raise FormatError(args.context, str(exc)) from exc
    concepts = enumerate_concepts(ctx, max_concepts=args.max_concepts)
    summary: dict[str, object] = {
        "objects": ctx.object_count,
        "attributes": ctx.attribute_count,
        "concepts": len(concepts),
    }
    if args.count_only:
        _write_json(out_dir / "summary.json", summary)
        _say(args, f"{len(concepts)} concepts")
        _write_manifest(out_dir, args, [args.context])
        return EXIT_OK
    lattice = build_lattice(ctx, concepts)
    rows = []
    for i, concept in enumerate(lattice.concepts):
        extent, intent = _concept_names(ctx, concept)
        rows.append([i, concept.extent.bit_count(), extent, intent])
    _write_csv(out_dir / "concepts.csv", ["index", "extent_size", "extent", "intent"], rows)
    cover_rows = []
    for lower, uppers in enumerate(lattice.covers):
        for upper in uppers:
            cover_rows.append([lower, upper])
    _write_csv(out_dir / "covers.csv", ["lower", "upper"], cover_rows)
    summary["cover_edges"] = len(cover_rows)
    if args.mi:
        mi = meet_irreducibles(lattice)
        mi_rows = []
        for concept in mi:
            extent, intent = _concept_names(ctx, concept)
            mi_rows.append([lattice.index_of_extent(concept.extent), extent, intent])
        _write_csv(out_dir / "meet_irreducibles.csv", ["index", "extent", "intent"], mi_rows)
        summary["meet_irreducibles"] = len(mi)
        _say(args, f"{len(mi)} meet-irreducible concepts")
    if args.shared:
        if not args.objects:
            raise ConfigError("--shared needs --objects a,b,c")
        names = [s for s in args.objects.split(",") if s]
        counts = shared_concept_counts(lattice, names)
        header = ["object", *names]
        _write_csv(
            out_dir / "shared_counts.csv",
            header,
            [[g, *counts.counts[i].tolist()] for i, g in enumerate(names)],
        )
        _write_csv(
            out_dir / "shared_fractions.csv",
            header,
            [[g, *(_fmt(x) for x in counts.fractions[i])] for i, g in enumerate(names)],
        )
    if args.dot:
        dot_text = export_dot(lattice, max_size=args.max_dot)
        dot_path = out_dir / args.dot
        with open(dot_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dot_text)
    _write_json(out_dir / "summary.json", summary)
    _say(args, f"{len(concepts)} concepts, {len(cover_rows)} cover edges")
    _write_manifest(out_dir, args, [args.context])
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    if len(args.views) < 2:
        raise ConfigError("compare needs at least two --views directories")
    metric = Metric.from_name(args.metric)
    views = [load_view(d) for d in args.views]
    labels = []
    for i, d in enumerate(args.views):
        base = Path(d).name or f"view{i}"
        label = base
        k = 1
        while label in labels:
            label = f"{base}#{k}"
            k += 1
        labels.append(label)
    # one seed for every space: identical views subsample identical rows, so
    # duplicated inputs stay at distance 0 and object-side comparisons across
    # models of the same dataset sample the same row indices
    spaces = [
        space_from_view(view, args.side, metric, args.fraction, seed=args.seed)
        for view in views
    ]
    cfg = GwConfig(seed=args.seed, max_points=args.max_points)
    comparison = distance_matrix_over_models(spaces, labels, cfg, threads=args.threads)
    _write_csv(
        out_dir / "distances.csv",
        ["model", *labels],
        [
            [labels[i], *(_fmt(x) for x in comparison.distances[i])]
            for i in range(len(labels))
        ],
    )
    _write_json(out_dir / "dendrogram.json", comparison.dendrogram)
    if all(v.model_predictions for v in views):
        try:
            preds = [_require_predictions(v, d) for v, d in zip(views, args.views)]
            fid = pairwise_fidelity_matrix(preds)
        except ConceptViewsError:
            pass
        else:
            _write_csv(
                out_dir / "fidelity_matrix.csv",
                ["model", *labels],
                [[labels[i], *(_fmt(x) for x in fid[i])] for i in range(len(labels))],
            )
    _say(args, f"compared {len(labels)} models on {args.side} rows ({metric.value})")
    _write_manifest(out_dir, args, list(args.views))
    return EXIT_OK


def _cmd_interpret(args: argparse.Namespace) -> int:
    out_dir = _open_out(args)
    sv = _load_symbolic_dir(args.symbolic)
    bk = load_background(args.background, class_ids=sv.class_context.objects)
    sim = SimilaritySpec(kind=args.similarity, threshold=args.theta)
    interp = symbolic_interpretation(sv, bk, sim)
    write_cxt(interp, out_dir / "interpretation.cxt")
    inputs = [args.symbolic, args.background]
    rules_payload = []
    if args.target is not None:
        direction = (
            "neurons_for_feature" if args.direction == "neurons" else "features_for_neuron"
        )
        object_classes = None
        if args.level == "object":
            if args.view is None:
                raise ConfigError("--level object needs --view <dir> for its predictions")
            view = load_view(args.view)
            object_classes = _require_predictions(view, args.view)
            inputs.append(args.view)
        params = ExplainParams(
            beam_width=args.beam,
            max_depth=args.depth,
            top_k=args.top,
            level=args.level,
            object_classes=object_classes,
        )
        subgroups = explain_taxon(sv, bk, args.target, direction, params)
        for sg in subgroups:
            rules_payload.append(
                {
                    "description": sg.description,
                    "selectors": [
                        {"attribute": s.attribute, "present": s.present} for s in sg.selectors
                    ],
                    "quality": sg.quality,
                    "size": sg.size,
                    "share": sg.target_share,
                }
            )
        _say(args, f"{len(subgroups)} rules for target {args.target!r} ({direction})")
        if subgroups and not args.quiet:
            best = subgroups[0]
            print(
                f"best: {best.description} (share {best.target_share:.2f}, size {best.size})"
            )
    _write_json(out_dir / "rules.json", rules_payload)
    _write_manifest(out_dir, args, inputs)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=1, help="worker threads where supported")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="conceptviews",
        description="Conceptual views of trained classifiers: scaling, lattices, comparison, rules.",
    )
    parser.add_argument("--version", action="version", version=f"conceptviews {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="value statistics of a view")
    p.add_argument("--view", required=True, help="view directory")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("fidelity", parents=[common], help="1-NN surrogate fidelity of a view")
    p.add_argument("--view", required=True)
    p.add_argument("--metric", default="euclidean", help="euclidean or cosine")
    p.set_defaults(func=_cmd_fidelity)

    def add_threshold_flags(p):
        p.add_argument("--delta-o", type=float, default=None, help="object threshold")
        p.add_argument("--delta-w", type=float, default=None, help="class threshold")
        p.add_argument(
            "--strategy",
            choices=THRESHOLD_STRATEGIES,
            default=None,
            help="derive thresholds from the view instead of explicit deltas",
        )

    p = sub.add_parser("scale", parents=[common], help="dichotomic scaling to .cxt contexts")
    p.add_argument("--view", required=True)
    add_threshold_flags(p)
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser(
        "symbolic-fidelity", parents=[common], help="1-NN fidelity of the scaled view"
    )
    p.add_argument("--view", required=True)
    p.add_argument("--metric", default="euclidean")
    add_threshold_flags(p)
    p.set_defaults(func=_cmd_symbolic_fidelity)

    p = sub.add_parser("lattice", parents=[common], help="concept lattice of a .cxt context")
    p.add_argument("--context", required=True, help="Burmeister .cxt file")
    p.add_argument("--positive-only", action="store_true", help="drop not_* attribute columns")
    p.add_argument("--count-only", action="store_true", help="only count concepts")
    p.add_argument("--mi", action="store_true", help="list meet-irreducible concepts")
    p.add_argument("--dot", default=None, metavar="FILE", help="write a DOT line diagram")
    p.add_argument("--objects", default=None, help="comma-separated objects for --shared")
    p.add_argument("--shared", action="store_true", help="shared-concept counts for --objects")
    p.add_argument("--max-concepts", type=int, default=DEFAULT_CONCEPT_BUDGET)
    p.add_argument("--max-dot", type=int, default=5000, help="largest lattice to export as DOT")
    p.set_defaults(func=_cmd_lattice)

    p = sub.add_parser("compare", parents=[common], help="Gromov-Wasserstein model comparison")
    p.add_argument("--views", nargs="+", required=True, help="two or more view directories")
    p.add_argument("--side", choices=("object", "class"), default="class")
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--fraction", type=float, default=1.0, help="subsample fraction in (0,1]")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-points", type=int, default=DEFAULT_MAX_GW_POINTS)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("interpret", parents=[common], help="neuron-feature relation and rules")
    p.add_argument("--symbolic", required=True, help="directory with objects.cxt and classes.cxt")
    p.add_argument("--background", required=True, help="background knowledge (.cxt or CSV)")
    p.add_argument("--theta", type=float, default=0.5, help="similarity threshold in [0,1]")
    p.add_argument(
        "--similarity", choices=("jaccard", "overlap-coefficient"), default="jaccard"
    )
    p.add_argument("--target", default=None, help="feature (or neuron) to explain")
    p.add_argument("--direction", choices=("neurons", "features"), default="neurons")
    p.add_argument("--beam", type=int, default=20)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--level", choices=("class", "object"), default="class")
    p.add_argument("--view", default=None, help="view directory (needed for --level object)")
    p.set_defaults(func=_cmd_interpret)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
