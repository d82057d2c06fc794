"""Conceptual views of trained classifiers.

The toolkit turns a classifier's last-hidden-layer activations and output
weights into a many-valued view, scales it into symbolic formal contexts,
and analyzes both: surrogate 1-NN classification with fidelity scoring,
concept lattices with meet-irreducibles and shared-concept counts,
Gromov-Wasserstein model comparison, and rule extraction against background
knowledge.
"""

__version__ = "0.1.0"

from .errors import (
    ConceptViewsError,
    ConfigError,
    FormatError,
    KeyMismatchError,
    ResourceBudgetError,
    UnknownIdError,
)
from .fca import (
    ConceptLattice,
    FormalConcept,
    FormalContext,
    build_lattice,
    concept_of,
    concepts_containing,
    count_concepts,
    drop_negated_attributes,
    enumerate_concepts,
    export_dot,
    iter_concepts,
    meet_irreducibles,
    read_cxt,
    restrict_to_positive,
    shared_concept_counts,
    write_cxt,
)
from .interpretation import (
    BackgroundKnowledge,
    ExplainParams,
    Selector,
    SimilaritySpec,
    Subgroup,
    explain_taxon,
    joined_context,
    load_background,
    neuron_features,
    subgroup_discovery,
    symbolic_interpretation,
)
from .scaling import (
    SymbolicView,
    Thresholds,
    class_separation,
    compute_thresholds,
    scale,
    split_statistics,
    symbolic_nn_classify,
)
from .similarity import (
    GwConfig,
    GwResult,
    MetricMeasureSpace,
    distance_matrix_over_models,
    gw_distance,
    pairwise_fidelity_matrix,
    space_from_view,
    uniform_space,
)
from .view import (
    LogitBreakdown,
    ManyValuedView,
    Metric,
    class_vector,
    fidelity,
    load_view,
    logit,
    logit_breakdown,
    logit_matrix,
    nn_classify,
    object_class_distances,
    object_vector,
    pairwise_distances,
    save_view,
)

__all__ = [
    "__version__",
    "ConceptViewsError",
    "ConfigError",
    "FormatError",
    "KeyMismatchError",
    "ResourceBudgetError",
    "UnknownIdError",
    "ConceptLattice",
    "FormalConcept",
    "FormalContext",
    "build_lattice",
    "concept_of",
    "concepts_containing",
    "count_concepts",
    "drop_negated_attributes",
    "enumerate_concepts",
    "export_dot",
    "iter_concepts",
    "meet_irreducibles",
    "read_cxt",
    "restrict_to_positive",
    "shared_concept_counts",
    "write_cxt",
    "BackgroundKnowledge",
    "ExplainParams",
    "Selector",
    "SimilaritySpec",
    "Subgroup",
    "explain_taxon",
    "joined_context",
    "load_background",
    "neuron_features",
    "subgroup_discovery",
    "symbolic_interpretation",
    "SymbolicView",
    "Thresholds",
    "class_separation",
    "compute_thresholds",
    "scale",
    "split_statistics",
    "symbolic_nn_classify",
    "GwConfig",
    "GwResult",
    "MetricMeasureSpace",
    "distance_matrix_over_models",
    "gw_distance",
    "pairwise_fidelity_matrix",
    "space_from_view",
    "uniform_space",
    "LogitBreakdown",
    "ManyValuedView",
    "Metric",
    "class_vector",
    "fidelity",
    "load_view",
    "logit",
    "logit_breakdown",
    "logit_matrix",
    "nn_classify",
    "object_class_distances",
    "object_vector",
    "pairwise_distances",
    "save_view",
]
