"""Exact Banzhaf and Shapley attribution for query lineage."""
from .attribution import (
    AttributionReport, OutcomeDistribution, attribute, banzhaf_by_substitution,
    expected_value, gradient_banzhaf, gradient_shapley, linear_aggregate_attribution,
    minmax_attribution_counts, minmax_gradient, model_counts, node_annotations,
    root_distribution, shapley_coefficients, value_counts,
)
from .compile import (
    common_variables, compile_aggregate, compile_lineage, expand_readonce,
    independent_components, lifted_compile,
)
from .dtree import check_structure, to_text, tree_stats
from .errors import AttributionTimeout, ContractViolation, Deadline, LineageError
from .lifting import (
    bnp_to_lifted, check_lifted, cofactor_partition, interchangeable_partition,
    is_saturated, lift, lift_and, lift_or,
)
from .lineage import (
    Bottom, BnpExpression, DnfFormula, Monoid, MonoidKind, bnp, canonicalize,
    eval_bnp, eval_dnf, evaluate,
)
from .oracle import brute_banzhaf, brute_counts, brute_shapley

__version__ = "0.1.0"
