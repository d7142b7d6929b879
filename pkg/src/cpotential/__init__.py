"""Potentials, antiderivatives and cyclic monotonicity for costs that may be infinite."""

__version__ = "0.1.0"

from .extreal import NEG_INF, POS_INF, UndefinedSumError, ext_add, ext_inf, ext_sup, format_ext, parse_ext
from .costs import CostSpec, FunctionSpec, PointPair, cost_matrix, eval_cost, in_domain, pt, tabulated
from .audit import conjugate_transform, monotonicity_audit, rectangle_sum
from .instance import Instance, InstanceError, Segment, parse_instance, write_instance
from .graph import (BudgetExceeded, VariationGraph, build_variation_graph, condensation, enumerate_walks,
                    semi_connectivity, walk_classification)
from .variation import VariationMatrix, all_pairs_variation, find_positive_cycle, max_inner_variation, variation_growth
from .potentials import (Antiderivative, Potential, check_subdifferential, collapse_to_psi, combine_components,
                         construct_auto, construct_from_boundary, construct_incremental, extend_potential,
                         verify_antiderivative)
from .metric import ball_chain_components, continuity_extension, maximal_ball_radius
from .chainext import SegmentComplex, chain_extension, extension_pipeline, is_chain

__all__ = [n for n in dir() if not n.startswith("_")]
