"""Well-founded reasoning for hybrid knowledge bases of EL+ ontologies and rules."""

from .classifier import (
    ClassificationMaps, NormalizedTBox, bridge_chains, check_ontology_consistency, classify, complete_tbox,
    instance_saturate, normalize, reduce_tbox, reduced_tbox, subsumes,
)
from .core import (
    BOTTOM, TOP, GCI, RI, Atom, HybridKB, KBError, Literal, Rule, SafetyError, Var,
    ground_program, validate_dl_safety,
)
from .parser import ParseError, UnsupportedConstructorError, parse_atom, parse_kb, parse_program, parse_query, serialize
from .slg import SLGEngine, answer_query, evaluate, export_forest, inconsistency_probe, query_literal
from .transform import (
    DoubledProgram, OntologyInconsistentError, build_combined, compile_rules, double_rules, translate_ontology,
)
from .wfs import (
    ThreeValuedModel, alternating_fixpoint, alternating_fixpoint_d, consistency_check, extract_model,
    greatest_unfounded_set, ground_doubled, ground_kb, mknf_model, wf_model,
)

from types import ModuleType as _Module

__all__ = sorted(n for n, v in list(globals().items()) if not n.startswith("_") and not isinstance(v, _Module))
