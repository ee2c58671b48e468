"""taxoforge: bottom-up domain taxonomy construction and evaluation.

Grows a polyhierarchical taxonomy from a curated seed term list by
combining a domain ontology dump, a general knowledge base, and chat
models; cleans and ranks the candidate graphs, merges them, and scores
the result with agreement statistics.
"""

from .graph import TaxonomyGraph, Term, Edge, canonicalize_label
from .seeds import SeedList, parse_seed, generic_head
from .metrics import MetricsReport, compute_report
from .selection import DecisionMatrix, TopsisResult, build_matrix, topsis, pareto_front
from .agreement import AnnotationTable, krippendorff_alpha

__version__ = "0.1.0"

__all__ = [
    "TaxonomyGraph",
    "Term",
    "Edge",
    "canonicalize_label",
    "SeedList",
    "parse_seed",
    "generic_head",
    "MetricsReport",
    "compute_report",
    "DecisionMatrix",
    "TopsisResult",
    "build_matrix",
    "topsis",
    "pareto_front",
    "AnnotationTable",
    "krippendorff_alpha",
    "__version__",
]
