"""maslovkit: index theory for paths of symplectic matrices.

The package computes the Maslov-type index pair of a symplectic path at a
unit-circle parameter, the Bott-type decomposition of iterated indices,
splitting numbers and the closed iteration formula built from them, the
iteration inequalities, and the common index jump search used to force
minimal periods.
"""

from .corpus import CorpusEntry, corpus, random_descriptor, random_path
from .core import (
    SpectrumOnU,
    SymplecticMatrix,
    UnitCirclePoint,
    certify_symplectic,
    conjugate,
    elliptic_height,
    singular_detector,
    spectrum_on_unit_circle,
    structure_matrix,
)
from .engine import (
    CrossingRecord,
    IndexPair,
    crossing_profile,
    index_pair,
    omega_index,
    omega_index_nondegenerate,
    omega_nullity,
)
from .documents import ReportDocument, SystemDocument, canonical_json
from .errors import MaslovkitError
from .iteration import (
    InequalityReport,
    MeanIndex,
    SplittingData,
    SplittingEntry,
    bott_sum,
    check_inequalities,
    index_sequence,
    index_via_splitting,
    mean_index,
    mth_roots,
    splitting_numbers,
    splitting_table,
)
from .jump import (
    HypothesisReport,
    JumpInterval,
    JumpTuple,
    jump_hypotheses,
    jump_interval,
    minimal_period_forced,
    search_common_jumps,
)
from .oracle import oracle_index
from .paths import (
    HamiltonianDescriptor,
    MatrixPath,
    SymplecticPath,
    concatenate,
    diamond_sum,
    extension_path,
    hyperbolic_path,
    integrate,
    iterate,
    p_iterate,
    rotation_path,
)

__version__ = "0.1.0"

__all__ = [
    "MaslovkitError",
    "SymplecticMatrix",
    "UnitCirclePoint",
    "SpectrumOnU",
    "certify_symplectic",
    "conjugate",
    "elliptic_height",
    "singular_detector",
    "spectrum_on_unit_circle",
    "structure_matrix",
    "CrossingRecord",
    "IndexPair",
    "crossing_profile",
    "index_pair",
    "omega_index",
    "omega_index_nondegenerate",
    "omega_nullity",
    "InequalityReport",
    "MeanIndex",
    "SplittingData",
    "SplittingEntry",
    "bott_sum",
    "check_inequalities",
    "index_sequence",
    "index_via_splitting",
    "mean_index",
    "mth_roots",
    "splitting_numbers",
    "splitting_table",
    "HypothesisReport",
    "JumpInterval",
    "JumpTuple",
    "jump_hypotheses",
    "jump_interval",
    "minimal_period_forced",
    "search_common_jumps",
    "CorpusEntry",
    "corpus",
    "random_descriptor",
    "random_path",
    "oracle_index",
    "ReportDocument",
    "SystemDocument",
    "canonical_json",
    "HamiltonianDescriptor",
    "MatrixPath",
    "SymplecticPath",
    "concatenate",
    "diamond_sum",
    "extension_path",
    "hyperbolic_path",
    "integrate",
    "iterate",
    "p_iterate",
    "rotation_path",
    "__version__",
]
