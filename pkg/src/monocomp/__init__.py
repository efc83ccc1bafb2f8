"""Monotone sample compression schemes, EMX learners and (p -> q -> r) search."""

__version__ = "0.1.0"

from .emx import (
    ConceptClass,
    Distribution,
    Learner,
    RegretReport,
    extract_compression,
    loo_learn,
    loo_learner,
    lw_learn,
    lw_learner,
    opt,
    regret_experiment,
    sample_size,
)
from .errors import ConfigError, ContractError, MonocompError
from .scaffold import Scaffold, cantor_pair, cantor_unpair, compare, segment_index, segment_point
from .schemes import (
    MonotoneScheme,
    SideInfo,
    compress,
    exhaustive_validate,
    ladder_scheme,
    omega_scheme,
    reconstruct,
    validate,
)
from .search import PqrCertificate, PqrInstance, counting_bound, search_pqr, verify_certificate
from .transforms import (
    GrowthFunction,
    PqrCompression,
    ProperAdapter,
    SchemeFamily,
    decrease_size,
    imperfect_to_perfect,
    labeled_lift,
    uniformize,
    vc_dimension,
)

__all__ = [name for name in dir() if not name.startswith("_")]
