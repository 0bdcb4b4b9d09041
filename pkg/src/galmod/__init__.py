"""Galois module decomposition of p-th power class groups.

Constructs and verifies the F_p[G]-module decomposition of J = K*/K*^p
for cyclic extensions K/F of degree p^n, together with the level
invariant m, its rank bookkeeping, a synthetic instance generator and a
p-adic local-field backend.
"""

__version__ = "0.1.0"

from .datum import (  # noqa: F401
    NEG_INF,
    ExceptionalReport,
    GaloisDatum,
    HypothesisError,
    InconsistencyError,
    LevelData,
    datum_from_json,
    datum_to_json,
    e_ranks,
    exceptional_search,
    i_via_theorem3,
    restrict,
    solve_norm_equation,
    validate,
)
from .decompose import (  # noqa: F401
    Decomposition,
    corollary3_check,
    decompose,
    decomposition_from_json,
    decomposition_to_json,
    predicted_subfield_image,
    verify,
)
from .gmod import GModule, jordan_type, make_module  # noqa: F401
from .local_fields import LocalTower, build_datum, make_tower  # noqa: F401
from .synth import SynthParams, random_params, synthesize  # noqa: F401
