"""Multi-valued model checking of strategic ability.

Truth values come from a finite distributive lattice; checking reduces to
one classical 2-valued check per join-irreducible value, plus a recursive
treatment of the two-valued implication that compares truth values.
"""

from .lattice import (
    InterpretedLattice,
    Lattice,
    ReductionMap,
    build_lattice,
    builtin_lattice,
    check_reduction_triple,
)
from .logic import classify, expand_derived, parse
from .cgs import (
    MayMustStructure,
    MvCGS,
    TwoValuedCGS,
    from_may_must,
    load_model,
    prune_designated,
    validate,
)
from .projection import check_formula_conditions, project, project_threshold
from .mvmc import (
    ApproxValuation,
    CheckerConfig,
    Valuation,
    gmcheck_rec,
    gmcheck_tr,
    mcheck_tr,
    truth_level,
    valid_in_model,
)
from .oracle import mv_oracle
from .bench import DroneConfig, MapGraph, builtin_model, gen_drones, load_map

__version__ = "0.1.0"

__all__ = [
    "ApproxValuation",
    "CheckerConfig",
    "DroneConfig",
    "InterpretedLattice",
    "Lattice",
    "MapGraph",
    "MayMustStructure",
    "MvCGS",
    "ReductionMap",
    "TwoValuedCGS",
    "Valuation",
    "build_lattice",
    "builtin_lattice",
    "builtin_model",
    "check_formula_conditions",
    "check_reduction_triple",
    "classify",
    "expand_derived",
    "from_may_must",
    "gen_drones",
    "gmcheck_rec",
    "gmcheck_tr",
    "load_map",
    "load_model",
    "mcheck_tr",
    "mv_oracle",
    "parse",
    "project",
    "project_threshold",
    "prune_designated",
    "truth_level",
    "valid_in_model",
    "validate",
]
