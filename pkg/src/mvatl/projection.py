"""Reductions of multi-valued models through lattice homomorphisms.

The central operation applies a bound-preserving map to every valuation
entry (and constant interpretation, and weight if covered), leaving the
game structure untouched.  Threshold maps at join-irreducible values
produce the classical two-valued models consumed by the 2-valued engines.
"""

from __future__ import annotations

import os
import pickle
from typing import Mapping, Optional

from .cgs import MvCGS, TwoValuedCGS
from .errors import MissingValues
from .lattice import (
    InterpretedLattice,
    ReductionMap,
    builtin_lattice,
    require_homomorphism,
    require_same_lattice,
    same_lattice,
)
from .logic import Constant, Implies, StateFormula, classify

CACHE_ENV_VAR = "MVSTRAT_CACHE_DIR"

_memory_cache: dict[tuple[str, str], MvCGS] = {}


def project(model: MvCGS, r: ReductionMap) -> MvCGS:
    """The reduction of a model through a validated homomorphism.

    Valuation and constants map through ``r``; weights map as well when the
    weight lattice coincides with the truth lattice, otherwise they are
    carried over unchanged.
    """
    require_same_lattice(model.lattice.lattice, r.source)
    require_homomorphism(r)
    return _apply(model, r)


def _apply(model: MvCGS, r: ReductionMap) -> MvCGS:
    target = InterpretedLattice(
        r.target, {c: r(e) for c, e in model.lattice.constants.items()}
    )
    f = r.mapping
    valuation = {(p, q): f[v] for (p, q), v in model.valuation.items()}
    weights = model.weights
    weight_lattice = model.weight_lattice
    if weights is not None and weight_lattice is not None:
        if same_lattice(weight_lattice.lattice, r.source):
            weights = {key: f[w] for key, w in weights.items()}
            weight_lattice = InterpretedLattice(
                r.target, {c: r(e) for c, e in weight_lattice.constants.items()}
            )
    out = MvCGS(
        agents=model.agents,
        states=model.states,
        actions=model.actions,
        transitions=model.transitions,
        propositions=model.propositions,
        valuation=valuation,
        lattice=target,
        initial=model.initial,
        d=model.d,
        weights=weights,
        weight_lattice=weight_lattice,
        epistemic=model.epistemic,
        _adopt=True,
    )
    out._structural_fp = model.structural_fingerprint()
    return out


def project_threshold(model: MvCGS, ell: str) -> TwoValuedCGS:
    """Project through the threshold at a join-irreducible, onto lattice 2.

    Results are cached per (model fingerprint, threshold value); set the
    MVSTRAT_CACHE_DIR environment variable to persist projections on disk.
    """
    key = (model.fingerprint(), ell)
    cached = _memory_cache.get(key)
    if cached is not None:
        return cached
    cache_dir = os.environ.get(CACHE_ENV_VAR)
    if cache_dir:
        path = os.path.join(cache_dir, f"proj-{key[0][:32]}-{_safe(ell)}.pkl")
        if os.path.exists(path):
            with open(path, "rb") as fh:
                result = pickle.load(fh)
            _memory_cache[key] = result
            return result
    lat = model.lattice.lattice
    lat.threshold(ell)  # validates distributivity and join-irreducibility
    two = builtin_lattice("2")
    above = lat.up_set(ell)
    # keep only entries that cut to top (omitted means bottom)
    buckets = model.valuation_by_value()
    valuation = {
        key: "top" for v in above for key in buckets.get(v, ())
    }
    constants = {
        c: ("top" if e in above else "bot")
        for c, e in model.lattice.constants.items()
    }
    weights = model.weights
    weight_lattice = model.weight_lattice
    if weights is not None and weight_lattice is not None:
        if same_lattice(weight_lattice.lattice, lat):
            weights = {
                k: ("top" if w in above else "bot") for k, w in weights.items()
            }
            weight_lattice = InterpretedLattice(
                two.lattice,
                {
                    c: ("top" if e in above else "bot")
                    for c, e in weight_lattice.constants.items()
                },
            )
    result = TwoValuedCGS(
        agents=model.agents,
        states=model.states,
        actions=model.actions,
        transitions=model.transitions,
        propositions=model.propositions,
        valuation=valuation,
        lattice=InterpretedLattice(two.lattice, constants),
        initial=model.initial,
        d=model.d,
        weights=weights,
        weight_lattice=weight_lattice,
        epistemic=model.epistemic,
        _adopt=True,
    )
    result._structural_fp = model.structural_fingerprint()
    _memory_cache[key] = result
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        with open(path, "wb") as fh:
            pickle.dump(result, fh)
    return result


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name)


def check_formula_conditions(
    model: MvCGS,
    phi: StateFormula,
    r: ReductionMap,
    values: Mapping[StateFormula, Mapping[str, str]],
) -> tuple[bool, Optional[dict]]:
    """Per-formula translation preconditions for implication subformulas.

    For every implication subformula l -> r, with x1 ranging over the values
    l realizes anywhere in the model and x2 over those of r, checks
        C1': x1 < x2  implies  f(x1) < f(x2)
        C2': x1 incomparable x2  implies  f(x1) > f(x2).
    The quantification is the cross product of realized value ranges, with
    x1 drawn from the left operand; the witness exposes both orientations
    of the image pair since the asymmetry of C2' makes orientation matter.
    Implications with a reserved or interpreted bottom/top constant on
    either side pass vacuously.  ``values`` must supply per-state values
    for both operands of every implication subformula (they are realized
    values that only a checker knows).

    Returns (True, None) or (False, witness); the witness records the
    subformula, the value pair with one state realizing each value, the
    failed condition, and how the image pair relates in both orientations.
    """
    lat = model.lattice.lattice
    implications = [
        f for f in classify(phi).subformulas if isinstance(f, Implies)
    ]
    for sub in implications:
        if _is_extremal_constant(sub.left, model) or _is_extremal_constant(sub.right, model):
            continue
        ranges = []
        for operand in (sub.left, sub.right):
            if operand not in values:
                raise MissingValues(
                    f"no per-state values supplied for operand {operand}"
                )
            missing = [q for q in model.states if q not in values[operand]]
            if missing:
                raise MissingValues(
                    f"operand {operand} lacks values at states {missing}"
                )
            realized: dict[str, str] = {}
            for q in model.states:
                realized.setdefault(values[operand][q], q)
            ranges.append(realized)
        for x1, q1 in ranges[0].items():
            for x2, q2 in ranges[1].items():
                fx1, fx2 = r(x1), r(x2)
                if lat.lt(x1, x2) and not lat.lt(fx1, fx2):
                    return False, _witness(sub, (q1, q2), x1, x2, fx1, fx2, "C1'", lat)
                if lat.incomparable(x1, x2) and not lat.lt(fx2, fx1):
                    return False, _witness(sub, (q1, q2), x1, x2, fx1, fx2, "C2'", lat)
    return True, None


def _witness(sub, states, x1, x2, fx1, fx2, condition, lat):
    return {
        "subformula": sub,
        "states": states,
        "values": (x1, x2),
        "images": (fx1, fx2),
        "condition": condition,
        # both orientations of the image pair, for transparency
        "image_left_le_right": lat.leq(fx1, fx2),
        "image_right_le_left": lat.leq(fx2, fx1),
    }


def _is_extremal_constant(operand: StateFormula, model: MvCGS) -> bool:
    if not isinstance(operand, Constant):
        return False
    lat = model.lattice.lattice
    elem = model.lattice.constant(operand.name)
    return elem in (lat.bottom, lat.top)
