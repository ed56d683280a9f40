"""Multi-valued model checking by reduction to 2-valued checking.

The translation algorithms run one 2-valued check per join-irreducible
truth value and join the answers; the recursive algorithm additionally
eliminates implication subformulas bottom-up by freezing their two-valued
comparison into fresh atoms.  A brute-force oracle (see ``oracle``) covers
the same language for differential testing.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional

from .cgs import MvCGS
from .errors import (
    ImplicationPresent,
    InconclusiveError,
    NotDistributive,
    UnknownState,
)
from .logic import (
    Atom,
    Implies,
    StateFormula,
    classify,
    expand_derived,
    substitute,
)
from .mc2 import mc_atl_ir_exact, mc_atl_perfect
from .mc2.imperfect import DEFAULT_STRATEGY_CAP, ir_bounds
from .projection import project_threshold

FRESH_ATOM_PREFIX = "__cmp"

SEMANTICS = ("perfect", "ir", "ir_approx")
ALGORITHMS = ("translate", "recursive", "oracle")


@dataclass
class CheckerConfig:
    semantics: str = "perfect"
    algorithm: str = "recursive"
    parallel: int = 1
    strategy_cap: int = DEFAULT_STRATEGY_CAP

    def __post_init__(self):
        if self.semantics not in SEMANTICS:
            raise ValueError(f"semantics must be one of {SEMANTICS}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")


@dataclass
class Valuation:
    """The global model checking output: a truth value per state."""

    values: dict[str, str]

    def __getitem__(self, state: str) -> str:
        try:
            return self.values[state]
        except KeyError:
            raise UnknownState(f"no value for state {state!r}") from None

    def __eq__(self, other):
        return isinstance(other, Valuation) and self.values == other.values

    def items(self):
        return self.values.items()

    def to_dict(self) -> dict:
        return dict(self.values)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Valuation":
        return cls(dict(doc))


@dataclass
class ApproxValuation:
    """Sound per-state value brackets from approximate ir checking."""

    lower: Valuation
    upper: Valuation

    def conclusive(self, state: str) -> bool:
        return self.lower[state] == self.upper[state]

    def inconclusive_states(self) -> list[str]:
        return [q for q in self.lower.values if not self.conclusive(q)]

    def as_exact(self) -> Valuation:
        bad = self.inconclusive_states()
        if bad:
            raise InconclusiveError(bad, "lower and upper approximations differ")
        return self.lower


def _require_distributive(model: MvCGS) -> None:
    if not model.lattice.lattice.is_distributive():
        raise NotDistributive(
            "threshold decomposition requires a distributive truth lattice"
        )


def _solve_projection(model: MvCGS, ell: str, phi: StateFormula, cfg: CheckerConfig):
    """2-valued satisfaction bounds of phi in the threshold projection at ell."""
    projected = project_threshold(model, ell)
    if cfg.semantics == "perfect":
        sat = mc_atl_perfect(projected, phi)
        return sat, sat
    if cfg.semantics == "ir":
        sat = mc_atl_ir_exact(projected, phi, strategy_cap=cfg.strategy_cap)
        return sat, sat
    return ir_bounds(projected, phi)


def threshold_sets(
    model: MvCGS,
    phi: StateFormula,
    cfg: CheckerConfig,
    timing_sink: Optional[dict] = None,
):
    """Per-join-irreducible (lower, upper) satisfaction sets, in a fixed order."""
    _require_distributive(model)
    phi = expand_derived(phi)
    info = classify(phi)
    if not info.implication_free:
        raise ImplicationPresent(
            "translation checking is implication-free; use gmcheck_rec"
        )
    levels = model.lattice.lattice.join_irreducibles()

    def job(ell):
        start = time.perf_counter()
        result = _solve_projection(model, ell, phi, cfg)
        return ell, result, time.perf_counter() - start

    if cfg.parallel > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallel) as pool:
            outcomes = list(pool.map(job, levels))
    else:
        outcomes = [job(ell) for ell in levels]
    sets = {}
    for ell, result, seconds in outcomes:
        sets[ell] = result
        if timing_sink is not None:
            timing_sink[ell] = seconds
    return sets


def mcheck_tr(
    model: MvCGS, state: str, phi: StateFormula, cfg: Optional[CheckerConfig] = None
) -> str:
    """Local translation-based checking: the value of phi at one state."""
    cfg = cfg or CheckerConfig()
    if state not in model.states:
        raise UnknownState(f"unknown state {state!r}")
    sets = threshold_sets(model, phi, cfg)
    lat = model.lattice.lattice
    lo = lat.big_join(ell for ell, (low, _up) in sets.items() if state in low)
    up = lat.big_join(ell for ell, (_low, up) in sets.items() if state in up)
    if lo != up:
        raise InconclusiveError([state], f"value between {lo!r} and {up!r}")
    return lo


def gmcheck_tr(
    model: MvCGS,
    phi: StateFormula,
    cfg: Optional[CheckerConfig] = None,
    timing_sink: Optional[dict] = None,
):
    """Global translation-based checking.

    Starts from the all-bottom valuation and, for every join-irreducible
    value, joins it into the states satisfying the formula in that
    projection.  Returns a Valuation, or an ApproxValuation under the
    approximate semantics.
    """
    cfg = cfg or CheckerConfig()
    sets = threshold_sets(model, phi, cfg, timing_sink)
    lat = model.lattice.lattice
    # accumulate per-state subsets of passed thresholds as bit codes, then
    # join each distinct subset once
    low_code = dict.fromkeys(model.states, 0)
    up_code = dict.fromkeys(model.states, 0)
    levels = list(sets)
    for bit, ell in enumerate(levels):
        low, up = sets[ell]
        mask = 1 << bit
        for q in low:
            low_code[q] |= mask
        for q in up:
            up_code[q] |= mask
    joins: dict[int, str] = {}

    def element(code: int) -> str:
        got = joins.get(code)
        if got is None:
            got = lat.big_join(
                ell for bit, ell in enumerate(levels) if code >> bit & 1
            )
            joins[code] = got
        return got

    lower = {q: element(c) for q, c in low_code.items()}
    if cfg.semantics == "ir_approx":
        upper = {q: element(c) for q, c in up_code.items()}
        return ApproxValuation(Valuation(lower), Valuation(upper))
    return Valuation(lower)


@dataclass
class FreshAtom:
    """Diagnostic record of one implication eliminated by gmcheck_rec."""

    name: str
    replaced: Implies


def gmcheck_rec(
    model: MvCGS,
    phi: StateFormula,
    cfg: Optional[CheckerConfig] = None,
    timing_sink: Optional[dict] = None,
    introduced: Optional[list[FreshAtom]] = None,
):
    """Recursive global checking with implication elimination.

    Implication-free formulas go straight to the translation algorithm.
    Otherwise the first (innermost, leftmost) implication is resolved by
    recursively valuating its operands, freezing their per-state comparison
    into a fresh two-valued atom, substituting, and recursing.  Under the
    approximate semantics both operand valuations must be conclusive at
    every state; anything less raises InconclusiveError rather than
    inventing three-valued fresh atoms.
    """
    cfg = cfg or CheckerConfig()
    phi = expand_derived(phi)
    info = classify(phi)
    if info.implication_free:
        return gmcheck_tr(model, phi, cfg, timing_sink)
    sub = info.first_implication
    left_val = _exact(gmcheck_rec(model, sub.left, cfg, timing_sink, introduced))
    right_val = _exact(gmcheck_rec(model, sub.right, cfg, timing_sink, introduced))
    lat = model.lattice.lattice
    name = _fresh_name(model)
    values = {
        q: (lat.top if lat.leq(left_val[q], right_val[q]) else lat.bottom)
        for q in model.states
    }
    if introduced is not None:
        introduced.append(FreshAtom(name, sub))
    extended = model.with_atom(name, values)
    return gmcheck_rec(
        extended, substitute(phi, sub, Atom(name)), cfg, timing_sink, introduced
    )


def _exact(result) -> Valuation:
    if isinstance(result, ApproxValuation):
        return result.as_exact()
    return result


def _fresh_name(model: MvCGS) -> str:
    i = 0
    while f"{FRESH_ATOM_PREFIX}{i}" in model.propositions:
        i += 1
    return f"{FRESH_ATOM_PREFIX}{i}"


def check(model: MvCGS, phi: StateFormula, cfg: Optional[CheckerConfig] = None,
          timing_sink: Optional[dict] = None):
    """Dispatch on the configured algorithm; returns a (possibly approximate)
    global valuation."""
    cfg = cfg or CheckerConfig()
    if cfg.algorithm == "translate":
        return gmcheck_tr(model, phi, cfg, timing_sink)
    if cfg.algorithm == "recursive":
        return gmcheck_rec(model, phi, cfg, timing_sink)
    from .oracle import mv_oracle

    return mv_oracle(model, phi, cfg)


def truth_level(
    model: MvCGS, state: str, phi: StateFormula, cfg: Optional[CheckerConfig] = None
) -> bool:
    """Whether phi is fully true (has the top value) at the given state."""
    cfg = cfg or CheckerConfig()
    if state not in model.states:
        raise UnknownState(f"unknown state {state!r}")
    result = check(model, phi, cfg)
    top = model.lattice.lattice.top
    if isinstance(result, ApproxValuation):
        if result.lower[state] == top:
            return True
        if result.upper[state] != top:
            return False
        raise InconclusiveError([state], "cannot settle truth at this state")
    return result[state] == top


def valid_in_model(
    model: MvCGS, phi: StateFormula, cfg: Optional[CheckerConfig] = None
) -> bool:
    """Whether phi is fully true at every state of the model."""
    cfg = cfg or CheckerConfig()
    result = check(model, phi, cfg)
    top = model.lattice.lattice.top
    if isinstance(result, ApproxValuation):
        if all(v == top for v in result.lower.values.values()):
            return True
        if any(v != top for v in result.upper.values.values()):
            return False
        raise InconclusiveError(result.inconclusive_states())
    return all(v == top for v in result.values.values())


def implication_operand_values(
    model: MvCGS, phi: StateFormula, cfg: Optional[CheckerConfig] = None
) -> dict[StateFormula, dict[str, str]]:
    """Realized per-state values of every implication operand in phi.

    This is the ``values`` argument expected by
    projection.check_formula_conditions: the translation conditions
    quantify over values the checker has actually computed.
    """
    cfg = cfg or CheckerConfig()
    phi = expand_derived(phi)
    out: dict[StateFormula, dict[str, str]] = {}
    for sub in classify(phi).subformulas:
        if isinstance(sub, Implies):
            for operand in (sub.left, sub.right):
                if operand not in out:
                    out[operand] = _exact(gmcheck_rec(model, operand, cfg)).to_dict()
    return out
