"""Perfect-information ATL model checking by fixpoint iteration.

Coalition operators are computed with the standard controllable-predecessor
fixpoints; no-avoid operators use the quantifier-dual predecessor.  Memory
is irrelevant at this fragment, so the result is exact for both memoryless
and perfect-recall strategies.
"""

from __future__ import annotations

import numpy as np

from ..cgs import MvCGS
from ..errors import DeadEndError, ImplicationPresent, NotATLFragment
from ..logic import (
    And,
    Atom,
    Coalition,
    Constant,
    Implies,
    Iff,
    NoAvoid,
    Next,
    Or,
    StateF,
    StateFormula,
    Until,
    WeakUntil,
    classify,
    expand_derived,
)
from . import kernels
from .compiled import CompiledGame


def pre(model: MvCGS, agents, states) -> frozenset[str]:
    """One-step controllable predecessor of a state set for a coalition."""
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    in_q = game.mask_of(states)
    return game.set_of(coop_pre_mask(game, tuple(agents), in_q))


def coop_pre_mask(game: CompiledGame, agents: tuple[str, ...], in_q: np.ndarray) -> np.ndarray:
    view = game.coalition(agents)
    if view.empty:
        return kernels.all_succ(game.edge_src, game.edge_dst, game.n_states, in_q)
    return kernels.coop_pre(view.flat, game.edge_dst, game.n_states, view.n_keys, in_q)


def navoid_pre_mask(game: CompiledGame, agents: tuple[str, ...], in_q: np.ndarray) -> np.ndarray:
    view = game.coalition(agents)
    if view.empty:
        return kernels.any_succ(game.edge_src, game.edge_dst, game.n_states, in_q)
    return kernels.navoid_pre(view.flat, game.edge_dst, game.n_states, view.n_keys, in_q)


def fixpoint_until(pre_step, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Least fixpoint of Z = b | (a & pre(Z))."""
    z = b.copy()
    while True:
        z2 = b | (a & pre_step(z))
        if (z2 == z).all():
            return z
        z = z2


def fixpoint_weak_until(pre_step, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Greatest fixpoint of Z = b | (a & pre(Z))."""
    z = np.ones_like(a)
    while True:
        z2 = b | (a & pre_step(z))
        if (z2 == z).all():
            return z
        z = z2


def require_checkable(phi: StateFormula) -> StateFormula:
    """Expand derived operators and insist on the implication-free ATL fragment."""
    phi = expand_derived(phi)
    info = classify(phi)
    if not info.implication_free:
        raise ImplicationPresent(
            "implication formulas go through the recursive global checker"
        )
    if not info.atl_fragment:
        raise NotATLFragment(
            "strategic operators must directly wrap X, U or W over state formulas"
        )
    return phi


def mc_atl_perfect(model: MvCGS, phi: StateFormula) -> frozenset[str]:
    """Exact satisfaction set of an implication-free ATL formula."""
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    phi = require_checkable(phi)
    return game.set_of(eval_perfect(game, phi))


def eval_perfect(game: CompiledGame, phi: StateFormula) -> np.ndarray:
    if isinstance(phi, Atom):
        return game.atom_mask(phi.name)
    if isinstance(phi, Constant):
        return game.constant_mask(phi.name)
    if isinstance(phi, And):
        return eval_perfect(game, phi.left) & eval_perfect(game, phi.right)
    if isinstance(phi, Or):
        return eval_perfect(game, phi.left) | eval_perfect(game, phi.right)
    if isinstance(phi, (Implies, Iff)):
        raise ImplicationPresent("implication inside the 2-valued engine")
    if isinstance(phi, (Coalition, NoAvoid)):
        agents = phi.agents
        if isinstance(phi, Coalition):
            step = lambda z: coop_pre_mask(game, agents, z)
        else:
            step = lambda z: navoid_pre_mask(game, agents, z)
        gamma = phi.path
        if isinstance(gamma, Next):
            arg = eval_perfect(game, gamma.body.formula)
            return step(arg)
        _require_total(game, phi)
        if isinstance(gamma, Until):
            a = eval_perfect(game, gamma.left.formula)
            b = eval_perfect(game, gamma.right.formula)
            return fixpoint_until(step, a, b)
        if isinstance(gamma, WeakUntil):
            a = eval_perfect(game, gamma.left.formula)
            b = eval_perfect(game, gamma.right.formula)
            return fixpoint_weak_until(step, a, b)
        raise NotATLFragment(f"unsupported path formula {gamma}")
    raise NotATLFragment(f"unsupported state formula {phi}")


def _require_total(game: CompiledGame, phi: StateFormula) -> None:
    # U/W path values are ill-defined where no infinite path exists
    if game.dead_end_states:
        raise DeadEndError(game.dead_end_states)
