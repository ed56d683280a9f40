"""Imperfect-information engines: exact enumeration and fixpoint bounds.

Exact checking enumerates uniform memoryless strategies of the coalition
(one action per epistemic class per member) and solves the opponent-
nondeterministic graph left by each strategy.  Ability is objective:
outcomes are evaluated from the actual state only.

The approximate engine computes a sound bracket instead:

* the upper bound is perfect-information checking (more strategies can
  only help a coalition), and
* the lower bound is a fixpoint over a committed-block predecessor: states
  enter only when one coalition action works from every state of the
  common-knowledge block, and a block never revises its committed action.

The lower construction guarantees soundness (lower subset of exact), never
completeness.  No-avoid operators are bracketed through their duality with
coalition operators.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..cgs import MvCGS
from ..errors import DeadEndError, NotATLFragment, StrategySpaceTooLarge
from ..logic import (
    And,
    Atom,
    Coalition,
    Constant,
    NoAvoid,
    Next,
    Or,
    StateFormula,
    Until,
    WeakUntil,
)
from .compiled import CompiledGame
from .perfect import (
    coop_pre_mask,
    fixpoint_until,
    fixpoint_weak_until,
    navoid_pre_mask,
    require_checkable,
)

DEFAULT_STRATEGY_CAP = 10_000_000


# --- epistemic bookkeeping ----------------------------------------------------

class EpistemicView:
    """Per-agent class indices and per-class available actions."""

    def __init__(self, game: CompiledGame):
        self.game = game
        model = game.model
        self.class_of: dict[str, np.ndarray] = {}
        self.classes: dict[str, list[list[int]]] = {}
        self.class_actions: dict[str, list[list[int]]] = {}
        for a in model.agents:
            partition = model.epistemic_classes(a)
            blocks = sorted(
                (sorted(game.state_index[q] for q in cls) for cls in partition),
                key=lambda block: block[0],
            )
            arr = np.zeros(game.n_states, dtype=np.int64)
            for b_id, block in enumerate(blocks):
                for s in block:
                    arr[s] = b_id
            self.class_of[a] = arr
            self.classes[a] = blocks
            acts = []
            for block in blocks:
                rep = game.states[block[0]]
                acts.append([game.action_index[x] for x in model.d[(a, rep)]])
            self.class_actions[a] = acts


def common_knowledge_blocks(view: EpistemicView, agents: tuple[str, ...]) -> np.ndarray:
    """Finest partition coarser than every member's partition (union-find)."""
    n = view.game.n_states
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in agents:
        for block in view.classes[a]:
            root = find(block[0])
            for s in block[1:]:
                r2 = find(s)
                if r2 != root:
                    parent[r2] = root
    roots = [find(i) for i in range(n)]
    remap: dict[int, int] = {}
    out = np.zeros(n, dtype=np.int64)
    for i, r in enumerate(roots):
        out[i] = remap.setdefault(r, len(remap))
    return out


# --- exact checking by strategy enumeration -------------------------------------

def mc_atl_ir_exact(
    model: MvCGS,
    phi: StateFormula,
    strategy_cap: int = DEFAULT_STRATEGY_CAP,
) -> frozenset[str]:
    """Exact objective satisfaction set under uniform memoryless strategies."""
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    phi = require_checkable(phi)
    if game.dead_end_states:
        raise DeadEndError(game.dead_end_states)
    view = EpistemicView(game)
    memo: dict[StateFormula, np.ndarray] = {}
    return game.set_of(_eval_exact(game, view, phi, strategy_cap, memo))


def _eval_exact(game, view, phi, cap, memo) -> np.ndarray:
    if phi in memo:
        return memo[phi]
    if isinstance(phi, Atom):
        out = game.atom_mask(phi.name)
    elif isinstance(phi, Constant):
        out = game.constant_mask(phi.name)
    elif isinstance(phi, And):
        out = _eval_exact(game, view, phi.left, cap, memo) & _eval_exact(
            game, view, phi.right, cap, memo
        )
    elif isinstance(phi, Or):
        out = _eval_exact(game, view, phi.left, cap, memo) | _eval_exact(
            game, view, phi.right, cap, memo
        )
    elif isinstance(phi, (Coalition, NoAvoid)):
        args = [
            _eval_exact(game, view, f.formula, cap, memo)
            for f in _path_args(phi.path)
        ]
        out = _strategic_exact(game, view, phi, args, cap)
    else:
        raise NotATLFragment(f"unsupported state formula {phi}")
    memo[phi] = out
    return out


def _path_args(gamma):
    if isinstance(gamma, Next):
        return (gamma.body,)
    if isinstance(gamma, (Until, WeakUntil)):
        return (gamma.left, gamma.right)
    raise NotATLFragment(f"unsupported path formula {gamma}")


def _strategic_exact(game, view, phi, args, cap) -> np.ndarray:
    agents = phi.agents
    gamma = phi.path
    is_coop = isinstance(phi, Coalition)
    if not agents:
        # no strategy choice: plain path quantification over the full graph
        keep = np.ones(game.n_edges, dtype=bool)
        return _solve_graph(game, keep, gamma, args, universal=is_coop)
    count = 1
    slots = []  # (agent, class id, action choices)
    for a in agents:
        for c_id, choices in enumerate(view.class_actions[a]):
            slots.append((a, c_id, choices))
            count *= len(choices)
    if count > cap:
        raise StrategySpaceTooLarge(count, cap)
    acc = None
    agent_cols = {a: game.edge_actions[:, game.agent_index[a]] for a in agents}
    for assignment in itertools.product(*(s[2] for s in slots)):
        per_agent_action = {}
        for (a, c_id, _), act in zip(slots, assignment):
            per_agent_action.setdefault(a, {})[c_id] = act
        keep = np.ones(game.n_edges, dtype=bool)
        for a in agents:
            table = np.zeros(len(view.class_actions[a]), dtype=np.int64)
            for c_id, act in per_agent_action[a].items():
                table[c_id] = act
            chosen = table[view.class_of[a][game.edge_src]]
            keep &= agent_cols[a] == chosen
        result = _solve_graph(game, keep, gamma, args, universal=is_coop)
        if acc is None:
            acc = result
        elif is_coop:
            acc |= result
        else:
            acc &= result
        if is_coop and acc.all():
            break
        if not is_coop and not acc.any():
            break
    return acc


def _solve_graph(game, keep, gamma, args, universal: bool) -> np.ndarray:
    """Path quantification over the subgraph selected by ``keep``.

    universal=True answers "all remaining paths satisfy gamma" (coalition
    side), universal=False answers "some remaining path does" (no-avoid).
    """
    src = game.edge_src[keep]
    dst = game.edge_dst[keep]
    n = game.n_states

    def all_succ(z):
        out = np.ones(n, dtype=bool)
        out[src[~z[dst]]] = False
        return out

    def any_succ(z):
        out = np.zeros(n, dtype=bool)
        out[src[z[dst]]] = True
        return out

    step = all_succ if universal else any_succ
    if isinstance(gamma, Next):
        return step(args[0])
    if isinstance(gamma, Until):
        return fixpoint_until(step, args[0], args[1])
    if isinstance(gamma, WeakUntil):
        return fixpoint_weak_until(step, args[0], args[1])
    raise NotATLFragment(f"unsupported path formula {gamma}")


# --- sound lower bound ------------------------------------------------------------

class _LowerSolver:
    """Committed-block fixpoints for one coalition."""

    def __init__(self, game: CompiledGame, view: EpistemicView, agents: tuple[str, ...]):
        self.game = game
        cview = game.coalition(agents)
        self.n_keys = cview.n_keys
        self.flat = cview.flat
        self.dst = game.edge_dst
        self.block_of = common_knowledge_blocks(view, agents)
        self.n_blocks = int(self.block_of.max()) + 1 if game.n_states else 0
        exists = np.zeros(game.n_states * self.n_keys, dtype=bool)
        exists[self.flat] = True
        self.exists = exists.reshape(game.n_states, self.n_keys)
        counts = np.zeros((self.n_blocks, self.n_keys), dtype=np.int64)
        np.add.at(counts, self.block_of, self.exists.astype(np.int64))
        sizes = np.bincount(self.block_of, minlength=self.n_blocks)
        # a coalition action is usable for a block only if available everywhere in it
        self.block_avail = counts == sizes[:, None]

    def _ok_mask(self, target: np.ndarray) -> np.ndarray:
        """ok[q, k]: the k-action exists at q and all its completions hit target."""
        bad = np.zeros(self.game.n_states * self.n_keys, dtype=bool)
        bad[self.flat[~target[self.dst]]] = True
        return self.exists & ~bad.reshape(self.game.n_states, self.n_keys)

    def lower_until(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        reached = b.copy()
        committed = np.full(self.n_blocks, -1, dtype=np.int64)
        while True:
            ok = self._ok_mask(reached)
            claimable = ok & (a & ~reached)[:, None]
            # states whose block already committed an action
            key = committed[self.block_of]
            has_key = key >= 0
            new = has_key & claimable[np.arange(self.game.n_states), np.clip(key, 0, None)]
            # first usable action for an uncommitted block with a claimable state
            block_claim = np.zeros((self.n_blocks, self.n_keys), dtype=bool)
            np.logical_or.at(block_claim, self.block_of, claimable)
            block_claim &= self.block_avail
            block_claim[committed >= 0] = False
            pickable = block_claim.any(axis=1)
            if pickable.any():
                picks = np.argmax(block_claim, axis=1)
                committed[pickable] = picks[pickable]
                key = committed[self.block_of]
                fresh = (key >= 0) & ~has_key
                new |= fresh & claimable[np.arange(self.game.n_states), np.clip(key, 0, None)]
            if not new.any():
                return reached
            reached |= new

    def lower_weak_until(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        z = a | b
        while True:
            ok = self._ok_mask(z)
            need = z & ~b
            need_counts = np.zeros((self.n_blocks, self.n_keys), dtype=np.int64)
            np.add.at(need_counts, self.block_of, (ok & need[:, None]).astype(np.int64))
            need_sizes = np.bincount(self.block_of[need], minlength=self.n_blocks)
            served = (self.block_avail & (need_counts == need_sizes[:, None])).any(axis=1)
            z2 = (z & b) | (need & served[self.block_of])
            if (z2 == z).all():
                return z2
            z = z2


# --- bracketed checking --------------------------------------------------------------

def ir_bounds(model: MvCGS, phi: StateFormula) -> tuple[frozenset[str], frozenset[str]]:
    """Sound (lower, upper) satisfaction sets under uniform strategies."""
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    phi = require_checkable(phi)
    if game.dead_end_states:
        raise DeadEndError(game.dead_end_states)
    view = EpistemicView(game)
    solvers: dict[tuple[str, ...], _LowerSolver] = {}
    lo, up = _eval_bounds(game, view, phi, solvers, {})
    return game.set_of(lo), game.set_of(up)


def mc_atl_ir_approx(model: MvCGS, phi: StateFormula, side: str) -> frozenset[str]:
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', not {side!r}")
    lower, upper = ir_bounds(model, phi)
    return lower if side == "lower" else upper


def _eval_bounds(game, view, phi, solvers, memo):
    if phi in memo:
        return memo[phi]
    if isinstance(phi, Atom):
        mask = game.atom_mask(phi.name)
        out = (mask, mask)
    elif isinstance(phi, Constant):
        mask = game.constant_mask(phi.name)
        out = (mask, mask)
    elif isinstance(phi, And):
        l1, u1 = _eval_bounds(game, view, phi.left, solvers, memo)
        l2, u2 = _eval_bounds(game, view, phi.right, solvers, memo)
        out = (l1 & l2, u1 & u2)
    elif isinstance(phi, Or):
        l1, u1 = _eval_bounds(game, view, phi.left, solvers, memo)
        l2, u2 = _eval_bounds(game, view, phi.right, solvers, memo)
        out = (l1 | l2, u1 | u2)
    elif isinstance(phi, (Coalition, NoAvoid)):
        bounds = [
            _eval_bounds(game, view, f.formula, solvers, memo)
            for f in _path_args(phi.path)
        ]
        los = [b[0] for b in bounds]
        ups = [b[1] for b in bounds]
        out = _strategic_bounds(game, view, phi, los, ups, solvers)
    else:
        raise NotATLFragment(f"unsupported state formula {phi}")
    memo[phi] = out
    return out


def _solver_for(game, view, agents, solvers) -> _LowerSolver:
    if agents not in solvers:
        solvers[agents] = _LowerSolver(game, view, agents)
    return solvers[agents]


def _strategic_bounds(game, view, phi, los, ups, solvers):
    agents = phi.agents
    gamma = phi.path
    if not agents:
        # no strategies involved: path quantification is exact given the args
        lo = _perfect_node(game, phi, los)
        up = _perfect_node(game, phi, ups)
        return lo, up
    if isinstance(phi, Coalition):
        up = _perfect_node(game, phi, ups)
        if isinstance(gamma, Next):
            lo = coop_pre_mask(game, agents, los[0])  # one-shot ability is exact
        else:
            solver = _solver_for(game, view, agents, solvers)
            if isinstance(gamma, Until):
                lo = solver.lower_until(los[0], los[1])
            else:
                lo = solver.lower_weak_until(los[0], los[1])
        return lo, up
    # no-avoid: bracket through [[A]]g = not <<A>>(not g)
    lo = _perfect_node(game, phi, los)
    if isinstance(gamma, Next):
        up = navoid_pre_mask(game, agents, ups[0])
    else:
        solver = _solver_for(game, view, agents, solvers)
        if isinstance(gamma, Until):
            # not (p U q) == (not q) W (not p and not q)
            up = ~solver.lower_weak_until(~ups[1], ~ups[0] & ~ups[1])
        else:
            # not (p W q) == (not q) U (not p and not q)
            up = ~solver.lower_until(~ups[1], ~ups[0] & ~ups[1])
    return lo, up


def _perfect_node(game, phi, args):
    agents = phi.agents
    if isinstance(phi, Coalition):
        step = lambda z: coop_pre_mask(game, agents, z)
    else:
        step = lambda z: navoid_pre_mask(game, agents, z)
    gamma = phi.path
    if isinstance(gamma, Next):
        return step(args[0])
    if isinstance(gamma, Until):
        return fixpoint_until(step, args[0], args[1])
    return fixpoint_weak_until(step, args[0], args[1])


def strategy_count(model: MvCGS, agents) -> int:
    """Number of uniform joint strategies a coalition has in the model."""
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    view = EpistemicView(game)
    count = 1
    for a in agents:
        for choices in view.class_actions[a]:
            count *= len(choices)
    return count


def find_uniform_witness(
    model: MvCGS,
    phi: StateFormula,
    state: str,
    strategy_cap: int = DEFAULT_STRATEGY_CAP,
):
    """First uniform strategy making a top-level coalition formula hold at a state.

    Returns ``{agent: {class: action}}`` with classes keyed by a readable
    member list, or None when no uniform strategy works (or the formula is
    not a coalition formula).  Enumeration order matches the exact engine.
    """
    phi = require_checkable(phi)
    if not isinstance(phi, Coalition) or not phi.agents:
        return None
    game = model if isinstance(model, CompiledGame) else CompiledGame(model)
    if game.dead_end_states:
        raise DeadEndError(game.dead_end_states)
    view = EpistemicView(game)
    memo: dict[StateFormula, np.ndarray] = {}
    args = [
        _eval_exact(game, view, f.formula, strategy_cap, memo)
        for f in _path_args(phi.path)
    ]
    target = game.state_index[state]
    agents = phi.agents
    slots = []
    count = 1
    for a in agents:
        for c_id, choices in enumerate(view.class_actions[a]):
            slots.append((a, c_id, choices))
            count *= len(choices)
    if count > strategy_cap:
        raise StrategySpaceTooLarge(count, strategy_cap)
    agent_cols = {a: game.edge_actions[:, game.agent_index[a]] for a in agents}
    for assignment in itertools.product(*(s[2] for s in slots)):
        per_agent_action = {}
        for (a, c_id, _), act in zip(slots, assignment):
            per_agent_action.setdefault(a, {})[c_id] = act
        keep = np.ones(game.n_edges, dtype=bool)
        for a in agents:
            table = np.zeros(len(view.class_actions[a]), dtype=np.int64)
            for c_id, act in per_agent_action[a].items():
                table[c_id] = act
            keep &= agent_cols[a] == table[view.class_of[a][game.edge_src]]
        sat = _solve_graph(game, keep, phi.path, args, universal=True)
        if sat[target]:
            return {
                a: {
                    "{" + ",".join(game.states[i] for i in view.classes[a][c_id]) + "}":
                    game.actions[act]
                    for c_id, act in per_agent_action[a].items()
                }
                for a in agents
            }
    return None
