"""Brute-force reference checker for desk-scale models.

This engine exists to cross-examine the production path.  It never builds
projected models: threshold tests are applied inline, strategic operators
are decided by explicit strategy enumeration, and path conditions are
settled with worklist reachability and cycle peeling over bitmask
adjacency, none of which is shared with the array fixpoint engines.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Optional

from .cgs import MvCGS
from .errors import (
    DeadEndError,
    NotATLFragment,
    OracleScaleExceeded,
    StrategySpaceTooLarge,
)
from .logic import (
    And,
    Atom,
    Coalition,
    Constant,
    Implies,
    NoAvoid,
    Next,
    Or,
    StateFormula,
    Until,
    WeakUntil,
    classify,
    expand_derived,
)
from .mvmc import CheckerConfig, Valuation

ORACLE_STATE_LIMIT = 12


def mv_oracle(
    model: MvCGS, phi: StateFormula, cfg: Optional[CheckerConfig] = None
) -> Valuation:
    """Compute the global valuation of phi by brute force."""
    cfg = cfg or CheckerConfig()
    if len(model.states) > ORACLE_STATE_LIMIT:
        raise OracleScaleExceeded(
            f"oracle handles at most {ORACLE_STATE_LIMIT} states, got {len(model.states)}"
        )
    phi = expand_derived(phi)
    info = classify(phi)
    if not info.atl_fragment:
        raise NotATLFragment("oracle supports the ATL fragment (plus implications)")
    ctx = _Context(model, cfg)
    if ctx.dead_mask and _has_temporal(phi):
        raise DeadEndError(
            [model.states[i] for i in _bits(ctx.dead_mask)]
        )
    values = _value_of(ctx, phi)
    return Valuation({model.states[i]: v for i, v in enumerate(values)})


def _has_temporal(phi: StateFormula) -> bool:
    for sub in classify(phi).subformulas:
        if isinstance(sub, (Coalition, NoAvoid)) and isinstance(
            sub.path, (Until, WeakUntil)
        ):
            return True
    return False


class _Context:
    def __init__(self, model: MvCGS, cfg: CheckerConfig):
        self.model = model
        self.cfg = cfg
        self.lat = model.lattice.lattice
        self.n = len(model.states)
        self.full_mask = (1 << self.n) - 1
        self.state_index = {q: i for i, q in enumerate(model.states)}
        # joint transitions per state, plus successor masks per coalition action
        self.by_state: dict[int, list[tuple[tuple[str, ...], int]]] = {
            i: [] for i in range(self.n)
        }
        for (q, act), q2 in sorted(model.transitions.items()):
            self.by_state[self.state_index[q]].append((act, self.state_index[q2]))
        self.dead_mask = 0
        for i in range(self.n):
            if not self.by_state[i]:
                self.dead_mask |= 1 << i
        self.memo: dict[StateFormula, list[str]] = {}

    def coalition_indices(self, agents: tuple[str, ...]) -> list[int]:
        return [self.model.agents.index(a) for a in agents]

    def succ_by_choice(self, agent_ids: list[int]):
        """Per state: coalition-action tuple -> successor bitmask."""
        table: list[dict[tuple[str, ...], int]] = []
        for i in range(self.n):
            per: dict[tuple[str, ...], int] = {}
            for act, j in self.by_state[i]:
                key = tuple(act[a] for a in agent_ids)
                per[key] = per.get(key, 0) | (1 << j)
            table.append(per)
        return table


def _value_of(ctx: _Context, phi: StateFormula) -> list[str]:
    if phi in ctx.memo:
        return ctx.memo[phi]
    lat = ctx.lat
    if isinstance(phi, Atom):
        out = [ctx.model.value(phi.name, q) for q in ctx.model.states]
    elif isinstance(phi, Constant):
        elem = ctx.model.lattice.constant(phi.name)
        out = [elem] * ctx.n
    elif isinstance(phi, And):
        l, r = _value_of(ctx, phi.left), _value_of(ctx, phi.right)
        out = [lat.meet(a, b) for a, b in zip(l, r)]
    elif isinstance(phi, Or):
        l, r = _value_of(ctx, phi.left), _value_of(ctx, phi.right)
        out = [lat.join(a, b) for a, b in zip(l, r)]
    elif isinstance(phi, Implies):
        l, r = _value_of(ctx, phi.left), _value_of(ctx, phi.right)
        out = [lat.top if lat.leq(a, b) else lat.bottom for a, b in zip(l, r)]
    elif isinstance(phi, (Coalition, NoAvoid)):
        out = _strategic_value(ctx, phi)
    else:
        raise NotATLFragment(f"unsupported state formula {phi}")
    ctx.memo[phi] = out
    return out


def _strategic_value(ctx: _Context, phi) -> list[str]:
    lat = ctx.lat
    gamma = phi.path
    if isinstance(gamma, Next):
        arg_values = [_value_of(ctx, gamma.body.formula)]
    elif isinstance(gamma, (Until, WeakUntil)):
        arg_values = [
            _value_of(ctx, gamma.left.formula),
            _value_of(ctx, gamma.right.formula),
        ]
    else:
        raise NotATLFragment(f"unsupported path formula {gamma}")
    levels = lat.join_irreducibles()
    masks_per_level = {}
    for ell in levels:
        masks = []
        for values in arg_values:
            m = 0
            for i, v in enumerate(values):
                if lat.leq(ell, v):
                    m |= 1 << i
            masks.append(m)
        masks_per_level[ell] = masks
    per_level = _decide_levels(ctx, phi, gamma, masks_per_level)
    out = []
    for i in range(ctx.n):
        out.append(lat.big_join(ell for ell, m in per_level.items() if m >> i & 1))
    return out


def _decide_levels(ctx: _Context, phi, gamma, masks_per_level) -> dict[str, int]:
    """2-valued satisfaction masks, one per threshold, sharing the strategy walk."""
    is_coop = isinstance(phi, Coalition)
    agents = phi.agents
    full_graph = [0] * ctx.n
    for i in range(ctx.n):
        for _act, j in ctx.by_state[i]:
            full_graph[i] |= 1 << j
    enumerating = False
    universal = is_coop
    if not agents:
        graphs = iter([full_graph])
    elif (
        ctx.cfg.semantics != "ir"
        and is_coop
        and set(agents) == set(ctx.model.agents)
    ):
        # the grand coalition resolves all nondeterminism: some path suffices
        universal = False
        graphs = iter([full_graph])
    else:
        enumerating = True
        agent_ids = ctx.coalition_indices(agents)
        succ_table = ctx.succ_by_choice(agent_ids)
        graphs = _iter_strategy_graphs(ctx, agents, agent_ids, succ_table)
    acc: dict[str, int] = {}
    pending = set(masks_per_level)
    for succ in graphs:
        for ell in list(pending):
            sat = _paths_mask(ctx, succ, gamma, masks_per_level[ell], universal)
            if ell not in acc:
                acc[ell] = sat
            elif is_coop:
                acc[ell] |= sat
            else:
                acc[ell] &= sat
            saturated = acc[ell] == ctx.full_mask if is_coop else acc[ell] == 0
            if enumerating and saturated:
                pending.discard(ell)
        if not pending:
            break
    for ell in masks_per_level:
        acc.setdefault(ell, 0)
    return acc


def _iter_strategy_graphs(ctx: _Context, agents, agent_ids, succ_table):
    """Successor masks of each pruned graph, one per coalition strategy.

    Enumeration is lexicographic over (agent, decision point, declared
    action order); under the ir semantics decision points are epistemic
    classes, otherwise individual states.
    """
    model = ctx.model
    slots = []  # (agent position in coalition, list of member states, actions)
    uniform = ctx.cfg.semantics == "ir"
    for pos, a in enumerate(agents):
        if uniform:
            groups = sorted(
                (sorted(ctx.state_index[q] for q in cls) for cls in model.epistemic_classes(a)),
                key=lambda g: g[0],
            )
        else:
            groups = [[i] for i in range(ctx.n)]
        for group in groups:
            rep = model.states[group[0]]
            slots.append((pos, group, model.d[(a, rep)]))
    count = 1
    for _pos, _grp, acts in slots:
        count *= len(acts)
    if count > ctx.cfg.strategy_cap:
        raise StrategySpaceTooLarge(count, ctx.cfg.strategy_cap)
    k = len(agents)
    for assignment in itertools.product(*(acts for _pos, _grp, acts in slots)):
        choice = [[None] * k for _ in range(ctx.n)]
        for (pos, group, _acts), act in zip(slots, assignment):
            for i in group:
                choice[i][pos] = act
        succ = [succ_table[i].get(tuple(choice[i]), 0) for i in range(ctx.n)]
        yield succ


# --- path analysis over successor masks --------------------------------------

def _paths_mask(ctx: _Context, succ: list[int], gamma, masks, universal: bool) -> int:
    if isinstance(gamma, Next):
        b = masks[0]
        if universal:
            return _ax(ctx, succ, b)
        return _ex(ctx, succ, b)
    a, b = masks
    full = ctx.full_mask
    if isinstance(gamma, Until):
        if universal:
            # all paths satisfy a U b: no b-avoiding cycle, no escape to
            # a state violating both
            bad = _eg(ctx, succ, full & ~b) | _eu(ctx, succ, full & ~b, full & ~a & ~b)
            return full & ~bad
        return _eu(ctx, succ, a, b)
    if isinstance(gamma, WeakUntil):
        if universal:
            bad = _eu(ctx, succ, full & ~b, full & ~a & ~b)
            return full & ~bad
        return _eu(ctx, succ, a, b) | _eg(ctx, succ, a)
    raise NotATLFragment(f"unsupported path formula {gamma}")


def _ex(ctx, succ, b):
    out = 0
    for i in range(ctx.n):
        if succ[i] & b:
            out |= 1 << i
    return out


def _ax(ctx, succ, b):
    out = 0
    for i in range(ctx.n):
        if succ[i] & ~b == 0:
            out |= 1 << i
    return out


def _preds(ctx, succ):
    pred = [0] * ctx.n
    for i in range(ctx.n):
        for j in _bits(succ[i]):
            pred[j] |= 1 << i
    return pred


def _eu(ctx, succ, a, b):
    """States with a path reaching b through a (backward worklist)."""
    pred = _preds(ctx, succ)
    reached = b
    work = deque(_bits(b))
    while work:
        j = work.popleft()
        for i in _bits(pred[j] & a & ~reached):
            reached |= 1 << i
            work.append(i)
    return reached


def _eg(ctx, succ, a):
    """States with an infinite path inside a (out-degree peeling)."""
    alive = a
    degree = [0] * ctx.n
    work = deque()
    for i in _bits(a):
        degree[i] = bin(succ[i] & a).count("1")
        if degree[i] == 0:
            work.append(i)
    pred = _preds(ctx, succ)
    while work:
        j = work.popleft()
        if not (alive >> j) & 1:
            continue
        alive &= ~(1 << j)
        for i in _bits(pred[j] & alive):
            degree[i] -= 1
            if degree[i] == 0:
                work.append(i)
    return alive


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
