"""Shared fixtures: stock lattices, random models, and a textbook checker."""

from __future__ import annotations

import itertools
import random

import pytest

from mvatl.cgs import MvCGS
from mvatl.lattice import InterpretedLattice, build_lattice, builtin_lattice
from mvatl.logic import (
    And,
    Coalition,
    Constant,
    NoAvoid,
    Next,
    Or,
    StateF,
    Until,
    WeakUntil,
    expand_derived,
)

FIG3_LATTICES = ("3", "4", "2x2", "2+2x2", "2+2x2+2x2")


@pytest.fixture
def lat_drone():
    return builtin_lattice("2+2x2+2x2")


def m5_lattice():
    return build_lattice(
        ["bot", "l1", "l2", "l3", "top"],
        [("bot", "l1"), ("bot", "l2"), ("bot", "l3"),
         ("l1", "top"), ("l2", "top"), ("l3", "top")],
    )


def n5_lattice():
    # pentagon: bot < a < top, bot < b < c < top, a incomparable to b and c
    return build_lattice(
        ["bot", "a", "b", "c", "top"],
        [("bot", "a"), ("bot", "b"), ("b", "c"), ("a", "top"), ("c", "top")],
    )


def chain_lattice(n: int):
    elems = [str(i) for i in range(n)]
    return build_lattice(elems, [(str(i), str(i + 1)) for i in range(n - 1)])


# --- random model generation -----------------------------------------------------

def random_model(
    rng: random.Random,
    lattice: InterpretedLattice,
    n_states: int = 6,
    n_agents: int = 2,
    max_actions: int = 2,
    props=("p", "q"),
    with_epistemic: bool = False,
) -> MvCGS:
    """A total, valid random game over the given lattice."""
    states = [f"q{i}" for i in range(n_states)]
    agents = [str(i) for i in range(1, n_agents + 1)]
    alphabet = ["a", "b", "c"][:max_actions]
    d = {}
    epistemic = None
    if with_epistemic:
        epistemic = {}
        for agent in agents:
            shuffled = states[:]
            rng.shuffle(shuffled)
            classes = []
            i = 0
            while i < len(shuffled):
                size = rng.randint(1, min(3, len(shuffled) - i))
                classes.append(frozenset(shuffled[i:i + size]))
                i += size
            epistemic[agent] = classes
            for cls in classes:
                k = rng.randint(1, len(alphabet))
                acts = tuple(rng.sample(alphabet, k))
                for q in cls:
                    d[(agent, q)] = acts
    else:
        for agent in agents:
            for q in states:
                k = rng.randint(1, len(alphabet))
                d[(agent, q)] = tuple(rng.sample(alphabet, k))
    transitions = {}
    for q in states:
        for joint in itertools.product(*(d[(a, q)] for a in agents)):
            transitions[(q, joint)] = rng.choice(states)
    valuation = {}
    elements = lattice.lattice.elements
    for p in props:
        for q in states:
            value = rng.choice(elements)
            if value != lattice.lattice.bottom:
                valuation[(p, q)] = value
    return MvCGS(
        agents=agents,
        states=states,
        actions=alphabet,
        transitions=transitions,
        propositions=props,
        valuation=valuation,
        lattice=lattice,
        d=d,
        epistemic=epistemic,
    )


def atl_formula_pool(agents=("1", "2")):
    """Implication-free ATL-fragment formulas over atoms p, q."""
    from mvatl.logic import Atom as atom

    a1, a2 = agents[0], agents[1]
    P, Q = "p", "q"
    return [
        Coalition((a1,), Next(StateF(atom(P)))),
        Coalition((a1,), Until(StateF(Constant("__top__")), StateF(atom(P)))),
        Coalition((a2,), WeakUntil(StateF(atom(P)), StateF(Constant("__bot__")))),
        Coalition((a1,), Until(StateF(atom(P)), StateF(atom(Q)))),
        Coalition((a1, a2), Until(StateF(Constant("__top__")), StateF(And(atom(P), atom(Q))))),
        NoAvoid((a1,), Until(StateF(Constant("__top__")), StateF(atom(P)))),
        NoAvoid((), Until(StateF(atom(P)), StateF(atom(Q)))),
        Coalition((), WeakUntil(StateF(Or(atom(P), atom(Q))), StateF(Constant("__bot__")))),
        NoAvoid((a2,), WeakUntil(StateF(atom(Q)), StateF(atom(P)))),
        Or(And(atom(P), atom(Q)), atom(P)),
    ]


def implication_formula_pool(lattice: InterpretedLattice, agents=("1", "2")):
    """Formulas exercising the recursive elimination, per lattice."""
    from mvatl.logic import Atom, Iff, Implies

    a1, a2 = agents[0], agents[1]
    p, q = Atom("p"), Atom("q")
    ji = lattice.lattice.join_irreducibles()
    mid = next(
        (c for c, e in sorted(lattice.constants.items()) if e == ji[0]),
        "__top__",
    )
    coop_fp = Coalition((a1,), Until(StateF(Constant("__top__")), StateF(p)))
    coop_fq = Coalition((a2,), Until(StateF(Constant("__top__")), StateF(q)))
    return [
        Implies(p, q),
        Implies(Constant(mid), coop_fp),
        Implies(coop_fp, coop_fq),
        Coalition((a1,), Next(StateF(Implies(p, q)))),
        And(Iff(p, q), coop_fp),
        Implies(Constant("__bot__"), Implies(p, Constant(mid))),
    ]


# --- an independently coded classical ATL checker --------------------------------
#
# Dict-and-set implementation used only as a test oracle for conservativeness;
# shares no code with the package engines.

def classical_atl_states(model: MvCGS, phi) -> frozenset[str]:
    """Satisfaction set of an ATL formula on a crisp 2-valued model."""
    from mvatl.logic import Atom, Implies, Iff

    phi = expand_derived(phi)
    top = model.lattice.lattice.top

    def joint_actions(q):
        per_agent = [model.d[(a, q)] for a in model.agents]
        return list(itertools.product(*per_agent))

    def sat(f) -> frozenset:
        if isinstance(f, Atom):
            return frozenset(q for q in model.states if model.value(f.name, q) == top)
        if isinstance(f, Constant):
            elem = model.lattice.constant(f.name)
            return frozenset(model.states) if elem == top else frozenset()
        if isinstance(f, And):
            return sat(f.left) & sat(f.right)
        if isinstance(f, Or):
            return sat(f.left) | sat(f.right)
        if isinstance(f, Implies):
            # on a 2-valued model the comparison is material implication
            return (frozenset(model.states) - sat(f.left)) | sat(f.right)
        if isinstance(f, Iff):
            l, r = sat(f.left), sat(f.right)
            return (l & r) | (frozenset(model.states) - l - r)
        if isinstance(f, (Coalition, NoAvoid)):
            coalition = list(f.agents)
            others = [a for a in model.agents if a not in coalition]

            def pre(target: frozenset) -> frozenset:
                out = set()
                for q in model.states:
                    choices = list(
                        itertools.product(*(model.d[(a, q)] for a in coalition))
                    ) or [()]
                    for choice in choices:
                        completions = []
                        for rest in itertools.product(
                            *(model.d[(a, q)] for a in others)
                        ) if others else [()]:
                            assignment = dict(zip(coalition, choice))
                            assignment.update(zip(others, rest))
                            joint = tuple(assignment[a] for a in model.agents)
                            completions.append(model.transitions[(q, joint)])
                        if isinstance(f, Coalition) and all(
                            c in target for c in completions
                        ):
                            out.add(q)
                            break
                        if isinstance(f, NoAvoid) and not any(
                            c in target for c in completions
                        ):
                            break
                    else:
                        if isinstance(f, NoAvoid):
                            out.add(q)
                return frozenset(out)

            gamma = f.path
            if isinstance(gamma, Next):
                return pre(sat(gamma.body.formula))
            if isinstance(gamma, Until):
                a_set, b_set = sat(gamma.left.formula), sat(gamma.right.formula)
                z = b_set
                while True:
                    z2 = b_set | (a_set & pre(z))
                    if z2 == z:
                        return z
                    z = z2
            if isinstance(gamma, WeakUntil):
                a_set, b_set = sat(gamma.left.formula), sat(gamma.right.formula)
                z = frozenset(model.states)
                while True:
                    z2 = b_set | (a_set & pre(z))
                    if z2 == z:
                        return z
                    z = z2
        raise AssertionError(f"unsupported formula {f}")

    return sat(phi)
