"""Multi-valued concurrent game structures.

A model couples a synchronous multi-agent transition system with a lattice
valuation of its atomic propositions.  Optionally it carries transition
weights (over a possibly different lattice) and per-agent epistemic
equivalence relations.  Models are treated as immutable after construction;
checkers never mutate them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    ModelInvalid,
    NotAFunction,
    UnknownElement,
    UnknownState,
)
from .lattice import InterpretedLattice, builtin_lattice, lattice_from_dict

JointAction = tuple[str, ...]


class MvCGS:
    """Concurrent game structure with lattice-valued propositions.

    ``transitions`` maps ``(state, joint_action)`` to the successor state,
    with joint actions ordered by the declared agent order.  Valuation
    entries omitted from ``valuation`` default to the lattice bottom.
    Epistemic relations are stored as per-agent partitions; agents without
    an entry observe everything (singleton classes).
    """

    def __init__(
        self,
        agents: Sequence[str],
        states: Sequence[str],
        actions: Sequence[str],
        transitions: Mapping[tuple[str, JointAction], str],
        propositions: Sequence[str],
        valuation: Mapping[tuple[str, str], str],
        lattice: InterpretedLattice,
        initial: Optional[str] = None,
        d: Optional[Mapping[tuple[str, str], Sequence[str]]] = None,
        weights: Optional[Mapping[tuple[str, JointAction], str]] = None,
        weight_lattice: Optional[InterpretedLattice] = None,
        epistemic: Optional[Mapping[str, Sequence[Iterable[str]]]] = None,
        _adopt: bool = False,
    ):
        # _adopt shares already-canonical containers from a sibling model
        # (projections, atom extensions); they are never mutated.
        self.agents = tuple(agents)
        self.states = tuple(states)
        self.actions = tuple(actions)
        if _adopt:
            self.transitions = transitions
        else:
            self.transitions = {
                (q, tuple(act)): q2 for (q, act), q2 in transitions.items()
            }
        self.propositions = tuple(propositions)
        self.valuation = valuation if _adopt else dict(valuation)
        self.lattice = lattice
        self.initial = initial if initial is not None else self.states[0]
        if d is None:
            self.d = self._derive_availability()
        elif _adopt:
            self.d = d
        else:
            self.d = {(a, q): tuple(acts) for (a, q), acts in d.items()}
        if weights is None or _adopt:
            self.weights = weights
        else:
            self.weights = {(q, tuple(act)): w for (q, act), w in weights.items()}
        self.weight_lattice = weight_lattice
        self.epistemic = None
        if epistemic is not None:
            self.epistemic = {
                a: tuple(frozenset(c) for c in classes)
                for a, classes in epistemic.items()
            }
        self._fingerprint = None
        self._structural_fp = None
        self._valuation_buckets = None

    def _derive_availability(self):
        d: dict[tuple[str, str], list[str]] = {}
        for (q, act) in self.transitions:
            for i, a in enumerate(self.agents):
                acts = d.setdefault((a, q), [])
                if act[i] not in acts:
                    acts.append(act[i])
        return {
            (a, q): tuple(d.get((a, q), ()))
            for a in self.agents
            for q in self.states
        }

    # -- queries --------------------------------------------------------------

    def value(self, prop: str, state: str) -> str:
        """Valuation with the omitted-entries-default-to-bottom convention."""
        return self.valuation.get((prop, state), self.lattice.lattice.bottom)

    def valuation_by_value(self) -> dict[str, tuple]:
        """Valuation keys grouped by their truth value (for fast projection)."""
        if self._valuation_buckets is None:
            buckets: dict[str, list] = {}
            for key, v in self.valuation.items():
                buckets.setdefault(v, []).append(key)
            self._valuation_buckets = {v: tuple(ks) for v, ks in buckets.items()}
        return self._valuation_buckets

    def successors(self, q: str) -> list[tuple[JointAction, str]]:
        """All joint actions defined at q with their successor states."""
        if q not in self.states:
            raise UnknownState(f"unknown state {q!r}")
        return sorted(
            ((act, q2) for (q1, act), q2 in self.transitions.items() if q1 == q),
        )

    def dead_ends(self) -> list[str]:
        """States with no outgoing transition."""
        has_out = {q for (q, _act) in self.transitions}
        return [q for q in self.states if q not in has_out]

    def epistemic_classes(self, agent: str) -> tuple[frozenset[str], ...]:
        """The agent's partition; identity when no relation was declared."""
        if self.epistemic and agent in self.epistemic:
            return self.epistemic[agent]
        return tuple(frozenset([q]) for q in self.states)

    def has_epistemic(self) -> bool:
        return bool(self.epistemic)

    def is_two_valued(self) -> bool:
        lat = self.lattice.lattice
        return len(lat) == 2

    def reachable(self, start: Optional[str] = None) -> frozenset[str]:
        frontier = [start if start is not None else self.initial]
        seen = set(frontier)
        succ_map: dict[str, list[str]] = {}
        for (q, _act), q2 in self.transitions.items():
            succ_map.setdefault(q, []).append(q2)
        while frontier:
            q = frontier.pop()
            for q2 in succ_map.get(q, ()):
                if q2 not in seen:
                    seen.add(q2)
                    frontier.append(q2)
        return frozenset(seen)

    # -- derived models --------------------------------------------------------

    def with_atom(self, name: str, values: Mapping[str, str]) -> "MvCGS":
        """A copy of the model with one extra proposition."""
        if name in self.propositions:
            raise ModelInvalid([f"proposition {name!r} already present"])
        valuation = dict(self.valuation)
        for q, v in values.items():
            valuation[(name, q)] = v
        out = MvCGS(
            agents=self.agents,
            states=self.states,
            actions=self.actions,
            transitions=self.transitions,
            propositions=self.propositions + (name,),
            valuation=valuation,
            lattice=self.lattice,
            initial=self.initial,
            d=self.d,
            weights=self.weights,
            weight_lattice=self.weight_lattice,
            epistemic=self.epistemic,
            _adopt=True,
        )
        out._structural_fp = self.structural_fingerprint()
        return out

    def structural_fingerprint(self) -> str:
        """Hash of everything but valuation, lattice and weights.

        Valuation-preserving derivatives (projections, added atoms) share
        it, so the compiled-array cache of the 2-valued engines hits.
        """
        if self._structural_fp is None:
            doc = {
                "agents": self.agents,
                "states": self.states,
                "actions": self.actions,
                "transitions": sorted(
                    (q, act, q2) for (q, act), q2 in self.transitions.items()
                ),
                "epistemic": sorted(
                    (a, sorted(sorted(c) for c in classes))
                    for a, classes in (self.epistemic or {}).items()
                ),
            }
            blob = json.dumps(doc, sort_keys=True, default=list).encode()
            self._structural_fp = hashlib.sha256(blob).hexdigest()
        return self._structural_fp

    def fingerprint(self) -> str:
        """Stable content hash, used as a cache key for projections."""
        if self._fingerprint is None:
            doc = {
                "agents": self.agents,
                "states": self.states,
                "actions": self.actions,
                "initial": self.initial,
                "transitions": sorted(
                    (q, act, q2) for (q, act), q2 in self.transitions.items()
                ),
                "d": sorted((a, q, acts) for (a, q), acts in self.d.items()),
                "valuation": sorted(
                    (p, q, v) for (p, q), v in self.valuation.items()
                ),
                "lattice": self.lattice.lattice.elements,
                "hasse": self.lattice.lattice.leq_table.tobytes().hex(),
                "constants": sorted(self.lattice.constants.items()),
                "weights": sorted(
                    (q, act, w) for (q, act), w in (self.weights or {}).items()
                ),
                "epistemic": sorted(
                    (a, sorted(sorted(c) for c in classes))
                    for a, classes in (self.epistemic or {}).items()
                ),
            }
            blob = json.dumps(doc, sort_keys=True, default=list).encode()
            self._fingerprint = hashlib.sha256(blob).hexdigest()
        return self._fingerprint

    def __repr__(self):
        return (
            f"MvCGS({len(self.states)} states, {len(self.agents)} agents, "
            f"{len(self.transitions)} transitions)"
        )


class TwoValuedCGS(MvCGS):
    """An MvCGS whose lattice is exactly the two-element lattice."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if not self.is_two_valued():
            raise ModelInvalid(["a two-valued model must use a 2-element lattice"])

    def holds(self, prop: str, state: str) -> bool:
        return self.value(prop, state) == self.lattice.lattice.top


# -- validation ----------------------------------------------------------------

def validate(model: MvCGS) -> list[str]:
    """Check all structural invariants; returns a list of violations (empty if ok)."""
    v: list[str] = []
    lat = model.lattice.lattice
    states = set(model.states)
    if model.initial not in states:
        v.append(f"initial state {model.initial!r} not among states")
    if not model.agents:
        v.append("no agents declared")
    for a in model.agents:
        for q in model.states:
            acts = model.d.get((a, q), ())
            if not acts:
                v.append(f"d({a},{q}) is empty")
            for act in acts:
                if act not in model.actions:
                    v.append(f"d({a},{q}) uses undeclared action {act!r}")
    # transition totality: defined exactly on tuples of available actions
    import itertools as _it

    for q in model.states:
        avail = [model.d.get((a, q), ()) for a in model.agents]
        expected = set(_it.product(*avail)) if all(avail) else set()
        actual = {act for (q1, act) in model.transitions if q1 == q}
        for act in expected - actual:
            v.append(f"missing transition at {q} for joint action {act}")
        for act in actual - expected:
            v.append(f"transition at {q} uses unavailable joint action {act}")
    for (q, act), q2 in model.transitions.items():
        if q not in states:
            v.append(f"transition from unknown state {q!r}")
        if q2 not in states:
            v.append(f"transition into unknown state {q2!r}")
        if len(act) != len(model.agents):
            v.append(f"joint action {act} has wrong arity at {q}")
    for (p, q), val in model.valuation.items():
        if p not in model.propositions:
            v.append(f"valuation of undeclared proposition {p!r}")
        if q not in states:
            v.append(f"valuation at unknown state {q!r}")
        if val not in lat:
            v.append(f"valuation value {val!r} outside the lattice")
    if model.weights is not None:
        wl = model.weight_lattice.lattice if model.weight_lattice else lat
        for key, w in model.weights.items():
            if key not in model.transitions:
                v.append(f"weight on undefined transition {key}")
            if w not in wl:
                v.append(f"weight {w!r} outside the weight lattice")
        for key in model.transitions:
            if key not in model.weights:
                v.append(f"transition {key} lacks a weight")
    if model.epistemic:
        for a, classes in model.epistemic.items():
            if a not in model.agents:
                v.append(f"epistemic relation for unknown agent {a!r}")
                continue
            covered: set[str] = set()
            for cls in classes:
                if covered & cls:
                    v.append(f"epistemic classes of {a} overlap on {sorted(covered & cls)}")
                covered |= cls
                for q in cls:
                    if q not in states:
                        v.append(f"epistemic class of {a} names unknown state {q!r}")
                reps = {model.d.get((a, q), ()) for q in cls}
                if len({frozenset(r) for r in reps}) > 1:
                    v.append(
                        f"uniformity violation: d({a},.) differs within class {sorted(cls)}"
                    )
            if covered != states:
                v.append(f"epistemic classes of {a} do not cover all states")
    return v


def require_valid(model: MvCGS) -> MvCGS:
    violations = validate(model)
    if violations:
        raise ModelInvalid(violations)
    return model


# -- designated-weight pruning ---------------------------------------------------

@dataclass
class PruneReport:
    kept: int
    dropped: int
    dead_ends: list[str] = field(default_factory=list)


def prune_designated(model: MvCGS, designated: Iterable[str]) -> tuple[MvCGS, PruneReport]:
    """Keep exactly the transitions whose weight is designated.

    Availability is re-derived so only actions participating in some kept
    joint transition remain.  States left with no outgoing transition are
    reported; model checking errors out if it needs paths through them.
    """
    if model.weights is None:
        raise ModelInvalid(["prune_designated requires a weighted model"])
    wl = (model.weight_lattice or model.lattice).lattice
    dset = set(designated)
    for w in dset:
        if w not in wl:
            raise UnknownElement(f"designated value {w!r} outside the weight lattice")
    kept = {
        key: q2
        for key, q2 in model.transitions.items()
        if model.weights[key] in dset
    }
    pruned = MvCGS(
        agents=model.agents,
        states=model.states,
        actions=model.actions,
        transitions=kept,
        propositions=model.propositions,
        valuation=model.valuation,
        lattice=model.lattice,
        initial=model.initial,
        d=None,  # re-derive from the kept transitions
        weights=None,
        weight_lattice=None,
        epistemic=model.epistemic,
    )
    report = PruneReport(
        kept=len(kept),
        dropped=len(model.transitions) - len(kept),
        dead_ends=pruned.dead_ends(),
    )
    return pruned, report


# -- may/must structures ----------------------------------------------------------

MAY_MUST_WEIGHTS = ("bot", "U", "top")


@dataclass
class MayMustStructure:
    """A 3-valued abstraction: must edges necessarily fire, may edges possibly.

    ``valuation3`` maps (prop, state) to one of "t", "f", "u".  The may
    relation must be a total function for the weighted-model embedding.
    """

    states: tuple[str, ...]
    propositions: tuple[str, ...]
    valuation3: dict[tuple[str, str], str]
    may_edges: frozenset[tuple[str, str]]
    must_edges: frozenset[tuple[str, str]]
    initial: Optional[str] = None

    def __post_init__(self):
        if not self.must_edges <= self.may_edges:
            raise ModelInvalid(["must edges must be contained in may edges"])
        for (p, q), val in self.valuation3.items():
            if val not in ("t", "f", "u"):
                raise ModelInvalid([f"3-valued valuation uses {val!r}"])


def weight_lattice_may_must() -> InterpretedLattice:
    """The three-point weight chain bot < U < top used for may/must weights."""
    from .lattice import build_lattice

    lat = build_lattice(MAY_MUST_WEIGHTS, [("bot", "U"), ("U", "top")])
    return InterpretedLattice(lat, {x: x for x in MAY_MUST_WEIGHTS})


_KLEENE = {"t": "top", "f": "bot", "u": "u"}


def from_may_must(k: MayMustStructure) -> MvCGS:
    """Encode a may/must structure as a single-agent weighted model.

    Must edges carry weight top, may-only edges weight U; propositions move
    onto the 3-element Kleene chain (f < u < t).
    """
    out: dict[str, list[str]] = {q: [] for q in k.states}
    for (q, q2) in k.may_edges:
        out[q].append(q2)
    for q, succs in out.items():
        if len(succs) != 1:
            raise NotAFunction(
                f"may relation is not a total function at {q!r} ({len(succs)} successors)"
            )
    transitions = {}
    weights = {}
    for (q, q2) in sorted(k.may_edges):
        act = ("go",)
        transitions[(q, act)] = q2
        weights[(q, act)] = "top" if (q, q2) in k.must_edges else "U"
    valuation = {
        (p, q): _KLEENE[val] for (p, q), val in k.valuation3.items()
    }
    return MvCGS(
        agents=("sys",),
        states=k.states,
        actions=("go",),
        transitions=transitions,
        propositions=k.propositions,
        valuation=valuation,
        lattice=builtin_lattice("3"),
        initial=k.initial,
        weights=weights,
        weight_lattice=weight_lattice_may_must(),
    )


# -- model files -------------------------------------------------------------------

def model_from_dict(doc: Mapping, base_dir: str = ".") -> MvCGS:
    """Build a model from a parsed model file (see the README for the schema)."""
    lattice = _resolve_lattice(doc.get("lattice"), base_dir)
    weight_lattice = None
    if doc.get("weight_lattice") is not None:
        weight_lattice = _resolve_lattice(doc["weight_lattice"], base_dir)
    agents = [str(a) for a in doc["agents"]]
    states = [str(s) for s in doc["states"]]
    actions = [str(a) for a in doc["actions"]]
    transitions = {}
    weights = {}
    has_weights = False
    for entry in doc["transitions"]:
        key = (str(entry["from"]), tuple(str(a) for a in entry["act"]))
        transitions[key] = str(entry["to"])
        if "weight" in entry:
            has_weights = True
            weights[key] = str(entry["weight"])
    d = None
    if doc.get("d") is not None:
        d = {
            (str(a), str(q)): tuple(str(x) for x in acts)
            for a, per_state in doc["d"].items()
            for q, acts in per_state.items()
        }
    valuation = {}
    props = list(doc.get("valuation") or {})
    for p, per_state in (doc.get("valuation") or {}).items():
        for q, val in per_state.items():
            valuation[(str(p), str(q))] = str(val)
    for p in doc.get("propositions") or []:
        if str(p) not in props:
            props.append(str(p))
    epistemic = None
    if doc.get("epistemic") is not None:
        epistemic = {
            str(a): [frozenset(str(q) for q in cls) for cls in classes]
            for a, classes in doc["epistemic"].items()
        }
    return MvCGS(
        agents=agents,
        states=states,
        actions=actions,
        transitions=transitions,
        propositions=props,
        valuation=valuation,
        lattice=lattice,
        initial=str(doc["initial"]) if doc.get("initial") is not None else None,
        d=d,
        weights=weights if has_weights else None,
        weight_lattice=weight_lattice,
        epistemic=epistemic,
    )


def _resolve_lattice(spec, base_dir: str) -> InterpretedLattice:
    import os

    import yaml

    if spec is None:
        raise ModelInvalid(["model file lacks a lattice"])
    if isinstance(spec, str):
        from .lattice import BUILTIN_LATTICE_NAMES

        if spec in BUILTIN_LATTICE_NAMES:
            return builtin_lattice(spec)
        with open(os.path.join(base_dir, spec)) as fh:
            return lattice_from_dict(yaml.safe_load(fh))
    return lattice_from_dict(spec)


def load_model(path_or_name: str) -> MvCGS:
    """Load a model file, or one of the built-in models (``paper:...``)."""
    import os

    import yaml

    if path_or_name.startswith("paper:"):
        from .bench import builtin_model

        return builtin_model(path_or_name)
    with open(path_or_name) as fh:
        doc = yaml.safe_load(fh)
    return model_from_dict(doc, base_dir=os.path.dirname(path_or_name) or ".")
