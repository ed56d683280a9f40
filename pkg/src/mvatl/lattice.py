"""Finite lattice algebra.

Lattices are built from their covering (Hasse) edges; the full order is the
reflexive-transitive closure.  Element identifiers are opaque strings which
the library never interprets.  All objects here are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CycleInOrder,
    LatticeMismatch,
    NotALattice,
    NotDistributive,
    NotHomomorphism,
    NotJoinIrreducible,
    UnknownConstant,
    UnknownElement,
)


class Lattice:
    """A finite lattice given by its elements and comparability table.

    Attributes:
        elements: element names in a fixed construction order.
        leq_table: boolean matrix, ``leq_table[i, j]`` iff element i <= j.
        meet_table / join_table: index-valued tables of binary glb / lub.
        bottom / top: the least and greatest element names.
    """

    def __init__(self, elements: Sequence[str], leq_table: np.ndarray):
        self.elements = tuple(elements)
        self.index = {x: i for i, x in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise NotALattice(tuple(self.elements), "duplicate elements")
        self.leq_table = leq_table
        self.meet_table, self.join_table = self._bound_tables()
        n = len(self.elements)
        bot = [i for i in range(n) if leq_table[i].all()]
        top = [j for j in range(n) if leq_table[:, j].all()]
        # glb/lub totality already forces unique extrema on a nonempty set
        self.bottom = self.elements[bot[0]]
        self.top = self.elements[top[0]]
        self._ji_cache = None
        self._distributive_cache = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_hasse(cls, elements: Iterable[str], hasse_edges: Iterable[tuple[str, str]]) -> "Lattice":
        """Build a lattice from covering edges ``(lower, upper)``.

        Raises CycleInOrder if the edges induce a cycle and NotALattice if
        some pair has no unique meet or join.
        """
        elems = list(dict.fromkeys(elements))
        if not elems:
            raise NotALattice((), "empty element set")
        idx = {x: i for i, x in enumerate(elems)}
        n = len(elems)
        adj = np.zeros((n, n), dtype=bool)
        for lo, hi in hasse_edges:
            if lo not in idx or hi not in idx:
                raise UnknownElement(f"hasse edge ({lo}, {hi}) names undeclared element")
            if lo == hi:
                raise CycleInOrder(f"self-edge on {lo}")
            adj[idx[lo], idx[hi]] = True
        leq = _transitive_closure(adj)
        if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
            raise CycleInOrder("hasse edges induce a cycle")
        np.fill_diagonal(leq, True)
        return cls(elems, leq)

    def _bound_tables(self):
        leq = self.leq_table
        n = leq.shape[0]
        meet = np.full((n, n), -1, dtype=np.int64)
        join = np.full((n, n), -1, dtype=np.int64)
        for i in range(n):
            for j in range(i, n):
                lower = np.flatnonzero(leq[:, i] & leq[:, j])
                m = [k for k in lower if leq[lower, k].all()]
                if len(m) != 1:
                    raise NotALattice((self.elements[i], self.elements[j]), "meet")
                upper = np.flatnonzero(leq[i] & leq[j])
                u = [k for k in upper if leq[k, upper].all()]
                if len(u) != 1:
                    raise NotALattice((self.elements[i], self.elements[j]), "join")
                meet[i, j] = meet[j, i] = m[0]
                join[i, j] = join[j, i] = u[0]
        return meet, join

    # -- basic queries -------------------------------------------------------

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.index

    def _i(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownElement(f"{x!r} is not an element of this lattice") from None

    def leq(self, x: str, y: str) -> bool:
        return bool(self.leq_table[self._i(x), self._i(y)])

    def lt(self, x: str, y: str) -> bool:
        return x != y and self.leq(x, y)

    def incomparable(self, x: str, y: str) -> bool:
        i, j = self._i(x), self._i(y)
        return not (self.leq_table[i, j] or self.leq_table[j, i])

    def meet(self, x: str, y: str) -> str:
        return self.elements[self.meet_table[self._i(x), self._i(y)]]

    def join(self, x: str, y: str) -> str:
        return self.elements[self.join_table[self._i(x), self._i(y)]]

    def big_meet(self, xs: Iterable[str]) -> str:
        """Fold of binary meet; the empty meet is top."""
        acc = self._i(self.top)
        for x in xs:
            acc = self.meet_table[acc, self._i(x)]
        return self.elements[acc]

    def big_join(self, xs: Iterable[str]) -> str:
        """Fold of binary join; the empty join is bottom."""
        acc = self._i(self.bottom)
        for x in xs:
            acc = self.join_table[acc, self._i(x)]
        return self.elements[acc]

    def down_set(self, x: str) -> frozenset[str]:
        i = self._i(x)
        return frozenset(self.elements[j] for j in np.flatnonzero(self.leq_table[:, i]))

    def up_set(self, x: str) -> frozenset[str]:
        i = self._i(x)
        return frozenset(self.elements[j] for j in np.flatnonzero(self.leq_table[i]))

    # -- structure -----------------------------------------------------------

    def is_distributive(self) -> bool:
        """Exhaustively check both distributive laws over all triples."""
        if self._distributive_cache is None:
            m, j = self.meet_table, self.join_table
            n = len(self.elements)
            ok = True
            for z in range(n):
                # z | (x & y) == (z | x) & (z | y), and dually
                if not (j[z, m] == m[j[z], :][:, j[z]]).all():
                    ok = False
                    break
                if not (m[z, j] == j[m[z], :][:, m[z]]).all():
                    ok = False
                    break
            self._distributive_cache = ok
        return self._distributive_cache

    def join_irreducibles(self) -> tuple[str, ...]:
        """Non-bottom elements that are not a join of two strictly smaller ones.

        Returned in construction order (a fixed topological-friendly order that
        callers rely on for deterministic iteration).
        """
        if self._ji_cache is None:
            n = len(self.elements)
            ji = []
            bot = self._i(self.bottom)
            for k in range(n):
                if k == bot:
                    continue
                irreducible = True
                for x in range(n):
                    for y in range(n):
                        if self.join_table[x, y] == k and x != k and y != k:
                            irreducible = False
                            break
                    if not irreducible:
                        break
                if irreducible:
                    ji.append(self.elements[k])
            self._ji_cache = tuple(ji)
        return self._ji_cache

    def decompose(self, x: str) -> frozenset[str]:
        """Join-irreducibles in the downward closure of x.

        Only defined on distributive lattices, where the join of the result
        reconstructs x (the empty set for bottom).
        """
        if not self.is_distributive():
            raise NotDistributive("decomposition requires a distributive lattice")
        down = self.down_set(x)
        return frozenset(l for l in self.join_irreducibles() if l in down)

    def threshold(self, ell: str) -> "ReductionMap":
        """The two-valued cut at a join-irreducible: x maps to top iff x >= ell."""
        if not self.is_distributive():
            raise NotDistributive("threshold maps require a distributive lattice")
        if ell not in self.join_irreducibles():
            self._i(ell)
            raise NotJoinIrreducible(f"{ell!r} is not join-irreducible")
        mapping = {
            x: (self.top if self.leq(ell, x) else self.bottom) for x in self.elements
        }
        return ReductionMap(self, (self.bottom, self.top), mapping)

    def restrict(self, subset: Iterable[str]) -> "Lattice":
        """The sublattice induced on ``subset`` (order restricted from self)."""
        subs = [x for x in self.elements if x in set(subset)]
        ids = [self._i(x) for x in subs]
        leq = self.leq_table[np.ix_(ids, ids)].copy()
        return Lattice(subs, leq)

    def __repr__(self):
        return f"Lattice({len(self.elements)} elements, bottom={self.bottom!r}, top={self.top!r})"


def _transitive_closure(adj: np.ndarray) -> np.ndarray:
    closure = adj.copy()
    while True:
        nxt = closure | (closure @ closure)
        if (nxt == closure).all():
            return closure
        closure = nxt


def build_lattice(elements: Iterable[str], hasse_edges: Iterable[tuple[str, str]]) -> Lattice:
    """Module-level convenience wrapper around Lattice.from_hasse."""
    return Lattice.from_hasse(elements, hasse_edges)


@dataclass(frozen=True)
class InterpretedLattice:
    """A lattice plus an interpretation of constant names as elements.

    The interpretation need not be surjective.  Two reserved names,
    ``__top__`` and ``__bot__``, always resolve structurally and are used
    internally when derived temporal operators are expanded.
    """

    lattice: Lattice
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name, elem in self.constants.items():
            if elem not in self.lattice:
                raise UnknownElement(
                    f"constant {name!r} maps to unknown element {elem!r}"
                )

    def constant(self, name: str) -> str:
        if name == "__top__":
            return self.lattice.top
        if name == "__bot__":
            return self.lattice.bottom
        try:
            return self.constants[name]
        except KeyError:
            raise UnknownConstant(f"constant {name!r} has no interpretation") from None

    def rename_values(self, f) -> "InterpretedLattice":
        """Internal helper: reinterpret constants through a mapping function."""
        return InterpretedLattice(self.lattice, {c: f(e) for c, e in self.constants.items()})


class ReductionMap:
    """A total map from a source lattice onto a target sublattice.

    The target is given as a subset of source elements whose order is the
    restriction of the source order.  Whether the map is actually a
    homomorphism (or satisfies the stronger order/incomparability conditions)
    is decided by :func:`check_reduction_triple`.
    """

    def __init__(self, source: Lattice, target_elements: Iterable[str], mapping: Mapping[str, str]):
        self.source = source
        target_set = list(dict.fromkeys(target_elements))
        for x in target_set:
            source._i(x)
        self.target = source.restrict(target_set)
        self.mapping = dict(mapping)
        missing = set(source.elements) - set(self.mapping)
        if missing:
            raise UnknownElement(f"mapping is not total; missing {sorted(missing)}")
        for x, y in self.mapping.items():
            source._i(x)
            if y not in self.target:
                raise UnknownElement(f"image {y!r} of {x!r} lies outside the target")

    def __call__(self, x: str) -> str:
        try:
            return self.mapping[x]
        except KeyError:
            raise UnknownElement(f"{x!r} is not an element of the source lattice") from None

    @classmethod
    def identity(cls, lattice: Lattice) -> "ReductionMap":
        return cls(lattice, lattice.elements, {x: x for x in lattice.elements})

    def __repr__(self):
        return f"ReductionMap({len(self.source)} -> {len(self.target)} elements)"


def check_reduction_triple(r: ReductionMap, mode: str = "homomorphism"):
    """Validate a reduction map.

    mode "homomorphism": binary meet/join preservation plus endpoint
    preservation, which on a finite lattice is equivalent to preservation of
    arbitrary bounds.  mode "C1C2": strict-order preservation (C1) and
    incomparability preservation (C2).

    Returns ``(True, None)`` or ``(False, witness)`` where the witness names
    the violating pair and what failed.
    """
    src, f = r.source, r.mapping
    if mode == "homomorphism":
        if f[src.top] != src.top:
            return False, (src.top, src.top, "top not preserved")
        if f[src.bottom] != src.bottom:
            return False, (src.bottom, src.bottom, "bottom not preserved")
        # the target must itself be closed under source meet/join
        for x, y in itertools.combinations_with_replacement(r.target.elements, 2):
            if src.meet(x, y) not in r.target or src.join(x, y) not in r.target:
                return False, (x, y, "target not closed under source bounds")
        for x, y in itertools.combinations_with_replacement(src.elements, 2):
            if f[src.meet(x, y)] != src.meet(f[x], f[y]):
                return False, (x, y, "meet not preserved")
            if f[src.join(x, y)] != src.join(f[x], f[y]):
                return False, (x, y, "join not preserved")
        return True, None
    if mode == "C1C2":
        for x, y in itertools.permutations(src.elements, 2):
            if src.lt(x, y) and not src.lt(f[x], f[y]):
                return False, (x, y, "C1: strict order not preserved")
        for x, y in itertools.combinations(src.elements, 2):
            if src.incomparable(x, y) and not src.incomparable(f[x], f[y]):
                return False, (x, y, "C2: incomparability not preserved")
        return True, None
    raise ValueError(f"unknown mode {mode!r}")


def require_homomorphism(r: ReductionMap) -> None:
    ok, witness = check_reduction_triple(r, "homomorphism")
    if not ok:
        raise NotHomomorphism(witness)


def same_lattice(a: Lattice, b: Lattice) -> bool:
    return a.elements == b.elements and bool((a.leq_table == b.leq_table).all())


def require_same_lattice(a: Lattice, b: Lattice) -> None:
    if not same_lattice(a, b):
        raise LatticeMismatch("lattices differ")


# -- built-in lattices -------------------------------------------------------
#
# Composite elements use canonical ASCII names: "^" for meets ("bot_d^bot_g")
# and "+" for joins ("top_d+top_g").

_BUILTIN_SPECS = {
    "2": (
        ["bot", "top"],
        [("bot", "top")],
    ),
    "3": (
        ["bot", "u", "top"],
        [("bot", "u"), ("u", "top")],
    ),
    "4": (
        ["bot", "n", "s", "top"],
        [("bot", "n"), ("n", "s"), ("s", "top")],
    ),
    "2x2": (
        ["bot", "a", "b", "top"],
        [("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
    ),
    "2+2x2": (
        ["bot", "undec^incons", "undec", "incons", "undec+incons", "top"],
        [
            ("bot", "undec^incons"),
            ("undec^incons", "undec"),
            ("undec^incons", "incons"),
            ("undec", "undec+incons"),
            ("incons", "undec+incons"),
            ("undec+incons", "top"),
        ],
    ),
    "2+2x2+2x2": (
        [
            "bot", "bot_d^bot_g", "bot_d", "bot_g", "undec",
            "top_d", "top_g", "top_d+top_g", "top",
        ],
        [
            ("bot", "bot_d^bot_g"),
            ("bot_d^bot_g", "bot_d"),
            ("bot_d^bot_g", "bot_g"),
            ("bot_d", "undec"),
            ("bot_g", "undec"),
            ("undec", "top_d"),
            ("undec", "top_g"),
            ("top_d", "top_d+top_g"),
            ("top_g", "top_d+top_g"),
            ("top_d+top_g", "top"),
        ],
    ),
}

BUILTIN_LATTICE_NAMES = tuple(_BUILTIN_SPECS)

_builtin_cache: dict[str, InterpretedLattice] = {}


def builtin_lattice(name: str) -> InterpretedLattice:
    """One of the named stock lattices, with every element as its own constant."""
    if name not in _BUILTIN_SPECS:
        raise UnknownElement(
            f"unknown built-in lattice {name!r}; choose from {BUILTIN_LATTICE_NAMES}"
        )
    if name not in _builtin_cache:
        elems, hasse = _BUILTIN_SPECS[name]
        lat = build_lattice(elems, hasse)
        _builtin_cache[name] = InterpretedLattice(lat, {x: x for x in elems})
    return _builtin_cache[name]


def lattice_from_dict(doc: Mapping) -> InterpretedLattice:
    """Load an interpreted lattice from a parsed lattice file.

    Fields: ``elements`` (list of names), ``hasse`` (list of [lower, upper]
    pairs), optional ``constants`` (map name -> element).
    """
    lat = build_lattice(doc["elements"], [tuple(e) for e in doc.get("hasse", [])])
    constants = dict(doc.get("constants") or {})
    return InterpretedLattice(lat, constants)
