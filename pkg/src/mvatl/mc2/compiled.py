"""Dense array encoding of a two-valued game for the fixpoint engines.

Threshold projections of one model all share the same game structure, so
the expensive array build is cached by structural fingerprint and only the
proposition masks differ between compiled games.
"""

from __future__ import annotations

import numpy as np

from ..cgs import MvCGS
from ..errors import ModelInvalid, UnknownState


class GameStructure:
    """States, agents, actions and the edge arrays, independent of valuation."""

    def __init__(self, model: MvCGS):
        self.states = model.states
        self.state_index = {q: i for i, q in enumerate(self.states)}
        self.agents = model.agents
        self.agent_index = {a: i for i, a in enumerate(self.agents)}
        self.actions = model.actions
        self.action_index = {x: i for i, x in enumerate(self.actions)}
        self.n_states = len(self.states)
        edges = sorted(
            (self.state_index[q], tuple(self.action_index[x] for x in act), self.state_index[q2])
            for (q, act), q2 in model.transitions.items()
        )
        self.n_edges = len(edges)
        self.edge_src = np.array([e[0] for e in edges], dtype=np.int64)
        self.edge_dst = np.array([e[2] for e in edges], dtype=np.int64)
        self.edge_actions = (
            np.array([e[1] for e in edges], dtype=np.int64).reshape(self.n_edges, len(self.agents))
            if self.n_edges
            else np.zeros((0, len(self.agents)), dtype=np.int64)
        )
        out_degree = np.zeros(self.n_states, dtype=np.int64)
        np.add.at(out_degree, self.edge_src, 1)
        self.dead_end_states = tuple(
            self.states[i] for i in np.flatnonzero(out_degree == 0)
        )
        self._views: dict[tuple[str, ...], "CoalitionView"] = {}

    def coalition(self, agents: tuple[str, ...]) -> "CoalitionView":
        key = tuple(sorted(agents, key=self.agent_index.__getitem__))
        if key not in self._views:
            self._views[key] = CoalitionView(self, key)
        return self._views[key]


class CoalitionView:
    """Per-coalition grouping of the edge list.

    ``akey`` assigns each edge the (factorized) index of the coalition's
    share of its joint action; ``flat`` is the combined (state, akey) group
    index the kernels consume.  For the empty coalition the kernels use the
    plain source/destination arrays instead.
    """

    def __init__(self, structure: GameStructure, agents: tuple[str, ...]):
        self.agents = agents
        self.empty = not agents
        idx = [structure.agent_index[a] for a in agents]
        if self.empty:
            self.n_keys = 1
            self.akey = np.zeros(structure.n_edges, dtype=np.int64)
        else:
            cols = structure.edge_actions[:, idx]
            _, inverse = np.unique(cols, axis=0, return_inverse=True)
            self.akey = inverse.astype(np.int64)
            self.n_keys = int(self.akey.max()) + 1 if structure.n_edges else 1
        self.flat = structure.edge_src * self.n_keys + self.akey


_structure_cache: dict[str, GameStructure] = {}


class CompiledGame:
    """A game structure bound to one 2-valued model's valuation."""

    def __init__(self, model: MvCGS):
        if not model.is_two_valued():
            raise ModelInvalid(["the 2-valued engines require a 2-element lattice"])
        self.model = model
        key = model.structural_fingerprint()
        structure = _structure_cache.get(key)
        if structure is None:
            structure = GameStructure(model)
            _structure_cache[key] = structure
        self.structure = structure
        self._atom_masks: dict[str, np.ndarray] = {}

    # structure passthroughs
    @property
    def states(self):
        return self.structure.states

    @property
    def state_index(self):
        return self.structure.state_index

    @property
    def agents(self):
        return self.structure.agents

    @property
    def agent_index(self):
        return self.structure.agent_index

    @property
    def actions(self):
        return self.structure.actions

    @property
    def action_index(self):
        return self.structure.action_index

    @property
    def n_states(self):
        return self.structure.n_states

    @property
    def n_edges(self):
        return self.structure.n_edges

    @property
    def edge_src(self):
        return self.structure.edge_src

    @property
    def edge_dst(self):
        return self.structure.edge_dst

    @property
    def edge_actions(self):
        return self.structure.edge_actions

    @property
    def dead_end_states(self):
        return self.structure.dead_end_states

    def coalition(self, agents: tuple[str, ...]) -> CoalitionView:
        return self.structure.coalition(agents)

    # -- state-set conversions -------------------------------------------------

    def mask_of(self, states) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        for q in states:
            try:
                mask[self.state_index[q]] = True
            except KeyError:
                raise UnknownState(f"unknown state {q!r}") from None
        return mask

    def set_of(self, mask: np.ndarray) -> frozenset[str]:
        return frozenset(self.states[i] for i in np.flatnonzero(mask))

    def atom_mask(self, prop: str) -> np.ndarray:
        mask = self._atom_masks.get(prop)
        if mask is None:
            top = self.model.lattice.lattice.top
            mask = np.zeros(self.n_states, dtype=bool)
            for (p, q), v in self.model.valuation.items():
                if p == prop and v == top:
                    mask[self.state_index[q]] = True
            self._atom_masks[prop] = mask
        return mask

    def constant_mask(self, name: str) -> np.ndarray:
        elem = self.model.lattice.constant(name)
        value = elem == self.model.lattice.lattice.top
        return np.full(self.n_states, value, dtype=bool)
