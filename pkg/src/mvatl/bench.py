"""Scalable drone-patrol benchmark generator and built-in models.

The generator builds a multi-valued game from a patrol map: drones move
around a location graph, spend battery on movement (including failed
movement attempts), and evaluate their pollution atoms from the combined
drone/ground sensor readings at their current location.  The two built-in
models reproduce the seven- and eleven-state patrol examples exactly as
data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

from .cgs import MvCGS
from .errors import MapInvalid, StateSpaceCapExceeded, UnknownModel
from .lattice import builtin_lattice

READINGS = ("polluted", "clean", "none")
DIRECTIONS = ("N", "S", "E", "W")
_OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}

# combined (drone reading, ground reading) -> truth value of the pollution atom
READING_TABLE = {
    ("polluted", "polluted"): "top",
    ("polluted", "clean"): "top_d",
    ("polluted", "none"): "top_d",
    ("clean", "polluted"): "top_g",
    ("none", "polluted"): "top_g",
    ("none", "none"): "undec",
    ("clean", "none"): "bot_d",
    ("none", "clean"): "bot_g",
    ("clean", "clean"): "bot",
}


@dataclass
class MapGraph:
    """A patrol map: locations with sensor readings, compass-tagged edges."""

    readings: dict[str, tuple[str, str]]  # location -> (drone, ground)
    edges: dict[tuple[str, str], str]  # (location, direction) -> neighbor
    start: str
    target: Optional[str] = None

    def __post_init__(self):
        if self.start not in self.readings:
            raise MapInvalid(f"start location {self.start!r} not on the map")
        if self.target is not None and self.target not in self.readings:
            raise MapInvalid(f"target location {self.target!r} not on the map")
        for loc, (dr, gr) in self.readings.items():
            if dr not in READINGS or gr not in READINGS:
                raise MapInvalid(f"location {loc!r} has unknown readings {(dr, gr)}")
        for (loc, direction), dest in self.edges.items():
            if direction not in DIRECTIONS:
                raise MapInvalid(f"unknown direction {direction!r} at {loc!r}")
            if loc not in self.readings or dest not in self.readings:
                raise MapInvalid(f"edge ({loc},{direction},{dest}) leaves the map")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "MapGraph":
        readings = {}
        for entry in doc["locations"]:
            drone = entry.get("drone_reading", entry.get("drone", "none"))
            ground = entry.get("ground_reading", entry.get("ground", "none"))
            readings[str(entry["id"])] = (str(drone), str(ground))
        symmetric = bool(doc.get("symmetric", True))
        edges: dict[tuple[str, str], str] = {}

        def add(a, direction, b):
            key = (a, direction)
            if key in edges and edges[key] != b:
                raise MapInvalid(
                    f"location {a!r} has two {direction}-neighbors: {edges[key]!r}, {b!r}"
                )
            edges[key] = b

        for a, direction, b in (tuple(e) for e in doc["edges"]):
            a, direction, b = str(a), str(direction), str(b)
            add(a, direction, b)
            if symmetric:
                add(b, _OPPOSITE[direction], a)
        return cls(
            readings=readings,
            edges=edges,
            start=str(doc["start"]),
            target=str(doc["target"]) if doc.get("target") is not None else None,
        )

    def moves(self, loc: str) -> dict[str, str]:
        return {
            d: dest for (l, d), dest in self.edges.items() if l == loc
        }

    def pollution_value(self, loc: str) -> str:
        return READING_TABLE[self.readings[loc]]

    def adjacent(self, a: str, b: str) -> bool:
        return a == b or any(
            dest == b for (l, _d), dest in self.edges.items() if l == a
        )


@dataclass
class DroneConfig:
    """Scaling knobs of the generator.

    strict_moves=True exposes only the legal compass directions (and allows
    waiting only with a dead battery); strict_moves=False exposes all five
    actions everywhere, with illegal moves failing in place while still
    draining the battery.  track_visited adds the team's visited-location
    set to the state (it dominates state-space growth).
    """

    drones: int = 1
    energy: int = 1
    strict_moves: bool = True
    track_visited: bool = True
    state_cap: int = 500_000

    def __post_init__(self):
        if self.drones < 1:
            raise MapInvalid("at least one drone required")
        if self.energy < 0:
            raise MapInvalid("energy must be nonnegative")


_ALL = "all"
_SOME = "some"


def gen_drones(map_graph: MapGraph, cfg: DroneConfig) -> MvCGS:
    """Generate the patrol game for a map and configuration.

    States are tuples of per-drone (location, energy) plus the team's
    visited set; once every battery is dead the visited set collapses to
    its all-visited bit, which merges states no future behavior can tell
    apart.  Atoms: one lattice-valued pollution atom per drone, two-valued
    position atoms, ``target`` (all drones at the target) and
    ``allvisited``.
    """
    k = cfg.drones
    agents = tuple(str(i) for i in range(1, k + 1))
    all_locs = frozenset(map_graph.readings)
    start_visited = frozenset([map_graph.start]) if cfg.track_visited else frozenset()

    def canonical(locs, energies, visited):
        if not cfg.track_visited:
            visited = _SOME
        elif isinstance(visited, str):
            pass  # already collapsed; the team was dead before this step
        elif all(e == 0 for e in energies):
            visited = _ALL if visited == all_locs else _SOME
        else:
            visited = frozenset(visited)
        return (tuple(locs), tuple(energies), visited)

    def drone_actions(loc, energy):
        if energy == 0:
            return ("wait",)
        moves = map_graph.moves(loc)
        if cfg.strict_moves:
            dirs = tuple(d for d in DIRECTIONS if d in moves)
            return dirs if dirs else ("wait",)
        return DIRECTIONS + ("wait",)

    def apply_action(loc, energy, action):
        if action == "wait":
            return loc, energy
        dest = map_graph.moves(loc).get(action)
        if dest is None:
            return loc, energy - 1  # failed attempt still drains the battery
        return dest, energy - 1

    initial = canonical(
        [map_graph.start] * k, [cfg.energy] * k, start_visited
    )
    states = {initial}
    order = [initial]
    transitions = {}
    frontier = [initial]
    while frontier:
        state = frontier.pop(0)
        locs, energies, visited = state
        avail = [drone_actions(locs[i], energies[i]) for i in range(k)]
        for joint in itertools.product(*avail):
            new_locs, new_energies = [], []
            for i in range(k):
                loc2, e2 = apply_action(locs[i], energies[i], joint[i])
                new_locs.append(loc2)
                new_energies.append(e2)
            if isinstance(visited, frozenset):
                new_visited = visited | frozenset(new_locs) if cfg.track_visited else visited
            else:
                new_visited = visited  # already collapsed, team is dead
            succ = canonical(new_locs, new_energies, new_visited)
            transitions[(state, joint)] = succ
            if succ not in states:
                states.add(succ)
                order.append(succ)
                frontier.append(succ)
                if len(states) > cfg.state_cap:
                    raise StateSpaceCapExceeded(cfg.state_cap, len(states))

    names = {s: _state_name(s) for s in order}
    lattice = builtin_lattice("2+2x2+2x2")
    propositions = [f"pol{i}" for i in range(1, k + 1)]
    propositions += [f"at_{i}_{loc}" for i in range(1, k + 1) for loc in sorted(all_locs)]
    if map_graph.target is not None:
        propositions.append("target")
    if cfg.track_visited:
        propositions.append("allvisited")
    valuation = {}
    for s in order:
        locs, _energies, visited = s
        for i in range(1, k + 1):
            value = map_graph.pollution_value(locs[i - 1])
            if value != "bot":
                valuation[(f"pol{i}", names[s])] = value
            valuation[(f"at_{i}_{locs[i - 1]}", names[s])] = "top"
        if map_graph.target is not None and all(
            loc == map_graph.target for loc in locs
        ):
            valuation[("target", names[s])] = "top"
        if cfg.track_visited and (visited == _ALL or visited == all_locs):
            valuation[("allvisited", names[s])] = "top"

    epistemic = {
        agents[i - 1]: _observation_partition(map_graph, order, names, i, k)
        for i in range(1, k + 1)
    }
    return MvCGS(
        agents=agents,
        states=[names[s] for s in order],
        actions=("N", "S", "E", "W", "wait"),
        transitions={
            (names[q], act): names[q2] for (q, act), q2 in transitions.items()
        },
        propositions=propositions,
        valuation=valuation,
        lattice=lattice,
        initial=names[initial],
        epistemic=epistemic,
    )


def _state_name(state) -> str:
    locs, energies, visited = state
    if visited == _ALL:
        vis = "all"
    elif visited == _SOME:
        vis = "-"
    else:
        vis = "".join(sorted(visited)) or "-"
    return f"({','.join(locs)}|{','.join(map(str, energies))}|{vis})"


def _observation_partition(map_graph, order, names, drone, k):
    """States grouped by what one drone observes.

    A drone sees its own location and battery, the drone-sensor readings
    of teammates at its own or adjacent locations, and the team's visited
    set; ground readings are broadcast but static, so they distinguish
    nothing.
    """
    groups: dict[tuple, list[str]] = {}
    for s in order:
        locs, energies, visited = s
        own_loc = locs[drone - 1]
        nearby = tuple(
            sorted(
                map_graph.readings[locs[j]][0]
                for j in range(k)
                if j != drone - 1 and map_graph.adjacent(own_loc, locs[j])
            )
        )
        key = (
            own_loc,
            energies[drone - 1],
            nearby,
            visited if isinstance(visited, str) else tuple(sorted(visited)),
        )
        groups.setdefault(key, []).append(names[s])
    return [frozenset(g) for g in groups.values()]


# --- built-in maps -------------------------------------------------------------

def builtin_map(name: str) -> MapGraph:
    """Stock maps: the four-location example map and a 12-location grid."""
    if name in ("paper:map4", "map4"):
        return MapGraph.from_dict(
            {
                "locations": [
                    {"id": "0", "drone": "none", "ground": "none"},
                    {"id": "1", "drone": "polluted", "ground": "polluted"},
                    {"id": "2", "drone": "clean", "ground": "clean"},
                    {"id": "3", "drone": "polluted", "ground": "clean"},
                ],
                "edges": [
                    ["0", "N", "1"],
                    ["0", "E", "2"],
                    ["1", "E", "3"],
                    ["2", "N", "3"],
                ],
                "symmetric": False,
                "start": "0",
                "target": "3",
            }
        )
    if name == "grid12":
        # our own 3x4 grid for scaling runs; readings cycle through all
        # sensor combinations (no claim of matching any published map)
        combos = [
            ("none", "none"), ("polluted", "polluted"), ("clean", "clean"),
            ("polluted", "none"), ("none", "polluted"), ("clean", "none"),
            ("none", "clean"), ("polluted", "clean"), ("clean", "polluted"),
            ("none", "none"), ("polluted", "polluted"), ("clean", "clean"),
        ]
        locations = []
        edges = []
        for row in range(3):
            for col in range(4):
                i = row * 4 + col
                locations.append(
                    {"id": str(i), "drone": combos[i][0], "ground": combos[i][1]}
                )
                if col + 1 < 4:
                    edges.append([str(i), "E", str(i + 1)])
                if row + 1 < 3:
                    edges.append([str(i), "N", str(i + 4)])
        return MapGraph.from_dict(
            {
                "locations": locations,
                "edges": edges,
                "symmetric": True,
                "start": "0",
                "target": "11",
            }
        )
    raise UnknownModel(f"unknown built-in map {name!r}")


def load_map(path_or_name: str) -> MapGraph:
    if path_or_name.startswith("paper:") or path_or_name in ("map4", "grid12"):
        return builtin_map(path_or_name)
    import yaml

    with open(path_or_name) as fh:
        return MapGraph.from_dict(yaml.safe_load(fh))


# --- built-in models -------------------------------------------------------------

_TERMINALS_7 = ("(3,3)_1", "(3,3)_2")
_TERMINALS_11 = (
    "(3,3)_1", "(3,3)_2", "(3,1)_1", "(3,1)_2", "(3,2)_1", "(3,2)_2",
)


def builtin_model(name: str) -> MvCGS:
    """The exact patrol figures as data: ``paper:mmulti`` (perfect
    information, 7 states) and ``paper:mmulti_imperfect`` (11 states with
    epistemic classes)."""
    if name == "paper:mmulti":
        return _mmulti()
    if name == "paper:mmulti_imperfect":
        return _mmulti_imperfect()
    raise UnknownModel(f"unknown built-in model {name!r}")


def _mmulti() -> MvCGS:
    states = ["(0,0)", "(1,1)", "(2,2)", "(1,2)", "(2,1)", "(3,3)_1", "(3,3)_2"]
    transitions = {
        ("(0,0)", ("N", "N")): "(1,1)",
        ("(0,0)", ("E", "E")): "(2,2)",
        ("(0,0)", ("N", "E")): "(1,2)",
        ("(0,0)", ("E", "N")): "(2,1)",
        ("(1,1)", ("E", "E")): "(3,3)_1",
        ("(2,2)", ("N", "N")): "(3,3)_1",
        ("(1,2)", ("E", "N")): "(3,3)_2",
        ("(2,1)", ("N", "E")): "(3,3)_2",
        ("(3,3)_1", ("wait", "wait")): "(3,3)_1",
        ("(3,3)_2", ("wait", "wait")): "(3,3)_2",
    }
    valuation = {
        ("pol1", "(0,0)"): "undec",
        ("pol2", "(0,0)"): "undec",
        ("pol1", "(1,1)"): "top",
        ("pol2", "(1,1)"): "top",
        ("pol1", "(1,2)"): "top",
        ("pol2", "(2,1)"): "top",
        ("pol1", "(3,3)_1"): "top_d",
        ("pol2", "(3,3)_1"): "top_d",
        ("target", "(3,3)_1"): "top",
        ("pol1", "(3,3)_2"): "top_d",
        ("pol2", "(3,3)_2"): "top_d",
        ("target", "(3,3)_2"): "top",
        ("allvisited", "(3,3)_2"): "top",
    }
    return MvCGS(
        agents=("1", "2"),
        states=states,
        actions=("N", "E", "wait"),
        transitions=transitions,
        propositions=("pol1", "pol2", "target", "allvisited"),
        valuation=valuation,
        lattice=builtin_lattice("2+2x2+2x2"),
        initial="(0,0)",
    )


def _mmulti_imperfect() -> MvCGS:
    states = [
        "(0,0)", "(1,1)", "(2,2)", "(1,2)", "(2,1)",
        "(3,3)_1", "(3,3)_2", "(3,1)_1", "(3,1)_2", "(3,2)_1", "(3,2)_2",
    ]
    transitions = {
        ("(0,0)", ("N", "N")): "(1,1)",
        ("(0,0)", ("E", "E")): "(2,2)",
        ("(0,0)", ("N", "E")): "(1,2)",
        ("(0,0)", ("E", "N")): "(2,1)",
        ("(1,1)", ("E", "E")): "(3,3)_1",
        ("(1,1)", ("E", "N")): "(3,1)_1",
        ("(2,2)", ("N", "N")): "(3,3)_1",
        ("(2,2)", ("N", "E")): "(3,2)_1",
        ("(1,2)", ("E", "N")): "(3,3)_2",
        ("(1,2)", ("E", "E")): "(3,2)_2",
        ("(2,1)", ("N", "E")): "(3,3)_2",
        ("(2,1)", ("N", "N")): "(3,1)_2",
    }
    for q in _TERMINALS_11:
        transitions[(q, ("wait", "wait"))] = q
    valuation = {
        ("pol1", "(0,0)"): "undec",
        ("pol2", "(0,0)"): "undec",
        ("pol1", "(1,1)"): "top",
        ("pol2", "(1,1)"): "top",
        ("pol1", "(1,2)"): "top",
        ("pol2", "(2,1)"): "top",
        ("pol1", "(3,3)_1"): "top_d",
        ("pol2", "(3,3)_1"): "top_d",
        ("target", "(3,3)_1"): "top",
        ("pol1", "(3,3)_2"): "top_d",
        ("pol2", "(3,3)_2"): "top_d",
        ("target", "(3,3)_2"): "top",
        ("allvisited", "(3,3)_2"): "top",
        ("pol1", "(3,1)_1"): "top_d",
        ("pol2", "(3,1)_1"): "top",
        ("pol1", "(3,1)_2"): "top_d",
        ("pol2", "(3,1)_2"): "top",
        ("allvisited", "(3,1)_2"): "top",
        ("pol1", "(3,2)_1"): "top_d",
        ("pol1", "(3,2)_2"): "top_d",
        ("allvisited", "(3,2)_2"): "top",
    }
    epistemic = {
        "1": [
            frozenset(["(0,0)"]),
            frozenset(["(1,1)", "(1,2)"]),
            frozenset(["(2,1)", "(2,2)"]),
            frozenset(_TERMINALS_11),
        ],
        "2": [
            frozenset(["(0,0)", "(1,1)", "(2,2)", "(1,2)", "(2,1)"]),
            frozenset(_TERMINALS_11),
        ],
    }
    return MvCGS(
        agents=("1", "2"),
        states=states,
        actions=("N", "E", "wait"),
        transitions=transitions,
        propositions=("pol1", "pol2", "target", "allvisited"),
        valuation=valuation,
        lattice=builtin_lattice("2+2x2+2x2"),
        initial="(0,0)",
        epistemic=epistemic,
    )
