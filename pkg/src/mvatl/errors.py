"""Exception hierarchy shared by all mvatl modules."""


class MvatlError(Exception):
    """Base class for all errors raised by this package."""


# --- lattice layer ---------------------------------------------------------

class CycleInOrder(MvatlError):
    """The declared covering edges induce a cycle."""


class NotALattice(MvatlError):
    """Some pair of elements lacks a unique meet or join."""

    def __init__(self, pair, kind):
        self.pair = pair
        self.kind = kind  # "meet" or "join"
        super().__init__(f"no unique {kind} for pair {pair}")


class UnknownElement(MvatlError):
    """An element identifier is not part of the lattice."""


class UnknownConstant(MvatlError):
    """A constant name does not resolve against the interpreted lattice."""


class NotJoinIrreducible(MvatlError):
    """Threshold maps are only defined for join-irreducible elements."""


class NotDistributive(MvatlError):
    """The operation requires a distributive lattice."""


class NotHomomorphism(MvatlError):
    """A reduction map fails bound preservation."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"bound preservation fails: {witness}")


class LatticeMismatch(MvatlError):
    """Two lattices that must agree do not."""


# --- formula layer ---------------------------------------------------------

class FormulaSyntaxError(MvatlError):
    """Parse failure, with the offending position in the input text."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownAgent(MvatlError):
    """A coalition names an agent outside the declared universe."""


class NotATLFragment(MvatlError):
    """The engine only supports strategic operators directly over X/U/W."""


class ImplicationPresent(MvatlError):
    """Implication formulas must go through the recursive global checker."""


# --- model layer -----------------------------------------------------------

class ModelInvalid(MvatlError):
    """A game structure violates its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnknownState(MvatlError):
    """A state identifier is not part of the model."""


class UnknownModel(MvatlError):
    """No built-in model with that name."""


class NotAFunction(MvatlError):
    """The may-relation of a may/must structure must be a total function."""


class DeadEndError(MvatlError):
    """Model checking reached a state with no outgoing transitions."""

    def __init__(self, states):
        self.states = list(states)
        super().__init__(f"dead-end states: {sorted(self.states)}")


class MissingValues(MvatlError):
    """check_formula_conditions needs operand values for every state."""


# --- checking layer --------------------------------------------------------

class StrategySpaceTooLarge(MvatlError):
    """Exact strategy enumeration would exceed the configured cap."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} joint strategies exceed cap {cap}")


class OracleScaleExceeded(MvatlError):
    """The brute-force oracle only runs on desk-scale models."""


class InconclusiveError(MvatlError):
    """Approximate semantics left states undecided where a decision is required."""

    def __init__(self, states, detail=""):
        self.states = list(states)
        msg = f"inconclusive at states: {sorted(map(str, self.states))}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


# --- benchmark layer -------------------------------------------------------

class MapInvalid(MvatlError):
    """A patrol map violates its invariants."""


class StateSpaceCapExceeded(MvatlError):
    """Model generation hit the configured state cap."""

    def __init__(self, cap, count):
        self.cap = cap
        self.count = count
        super().__init__(f"generated {count} states, cap is {cap}")
