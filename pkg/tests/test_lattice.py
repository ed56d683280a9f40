"""Lattice algebra: construction, bounds, irreducibles, reductions."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvatl.errors import (
    CycleInOrder,
    NotALattice,
    NotDistributive,
    NotJoinIrreducible,
    UnknownElement,
)
from mvatl.lattice import (
    ReductionMap,
    build_lattice,
    builtin_lattice,
    check_reduction_triple,
    lattice_from_dict,
)

from conftest import FIG3_LATTICES, chain_lattice, m5_lattice, n5_lattice


class TestBuild:
    def test_two_point_chain(self):
        lat = build_lattice({"bot", "top"}, [("bot", "top")])
        assert lat.meet("top", "top") == "top"
        assert lat.bottom == "bot" and lat.top == "top"

    def test_diamond(self):
        lat = builtin_lattice("2x2").lattice
        assert lat.join("a", "b") == "top"
        assert lat.meet("a", "b") == "bot"

    def test_m5_is_a_lattice(self):
        lat = m5_lattice()
        assert lat.join("l1", "l2") == "top"
        assert lat.meet("l1", "l3") == "bot"

    def test_cycle_rejected(self):
        with pytest.raises(CycleInOrder):
            build_lattice({"x", "y"}, [("x", "y"), ("y", "x")])

    def test_missing_join_rejected(self):
        # two maximal elements: no least upper bound
        with pytest.raises(NotALattice):
            build_lattice({"bot", "x", "y"}, [("bot", "x"), ("bot", "y")])

    def test_unknown_edge_element(self):
        with pytest.raises(UnknownElement):
            build_lattice({"bot"}, [("bot", "zap")])

    def test_from_dict(self):
        doc = {
            "elements": ["lo", "hi"],
            "hasse": [["lo", "hi"]],
            "constants": {"no": "lo", "yes": "hi"},
        }
        interp = lattice_from_dict(doc)
        assert interp.constant("yes") == "hi"
        assert interp.constant("__bot__") == "lo"


class TestOrder:
    def test_bottom_below_everything(self):
        for name in FIG3_LATTICES:
            lat = builtin_lattice(name).lattice
            assert all(lat.leq(lat.bottom, x) for x in lat.elements)
            assert all(lat.leq(x, lat.top) for x in lat.elements)

    def test_drone_lattice_order(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        assert lat.leq("bot_d", "top_d")
        assert lat.lt("bot_g", "undec")
        assert lat.incomparable("top_d", "top_g")
        assert not lat.incomparable("bot", "top_g")

    def test_unknown_element(self):
        lat = builtin_lattice("2").lattice
        with pytest.raises(UnknownElement):
            lat.leq("bot", "sideways")


class TestBounds:
    def test_neutral_elements(self):
        lat = builtin_lattice("2x2").lattice
        assert lat.big_join([]) == "bot"
        assert lat.big_meet([]) == "top"

    def test_drone_lattice_folds(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        assert lat.big_join(["top_d", "bot_g"]) == "top_d"
        assert lat.big_meet(["top_d", "top_g"]) == "undec"

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_lattice_laws(self, data):
        name = data.draw(st.sampled_from(FIG3_LATTICES))
        lat = builtin_lattice(name).lattice
        elem = st.sampled_from(lat.elements)
        x, y, z = data.draw(elem), data.draw(elem), data.draw(elem)
        assert lat.meet(x, y) == lat.meet(y, x)
        assert lat.join(x, y) == lat.join(y, x)
        assert lat.meet(x, lat.meet(y, z)) == lat.meet(lat.meet(x, y), z)
        assert lat.join(x, lat.join(y, z)) == lat.join(lat.join(x, y), z)
        assert lat.meet(x, x) == x and lat.join(x, x) == x
        assert lat.join(x, lat.meet(x, y)) == x  # absorption
        assert lat.meet(x, lat.join(x, y)) == x


class TestDistributivity:
    @pytest.mark.parametrize("name", FIG3_LATTICES)
    def test_stock_lattices_distributive(self, name):
        assert builtin_lattice(name).lattice.is_distributive()

    def test_m5_not_distributive(self):
        assert not m5_lattice().is_distributive()

    def test_n5_not_distributive(self):
        assert not n5_lattice().is_distributive()


class TestJoinIrreducibles:
    def test_three_chain(self):
        lat = builtin_lattice("3").lattice
        assert set(lat.join_irreducibles()) == {"u", "top"}

    def test_diamond(self):
        lat = builtin_lattice("2x2").lattice
        assert set(lat.join_irreducibles()) == {"a", "b"}

    def test_drone_lattice(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        assert set(lat.join_irreducibles()) == {
            "top", "top_d", "top_g", "bot_d", "bot_g", "bot_d^bot_g",
        }

    @pytest.mark.parametrize("name", FIG3_LATTICES)
    def test_decomposition_identity(self, name):
        lat = builtin_lattice(name).lattice
        for x in lat.elements:
            parts = lat.decompose(x)
            assert lat.big_join(parts) == x
            assert all(lat.leq(l, x) for l in parts)

    def test_decompose_bottom_empty(self):
        lat = builtin_lattice("2+2x2").lattice
        assert lat.decompose("bot") == frozenset()

    def test_decompose_examples(self):
        big = builtin_lattice("2+2x2+2x2").lattice
        assert big.decompose("top_d+top_g") == frozenset(
            {"top_d", "top_g", "bot_d", "bot_g", "bot_d^bot_g"}
        )
        mid = builtin_lattice("2+2x2").lattice
        assert mid.decompose("undec+incons") == frozenset(
            {"undec", "incons", "undec^incons"}
        )

    def test_nondistributive_refuses_decompose(self):
        with pytest.raises(NotDistributive):
            m5_lattice().decompose("top")


class TestThreshold:
    def test_cut_semantics(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        f = lat.threshold("top_d")
        assert f("top") == "top"
        assert f("undec") == "bot"
        for x in lat.elements:
            assert (f(x) == "top") == lat.leq("top_d", x)

    def test_low_cut(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        f = lat.threshold("bot_g")
        assert f("top_d") == "top"  # bot_g below top_d

    def test_rejects_reducible_value(self):
        lat = builtin_lattice("2+2x2+2x2").lattice
        with pytest.raises(NotJoinIrreducible):
            lat.threshold("undec")  # join of bot_d and bot_g
        with pytest.raises(UnknownElement):
            lat.threshold("nope")

    def test_nondistributive_refused(self):
        with pytest.raises(NotDistributive):
            m5_lattice().threshold("l1")

    @pytest.mark.parametrize("name", FIG3_LATTICES)
    def test_bound_preservation_exhaustive(self, name):
        lat = builtin_lattice(name).lattice
        for ell in lat.join_irreducibles():
            f = lat.threshold(ell)
            ok, witness = check_reduction_triple(f, "homomorphism")
            assert ok, witness
            for x, y in itertools.product(lat.elements, repeat=2):
                assert f(lat.meet(x, y)) == lat.meet(f(x), f(y))
                assert f(lat.join(x, y)) == lat.join(f(x), f(y))

    def test_m5_counterexample_upper_bounds(self):
        # the cut at l1 is no homomorphism: it breaks the join of l2 and l3
        lat = m5_lattice()
        mapping = {
            x: ("top" if lat.leq("l1", x) else "bot") for x in lat.elements
        }
        f = ReductionMap(lat, ("bot", "top"), mapping)
        ok, witness = check_reduction_triple(f, "homomorphism")
        assert not ok
        assert f(lat.join("l2", "l3")) == "top"
        assert lat.join(f("l2"), f("l3")) == "bot"


class TestReductionTriple:
    def test_identity_both_modes(self):
        for name in FIG3_LATTICES:
            lat = builtin_lattice(name).lattice
            ident = ReductionMap.identity(lat)
            assert check_reduction_triple(ident, "homomorphism") == (True, None)
            assert check_reduction_triple(ident, "C1C2") == (True, None)

    @pytest.mark.parametrize("name", FIG3_LATTICES)
    def test_thresholds_fail_c1c2_beyond_two_elements(self, name):
        # collapsing maps cannot be one-to-one
        lat = builtin_lattice(name).lattice
        assert len(lat) > 2
        for ell in lat.join_irreducibles():
            ok, witness = check_reduction_triple(lat.threshold(ell), "C1C2")
            assert not ok and witness is not None

    def test_chain_collapse_witness(self):
        # 4-chain cut keeping only the bottom point separate: values 1 and 2
        # collapse together, which C1 catches at the pair (1, 2)
        lat = chain_lattice(4)
        mapping = {x: ("3" if x != "0" else "0") for x in lat.elements}
        f = ReductionMap(lat, ("0", "3"), mapping)
        assert check_reduction_triple(f, "homomorphism") == (True, None)
        ok, witness = check_reduction_triple(f, "C1C2")
        assert not ok
        assert witness[:2] == ("1", "2")

    def test_c1c2_iff_injective_order_preserving(self):
        # exhaustive over all self-maps of the diamond
        lat = builtin_lattice("2x2").lattice
        elems = lat.elements
        for images in itertools.product(elems, repeat=len(elems)):
            mapping = dict(zip(elems, images))
            try:
                f = ReductionMap(lat, set(images), mapping)
            except NotALattice:
                continue  # image does not induce a sublattice
            ok, _ = check_reduction_triple(f, "C1C2")
            injective = len(set(images)) == len(elems)
            order_ok = all(
                (not lat.lt(x, y)) or lat.lt(mapping[x], mapping[y])
                for x in elems
                for y in elems
            )
            incomp_ok = all(
                (not lat.incomparable(x, y))
                or lat.incomparable(mapping[x], mapping[y])
                for x in elems
                for y in elems
            )
            assert ok == (injective and order_ok and incomp_ok)
