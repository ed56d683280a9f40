"""Multi-valued checking: local/global translation, recursion, oracle ties."""

import random

import pytest

from mvatl.bench import builtin_model
from mvatl.errors import ImplicationPresent, InconclusiveError, NotDistributive
from mvatl.lattice import InterpretedLattice, builtin_lattice
from mvatl.logic import parse
from mvatl.mvmc import (
    CheckerConfig,
    FreshAtom,
    Valuation,
    gmcheck_rec,
    gmcheck_tr,
    mcheck_tr,
    truth_level,
    valid_in_model,
)
from mvatl.oracle import mv_oracle
from mvatl.projection import project_threshold

from conftest import (
    FIG3_LATTICES,
    atl_formula_pool,
    implication_formula_pool,
    m5_lattice,
    random_model,
)

AG = ["1", "2"]


class TestLocalChecking:
    def test_drone_values(self):
        m = builtin_model("paper:mmulti")
        assert mcheck_tr(m, "(0,0)", parse("<<1>> F pol1", AG)) == "top"
        assert mcheck_tr(m, "(0,0)", parse("<<1>> G pol1", AG)) == "undec"
        phi = parse("<<1,2>> F (target & allvisited & (pol1|pol2))", AG)
        assert mcheck_tr(m, "(0,0)", phi) == "top_d"

    def test_implication_refused(self):
        m = builtin_model("paper:mmulti")
        with pytest.raises(ImplicationPresent):
            mcheck_tr(m, "(0,0)", parse("pol1 -> pol2", AG))

    def test_nondistributive_refused(self):
        from mvatl.cgs import MvCGS

        lat = InterpretedLattice(m5_lattice(), {})
        m = MvCGS(
            agents=["1"], states=["q"], actions=["a"],
            transitions={("q", ("a",)): "q"},
            propositions=["p"], valuation={("p", "q"): "l1"}, lattice=lat,
        )
        with pytest.raises(NotDistributive):
            mcheck_tr(m, "q", parse("<<1>> X p", ["1"]))


class TestGlobalChecking:
    def test_constant_top(self):
        m = builtin_model("paper:mmulti")
        v = gmcheck_tr(m, parse("#top", AG))
        assert all(x == "top" for x in v.values.values())

    def test_atoms_reconstruct_themselves(self):
        m = builtin_model("paper:mmulti")
        v = gmcheck_tr(m, parse("pol1", AG))
        assert v.to_dict() == {q: m.value("pol1", q) for q in m.states}

    def test_reach_pol1_everywhere(self):
        m = builtin_model("paper:mmulti")
        v = gmcheck_tr(m, parse("<<1>> F pol1", AG))
        # every state can reach a pol1-state under drone 1's control
        assert v.to_dict() == {
            "(0,0)": "top", "(1,1)": "top", "(2,2)": "top_d", "(1,2)": "top",
            "(2,1)": "top_d", "(3,3)_1": "top_d", "(3,3)_2": "top_d",
        }

    def test_matches_oracle_on_builtin(self):
        m = builtin_model("paper:mmulti")
        for text in ["<<1>> F pol1", "<<2>> G pol2", "[[1]] F target",
                     "<<1,2>> (pol1 U target)", "[[]] F allvisited"]:
            phi = parse(text, AG)
            assert gmcheck_tr(m, phi) == mv_oracle(m, phi), text

    def test_threshold_monotonicity(self):
        # stricter cuts satisfy fewer states
        from mvatl.mc2 import mc_atl_perfect

        m = builtin_model("paper:mmulti")
        lat = m.lattice.lattice
        phi = parse("<<1>> F pol1", AG)
        sets = {
            ell: mc_atl_perfect(project_threshold(m, ell), phi)
            for ell in lat.join_irreducibles()
        }
        for a in lat.join_irreducibles():
            for b in lat.join_irreducibles():
                if lat.leq(a, b):
                    assert sets[b] <= sets[a]

    def test_parallel_matches_serial(self):
        m = builtin_model("paper:mmulti")
        phi = parse("<<1>> F pol1", AG)
        serial = gmcheck_tr(m, phi, CheckerConfig(parallel=1))
        threaded = gmcheck_tr(m, phi, CheckerConfig(parallel=4))
        assert serial == threaded

    def test_timing_sink(self):
        m = builtin_model("paper:mmulti")
        sink = {}
        gmcheck_tr(m, parse("pol1", AG), timing_sink=sink)
        assert set(sink) == set(m.lattice.lattice.join_irreducibles())
        assert all(t >= 0 for t in sink.values())


class TestRecursive:
    def test_paper_implications(self):
        m = builtin_model("paper:mmulti")
        cases = {
            "#undec -> <<1>> G pol1": "top",
            "#top -> <<1>> G pol1": "bot",
            "<<1>> F pol1 -> <<2>> F pol2": "top",
            "<<1>> F (pol1 <-> #top_g)": "bot",
        }
        for text, want in cases.items():
            assert gmcheck_rec(m, parse(text, AG))["(0,0)"] == want, text

    def test_delegates_when_implication_free(self):
        m = builtin_model("paper:mmulti")
        phi = parse("<<1>> F pol1", AG)
        assert gmcheck_rec(m, phi) == gmcheck_tr(m, phi)

    def test_fresh_atom_provenance(self):
        m = builtin_model("paper:mmulti")
        introduced = []
        gmcheck_rec(m, parse("pol1 -> pol2", AG), introduced=introduced)
        assert len(introduced) == 1
        assert isinstance(introduced[0], FreshAtom)
        assert introduced[0].name.startswith("__cmp")

    def test_nested_implication_under_temporal(self):
        m = builtin_model("paper:mmulti")
        phi = parse("<<1>> X (pol1 -> pol2)", AG)
        assert gmcheck_rec(m, phi) == mv_oracle(m, phi)


class TestTruthLevels:
    def test_constant(self):
        m = builtin_model("paper:mmulti")
        assert truth_level(m, "(0,0)", parse("#top", AG))
        assert not truth_level(m, "(0,0)", parse("#undec", AG))

    def test_paper_example(self):
        m = builtin_model("paper:mmulti")
        assert truth_level(m, "(0,0)", parse("#undec -> <<1>> G pol1", AG))
        assert not truth_level(m, "(0,0)", parse("<<1>> F (pol1 <-> #top_g)", AG))

    def test_valid_in_model(self):
        m = builtin_model("paper:mmulti")
        assert valid_in_model(m, parse("#top", AG))
        assert not valid_in_model(m, parse("<<1>> F pol1", AG))  # top_d states


class TestDifferentialSmall:
    @pytest.mark.parametrize("lattice_name", FIG3_LATTICES)
    def test_engines_agree(self, lattice_name):
        rng = random.Random(hash(lattice_name) % 1000)
        lattice = builtin_lattice(lattice_name)
        cfg = CheckerConfig()
        for _ in range(5):
            m = random_model(rng, lattice, n_states=5)
            for phi in atl_formula_pool():
                tr = gmcheck_tr(m, phi, cfg)
                rec = gmcheck_rec(m, phi, cfg)
                orc = mv_oracle(m, phi, cfg)
                assert tr == rec == orc, str(phi)
            for phi in implication_formula_pool(lattice):
                rec = gmcheck_rec(m, phi, cfg)
                orc = mv_oracle(m, phi, cfg)
                assert rec == orc, str(phi)


class TestApproxSurface:
    def test_inconclusive_propagates_as_error(self):
        # an implication over an inconclusive operand refuses to guess
        m = builtin_model("paper:mmulti_imperfect")
        cfg = CheckerConfig(semantics="ir_approx")
        phi = parse("#top_d -> <<1,2>> F (target & allvisited & (pol1|pol2))", AG)
        with pytest.raises(InconclusiveError):
            gmcheck_rec(m, phi, cfg)

    def test_conclusive_approx_formula(self):
        m = builtin_model("paper:mmulti_imperfect")
        cfg = CheckerConfig(semantics="ir_approx")
        result = gmcheck_tr(m, parse("<<1>> F pol1", AG), cfg)
        assert result.inconclusive_states() == []
        assert result.as_exact()["(0,0)"] == "top"

    def test_truth_level_can_settle_with_bounds(self):
        m = builtin_model("paper:mmulti_imperfect")
        cfg = CheckerConfig(semantics="ir_approx")
        # lower bound already reaches top at (0,0)
        assert truth_level(m, "(0,0)", parse("<<1>> F pol1", AG), cfg)


class TestValuationSerialization:
    def test_round_trip(self):
        m = builtin_model("paper:mmulti")
        v = gmcheck_tr(m, parse("<<1>> F pol1", AG))
        assert Valuation.from_dict(v.to_dict()) == v
