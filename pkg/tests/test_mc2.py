"""2-valued engines: kernels, perfect-information fixpoints, ir variants."""

import random

import numpy as np
import pytest

from mvatl.bench import builtin_model
from mvatl.cgs import MvCGS
from mvatl.errors import (
    DeadEndError,
    ImplicationPresent,
    NotATLFragment,
    StrategySpaceTooLarge,
)
from mvatl.lattice import builtin_lattice
from mvatl.logic import parse
from mvatl.mc2 import (
    CompiledGame,
    mc_atl_ir_approx,
    mc_atl_ir_exact,
    mc_atl_perfect,
    pre,
    set_kernel_backend,
)
from mvatl.mc2.imperfect import find_uniform_witness, ir_bounds, strategy_count
from mvatl.mc2.kernels import (
    all_succ_numpy,
    any_succ_numpy,
    coop_pre_numpy,
    navoid_pre_numpy,
)
from mvatl.projection import project_threshold

from conftest import classical_atl_states, random_model


def proj(name, level):
    return project_threshold(builtin_model(name), level)


class TestPre:
    def test_full_target_all_controllable(self):
        two = proj("paper:mmulti", "top")
        assert pre(two, ("1",), set(two.states)) == frozenset(two.states)

    def test_empty_target(self):
        two = proj("paper:mmulti", "top")
        assert pre(two, ("1",), set()) == frozenset()

    def test_drone_one_step(self):
        # drone 1 plays N; both replies of drone 2 land in the target
        two = proj("paper:mmulti", "top")
        result = pre(two, ("1",), {"(1,1)", "(1,2)"})
        assert "(0,0)" in result

    def test_empty_coalition_is_all_paths(self):
        two = proj("paper:mmulti", "top")
        #]]0,0)'s four successors; only a full-cover target pulls it in
        assert "(0,0)" not in pre(two, (), {"(1,1)", "(1,2)"})
        assert "(0,0)" in pre(two, (), {"(1,1)", "(1,2)", "(2,1)", "(2,2)"})


class TestPerfect:
    def test_drone_reach_pol1(self):
        two = proj("paper:mmulti", "top_d")
        sat = mc_atl_perfect(two, parse("<<1>> F pol1", ["1", "2"]))
        assert "(0,0)" in sat

    def test_holds_in_every_projection(self):
        m = builtin_model("paper:mmulti")
        phi = parse("<<1>> F pol1", list(m.agents))
        for ell in m.lattice.lattice.join_irreducibles():
            assert "(0,0)" in mc_atl_perfect(project_threshold(m, ell), phi)

    def test_coalition_excluded_at_top(self):
        m = builtin_model("paper:mmulti")
        phi = parse("<<1,2>> F (target & allvisited & (pol1|pol2))", list(m.agents))
        assert "(0,0)" not in mc_atl_perfect(project_threshold(m, "top"), phi)
        assert "(0,0)" in mc_atl_perfect(project_threshold(m, "top_d"), phi)

    def test_noavoid_never_p(self):
        two = proj("paper:mmulti", "top")
        sat = mc_atl_perfect(two, parse("[[]] F nosuchprop", ["1", "2"]))
        assert sat == frozenset()

    def test_rejects_implications_and_nesting(self):
        two = proj("paper:mmulti", "top")
        with pytest.raises(ImplicationPresent):
            mc_atl_perfect(two, parse("pol1 -> pol2", ["1", "2"]))
        with pytest.raises(NotATLFragment):
            mc_atl_perfect(two, parse("<<1>> (F pol1 & F pol2)", ["1", "2"]))

    def test_dead_end_policy(self):
        lat = builtin_lattice("2")
        m = MvCGS(
            agents=["1"], states=["q0", "q1"], actions=["a"],
            transitions={("q0", ("a",)): "q1"},  # q1 is a dead end
            propositions=["p"], valuation={("p", "q1"): "top"}, lattice=lat,
        )
        # X is fine (vacuous at the dead end: empty meet is truth, empty
        # join is falsity), U is refused
        assert mc_atl_perfect(m, parse("<<>> X p", ["1"])) == {"q0", "q1"}
        assert mc_atl_perfect(m, parse("[[]] X p", ["1"])) == {"q0"}
        with pytest.raises(DeadEndError):
            mc_atl_perfect(m, parse("<<1>> F p", ["1"]))

    def test_memoryless_enumeration_agrees(self):
        # the fixpoint engine equals brute-force memoryless enumeration
        rng = random.Random(11)
        from mvatl.oracle import mv_oracle

        two = builtin_lattice("2")
        formulas = [
            parse("<<1>> F p", ["1", "2"]),
            parse("<<2>> G p", ["1", "2"]),
            parse("<<1>> (p U q)", ["1", "2"]),
            parse("[[1]] F p", ["1", "2"]),
            parse("<<1>> X q", ["1", "2"]),
        ]
        for _ in range(25):
            m = random_model(rng, two, n_states=5)
            for phi in formulas:
                sat = mc_atl_perfect(m, phi)
                want = mv_oracle(m, phi)
                assert sat == frozenset(
                    q for q, v in want.items() if v == "top"
                ), str(phi)


class TestFixpointIterations:
    def test_bounded_by_state_count(self):
        from mvatl.mc2.perfect import fixpoint_until, fixpoint_weak_until

        rng = random.Random(2)
        two = builtin_lattice("2")
        for _ in range(10):
            m = random_model(rng, two, n_states=7)
            game = CompiledGame(m)
            a = game.atom_mask("p")
            b = game.atom_mask("q")
            for fixpoint in (fixpoint_until, fixpoint_weak_until):
                counter = {"n": 0}

                def step(z):
                    counter["n"] += 1
                    from mvatl.mc2.perfect import coop_pre_mask

                    return coop_pre_mask(game, ("1",), z)

                fixpoint(step, a, b)
                assert counter["n"] <= game.n_states + 1


class TestKernelBackends:
    def teardown_method(self):
        set_kernel_backend(None)

    def test_backends_agree_on_random_edges(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n_states = int(rng.integers(2, 12))
            n_keys = int(rng.integers(1, 5))
            n_edges = int(rng.integers(1, 40))
            src = rng.integers(0, n_states, n_edges)
            dst = rng.integers(0, n_states, n_edges)
            akey = rng.integers(0, n_keys, n_edges)
            flat = src * n_keys + akey
            in_q = rng.integers(0, 2, n_states).astype(bool)
            args = (flat, dst, n_states, n_keys, in_q)
            from mvatl.mc2 import kernels

            set_kernel_backend("numba")
            a = kernels.coop_pre(*args)
            b = kernels.navoid_pre(*args)
            c = kernels.all_succ(src, dst, n_states, in_q)
            d = kernels.any_succ(src, dst, n_states, in_q)
            set_kernel_backend("numpy")
            assert (coop_pre_numpy(*args) == a).all()
            assert (navoid_pre_numpy(*args) == b).all()
            assert (all_succ_numpy(src, dst, n_states, in_q) == c).all()
            assert (any_succ_numpy(src, dst, n_states, in_q) == d).all()


class TestImperfect:
    def agents(self):
        return ["1", "2"]

    def test_fig_imperfect_single_drone(self):
        two = proj("paper:mmulti_imperfect", "top")
        sat = mc_atl_ir_exact(two, parse("<<1>> F pol1", self.agents()))
        assert "(0,0)" in sat

    def test_fig_imperfect_coalition_fails_everywhere(self):
        m = builtin_model("paper:mmulti_imperfect")
        phi = parse("<<1,2>> F (target & allvisited & (pol1|pol2))", self.agents())
        for ell in m.lattice.lattice.join_irreducibles():
            sat = mc_atl_ir_exact(project_threshold(m, ell), phi)
            assert "(0,0)" not in sat, ell

    def test_empty_coalition_matches_perfect(self):
        two = proj("paper:mmulti_imperfect", "top_d")
        phi = parse("<<>> F pol1", self.agents())
        assert mc_atl_ir_exact(two, phi) == mc_atl_perfect(two, phi)

    def test_identity_epistemic_matches_perfect(self):
        rng = random.Random(3)
        two = builtin_lattice("2")
        formulas = [
            parse("<<1>> F p", self.agents()),
            parse("<<1>> (p U q)", self.agents()),
            parse("[[2]] G p", self.agents()),
            parse("<<1,2>> X p", self.agents()),
        ]
        for _ in range(10):
            m = random_model(rng, two, n_states=5)  # no epistemic: identity
            for phi in formulas:
                assert mc_atl_ir_exact(m, phi) == mc_atl_perfect(m, phi), str(phi)

    def test_strategy_cap(self):
        two = proj("paper:mmulti_imperfect", "top")
        with pytest.raises(StrategySpaceTooLarge):
            mc_atl_ir_exact(two, parse("<<1>> F pol1", self.agents()), strategy_cap=1)

    def test_strategy_count(self):
        two = proj("paper:mmulti_imperfect", "top")
        # drone 1: classes with 2, 1, 1, 1 choices; drone 2: 2 and 1
        assert strategy_count(two, ("1",)) == 2
        assert strategy_count(two, ("2",)) == 2
        assert strategy_count(two, ("1", "2")) == 4

    def test_witness_strategy(self):
        two = proj("paper:mmulti_imperfect", "top")
        witness = find_uniform_witness(two, parse("<<1>> F pol1", self.agents()), "(0,0)")
        assert witness is not None
        start_class = "{(0,0)}"
        assert witness["1"][start_class] == "N"

    def test_no_witness_for_impossible(self):
        two = proj("paper:mmulti_imperfect", "top")
        phi = parse("<<1,2>> F (target & allvisited & (pol1|pol2))", self.agents())
        assert find_uniform_witness(two, phi, "(0,0)") is None


class TestApprox:
    def test_bounds_on_fig_model(self):
        two = proj("paper:mmulti_imperfect", "top")
        phi = parse("<<1>> F pol1", ["1", "2"])
        lower = mc_atl_ir_approx(two, phi, "lower")
        upper = mc_atl_ir_approx(two, phi, "upper")
        assert "(0,0)" in lower and "(0,0)" in upper

    def test_upper_is_perfect(self):
        two = proj("paper:mmulti_imperfect", "top_d")
        phi = parse("<<1,2>> F (target & allvisited & (pol1|pol2))", ["1", "2"])
        assert mc_atl_ir_approx(two, phi, "upper") == mc_atl_perfect(two, phi)

    def test_sandwich_on_random_models(self):
        # lower <= exact <= upper on epistemic random models
        rng = random.Random(23)
        two = builtin_lattice("2")
        formulas = [
            parse("<<1>> F p", ["1", "2"]),
            parse("<<1>> (p U q)", ["1", "2"]),
            parse("<<1>> G p", ["1", "2"]),
            parse("<<1,2>> F (p & q)", ["1", "2"]),
            parse("<<2>> X p", ["1", "2"]),
            parse("[[1]] F p", ["1", "2"]),
            parse("[[1]] G q", ["1", "2"]),
            parse("[[1,2]] (p U q)", ["1", "2"]),
        ]
        checked = 0
        for i in range(40):
            m = random_model(rng, two, n_states=6, with_epistemic=True)
            for phi in formulas:
                exact = mc_atl_ir_exact(m, phi)
                lower, upper = ir_bounds(m, phi)
                assert lower <= exact <= upper, (i, str(phi))
                checked += 1
        assert checked == 320

    def test_conclusive_when_classes_trivial(self):
        rng = random.Random(9)
        two = builtin_lattice("2")
        phi = parse("<<1>> F p", ["1", "2"])
        for _ in range(10):
            m = random_model(rng, two, n_states=5)  # identity observation
            lower, upper = ir_bounds(m, phi)
            assert lower == upper == mc_atl_perfect(m, phi)


class TestConservativeAgainstTextbook:
    def test_against_dict_checker(self):
        rng = random.Random(77)
        two = builtin_lattice("2")
        formulas = [
            parse("<<1>> F p", ["1", "2"]),
            parse("<<2>> (p U q)", ["1", "2"]),
            parse("<<1,2>> G p", ["1", "2"]),
            parse("[[1]] F q", ["1", "2"]),
            parse("<<>> X p", ["1", "2"]),
        ]
        for _ in range(20):
            m = random_model(rng, two, n_states=5)
            for phi in formulas:
                assert mc_atl_perfect(m, phi) == classical_atl_states(m, phi), str(phi)
